"""Corpus-derived word vectors: basis selection, windowed co-occurrence
counting, weighting schemes, and cosine similarity.

A corpus is a sequence of sentences, each a list of tokens (or a text file
with one whitespace-tokenized sentence per line).  The basis is the top-N
corpus words by frequency after stop-list removal, ties broken
lexicographically so that identical corpus bytes always produce identical
spaces.
"""

from __future__ import annotations

import math
import warnings
from collections import Counter
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np


class ZeroVectorWarning(UserWarning):
    """Similarity involving a zero vector was defined as 0."""


@dataclass(frozen=True)
class CountsMeta:
    """Bookkeeping counts behind a space.

    ``basis_total`` is the total number of corpus occurrences of basis
    words (the normalizer of the ratio weighting scheme); the definition
    is recorded because other readings exist.
    """

    total_tokens: int
    word_freq: dict[str, int]
    basis_freq: dict[str, int]
    basis_total: int
    sentence_count: int
    basis_doc_freq: dict[str, int]
    window: str
    weighting: str
    basis_total_definition: str = "total corpus occurrences of basis words"


@dataclass
class VectorSpace:
    """A named basis and a word -> dense weight vector map."""

    basis: tuple[str, ...]
    vectors: dict[str, np.ndarray]
    meta: CountsMeta

    @property
    def dim(self) -> int:
        return len(self.basis)

    def get(self, word: str) -> np.ndarray | None:
        return self.vectors.get(word)

    def __contains__(self, word: str) -> bool:
        return word in self.vectors


def read_corpus(path) -> list[list[str]]:
    with open(path, encoding="utf-8") as fh:
        return [line.split() for line in fh if line.split()]


def _as_sentences(corpus) -> list[list[str]]:
    sentences = []
    for item in corpus:
        toks = item.split() if isinstance(item, str) else list(item)
        if toks:
            sentences.append(toks)
    return sentences


def build_space(
    corpus: Iterable,
    basis_size: int,
    window: "str | int" = "sentence",
    weighting: str = "raw",
    stoplist: Iterable[str] = (),
    bounded_by_sentence: bool = True,
) -> VectorSpace:
    """Count windowed co-occurrences and weight them.

    ``window`` is ``"sentence"`` (all other tokens in the sentence) or an
    int k (k tokens either side, truncated at sentence boundaries unless
    ``bounded_by_sentence`` is False, in which case windows slide over the
    whole token stream).  ``weighting`` is one of raw, ratio, tfidf, pmi.
    Every vocabulary word receives a vector.
    """
    sentences = _as_sentences(corpus)
    if not sentences:
        raise ValueError("empty corpus")
    stop = set(stoplist)

    freq = Counter(tok for sent in sentences for tok in sent)
    total_tokens = sum(freq.values())
    candidates = [w for w in freq if w not in stop]
    if basis_size > len(candidates):
        warnings.warn(
            f"basis_size {basis_size} exceeds usable vocabulary {len(candidates)}; clamping"
        )
        basis_size = len(candidates)
    candidates.sort(key=lambda w: (-freq[w], w))
    basis = tuple(candidates[:basis_size])
    basis_index = {b: i for i, b in enumerate(basis)}

    vocab = sorted(freq)
    counts = {w: np.zeros(len(basis)) for w in vocab}
    if window == "sentence":
        window_desc = "sentence"
        for sent in sentences:
            for i, w in enumerate(sent):
                row = counts[w]
                for j, b in enumerate(sent):
                    if j != i and b in basis_index:
                        row[basis_index[b]] += 1
    else:
        k = int(window)
        if k <= 0:
            raise ValueError("word window must be positive")
        window_desc = f"{k}-words" + ("" if bounded_by_sentence else " unbounded")
        streams = sentences if bounded_by_sentence else [[t for s in sentences for t in s]]
        for sent in streams:
            for i, w in enumerate(sent):
                row = counts[w]
                lo, hi = max(0, i - k), min(len(sent), i + k + 1)
                for j in range(lo, hi):
                    if j != i and sent[j] in basis_index:
                        row[basis_index[sent[j]]] += 1

    doc_freq = Counter()
    for sent in sentences:
        for b in set(sent):
            if b in basis_index:
                doc_freq[b] += 1

    meta = CountsMeta(
        total_tokens=total_tokens,
        word_freq=dict(freq),
        basis_freq={b: freq[b] for b in basis},
        basis_total=sum(freq[b] for b in basis),
        sentence_count=len(sentences),
        basis_doc_freq={b: doc_freq[b] for b in basis},
        window=window_desc,
        weighting="raw",
    )
    space = VectorSpace(basis, counts, meta)
    if weighting != "raw":
        space = reweight(space, weighting)
    return space


def ratio_weight(cooc: float, word_freq: float, basis_freq: float, basis_total: float) -> float:
    """P(b|w)/P(b) estimated as f_{w^b} * f_{b*} / (f_b * f_w); 0 when the
    co-occurrence count is 0 (the division is never taken)."""
    if cooc == 0:
        return 0.0
    return cooc * basis_total / (basis_freq * word_freq)


def reweight(space: VectorSpace, scheme: str) -> VectorSpace:
    """Apply a weighting scheme to a raw-count space."""
    if space.meta.weighting != "raw":
        raise ValueError(f"can only reweight raw-count spaces, got {space.meta.weighting!r}")
    m = space.meta
    bf = np.array([m.basis_freq[b] for b in space.basis], dtype=float)
    out: dict[str, np.ndarray] = {}
    if scheme == "ratio":
        for w, v in space.vectors.items():
            fw = m.word_freq[w]
            with np.errstate(divide="ignore", invalid="ignore"):
                weighted = v * m.basis_total / (bf * fw)
            out[w] = np.where(v > 0, weighted, 0.0)
    elif scheme == "pmi":
        for w, v in space.vectors.items():
            fw = m.word_freq[w]
            with np.errstate(divide="ignore", invalid="ignore"):
                pmi = np.log(v * m.total_tokens / (bf * fw))
            out[w] = np.where(v > 0, np.maximum(pmi, 0.0), 0.0)
    elif scheme == "tfidf":
        df = np.array([m.basis_doc_freq[b] for b in space.basis], dtype=float)
        idf = np.log((1.0 + m.sentence_count) / (1.0 + df)) + 1.0
        for w, v in space.vectors.items():
            out[w] = v * idf
    else:
        raise ValueError(f"unknown weighting scheme {scheme!r}")
    return VectorSpace(space.basis, out, replace(m, weighting=scheme))


def weight_ratio(space: VectorSpace) -> VectorSpace:
    return reweight(space, "ratio")


def cosine(u, v, label: str = "") -> float:
    """Inner product over the product of norms; 0 (with a ZeroVectorWarning)
    if either vector is zero, never NaN."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"cosine of mismatched shapes {u.shape} and {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0.0 or nv == 0.0:
        warnings.warn(f"cosine with zero vector{(' for ' + label) if label else ''}",
                      ZeroVectorWarning)
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def save_space(space: VectorSpace, path) -> None:
    """TSV: header line ``#basis<TAB>b1<TAB>...`` then one ``word<TAB>w1...``
    line per word; weights round-trip at 9 significant digits."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("#basis\t" + "\t".join(space.basis) + "\n")
        for word in sorted(space.vectors):
            fh.write(word + "\t" + "\t".join(_fmt(x) for x in space.vectors[word]) + "\n")


def load_space(path) -> VectorSpace:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if not header or header[0] != "#basis":
            raise ValueError(f"{path}: missing #basis header")
        basis = tuple(header[1:])
        vectors: dict[str, np.ndarray] = {}
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != len(basis) + 1:
                raise ValueError(f"{path}:{lineno}: expected {len(basis)} weights")
            vectors[parts[0]] = np.array([float(x) for x in parts[1:]])
    meta = CountsMeta(
        total_tokens=0, word_freq={}, basis_freq={}, basis_total=0,
        sentence_count=0, basis_doc_freq={}, window="unknown", weighting="loaded",
    )
    return VectorSpace(basis, vectors, meta)


def make_space(basis: Sequence[str], vectors: dict[str, Sequence[float]],
               weighting: str = "manual") -> VectorSpace:
    """Assemble a space from explicit vectors (for small worked examples)."""
    arrs = {w: np.asarray(v, dtype=float) for w, v in vectors.items()}
    for w, v in arrs.items():
        if v.shape != (len(basis),):
            raise ValueError(f"vector for {w!r} has length {v.shape}, basis has {len(basis)}")
    meta = CountsMeta(
        total_tokens=0, word_freq={}, basis_freq={}, basis_total=0,
        sentence_count=0, basis_doc_freq={}, window="manual", weighting=weighting,
    )
    return VectorSpace(tuple(basis), arrs, meta)
