"""Phrase-similarity evaluation: datasets, model scores, rank correlation.

A dataset row pairs two sentences built from the same template, the second
replacing the verb with a landmark synonym, together with one annotator's
1-7 similarity score and the intended HIGH/LOW band.  A model scores each
row by building both sentence representations and comparing them (cosine
for vector models, summed log-probability for the n-gram baselines); model
quality is the Spearman rank correlation of model scores against annotator
scores, pooled over all (entry, annotation) rows by default.
"""

from __future__ import annotations

import json
import math
import warnings
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .space import VectorSpace, ZeroVectorWarning, cosine
from .tensor import Tensor, compose_reduced, kron

KINDS = ("intransitive", "transitive", "adj-transitive")
_COLUMNS = {"intransitive": 6, "transitive": 7, "adj-transitive": 9}


class DatasetFormatError(ValueError):
    """One or more malformed dataset lines, reported with line numbers."""


@dataclass(frozen=True)
class EvalEntry:
    """One annotated row.

    ``slots`` by kind: (noun, verb, landmark) for intransitive,
    (subject, verb, landmark, object) for transitive, and
    (adj1, subject, verb, landmark, adj2, object) for adj-transitive.
    """

    kind: str
    slots: tuple[str, ...]
    band: str
    annotator: str
    score: int

    def item_key(self) -> tuple:
        return (self.kind, self.slots)

    @property
    def verb(self) -> str:
        return self.slots[_VERB_POS[self.kind]]

    @property
    def landmark(self) -> str:
        return self.slots[_VERB_POS[self.kind] + 1]


def parse_dataset(lines: Iterable[str], kind: str) -> list[EvalEntry]:
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")
    want = _COLUMNS[kind]
    entries: list[EvalEntry] = []
    problems: list[str] = []
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != want:
            problems.append(f"line {lineno}: expected {want} columns, got {len(parts)}")
            continue
        annotator, *middle, band, score_text = parts
        if band not in ("HIGH", "LOW"):
            problems.append(f"line {lineno}: band must be HIGH or LOW, got {band!r}")
            continue
        try:
            score = int(score_text)
        except ValueError:
            problems.append(f"line {lineno}: score {score_text!r} is not an integer")
            continue
        if not 1 <= score <= 7:
            problems.append(f"line {lineno}: score {score} outside 1..7")
            continue
        entries.append(EvalEntry(kind, tuple(middle), band, annotator, score))
    if problems:
        raise DatasetFormatError("; ".join(problems))
    return entries


def load_dataset(path, kind: str) -> list[EvalEntry]:
    with open(path, encoding="utf-8") as fh:
        return parse_dataset(fh, kind)


@dataclass
class Resources:
    """Everything a model may need to score entries."""

    space: VectorSpace
    tensors: Mapping[str, Tensor] = field(default_factory=dict)
    corpus: Sequence[Sequence[str]] | None = None
    params: dict = field(default_factory=dict)
    _ngrams: dict = field(default_factory=dict)

    def ngram(self, n: int) -> "NgramModel":
        if n not in self._ngrams:
            if self.corpus is None:
                raise ValueError(f"{n}-gram baseline needs a training corpus")
            self._ngrams[n] = NgramModel(self.corpus, n)
        return self._ngrams[n]


class NgramModel:
    """Add-lambda smoothed n-gram language model over a token corpus."""

    def __init__(self, sentences: Iterable[Sequence[str]], n: int = 2, add: float = 1.0):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = n
        self.add = add
        self.context_counts: Counter = Counter()
        self.counts: Counter = Counter()
        vocab: set[str] = set()
        for sent in sentences:
            toks = ["<s>"] * (n - 1) + list(sent) + ["</s>"]
            vocab.update(toks)
            for i in range(n - 1, len(toks)):
                ctx = tuple(toks[i - n + 1 : i])
                self.context_counts[ctx] += 1
                self.counts[ctx + (toks[i],)] += 1
        self.vocab_size = max(len(vocab), 1)

    def logprob(self, tokens: Sequence[str]) -> float:
        toks = ["<s>"] * (self.n - 1) + list(tokens) + ["</s>"]
        total = 0.0
        for i in range(self.n - 1, len(toks)):
            ctx = tuple(toks[i - self.n + 1 : i])
            num = self.counts[ctx + (toks[i],)] + self.add
            den = self.context_counts[ctx] + self.add * self.vocab_size
            total += math.log(num / den)
        return total


def _adj_compose(mode: str, adj: str, noun: str, res: Resources) -> np.ndarray | None:
    """Compose an adjective onto its noun per the requested adjective mode."""
    if mode == "holistic":
        return res.space.get(f"{adj}_{noun}")
    a, n = res.space.get(adj), res.space.get(noun)
    if n is None:
        return None
    if mode == "mult":
        return None if a is None else a * n
    if mode == "categorical":
        t = res.tensors.get(adj)
        if t is None or t.data.ndim != 1:
            return None
        return t.data * n
    raise ValueError(f"unknown adjective mode {mode!r}")


def _noun_phrases(entry: EvalEntry, res: Resources, adj_mode: str):
    """Argument vectors for each sentence; shared between the two sentences."""
    space = res.space
    if entry.kind == "intransitive":
        return [space.get(entry.slots[0])]
    if entry.kind == "transitive":
        return [space.get(entry.slots[0]), space.get(entry.slots[3])]
    adj1, subj, _, _, adj2, obj = entry.slots
    return [_adj_compose(adj_mode, adj1, subj, res), _adj_compose(adj_mode, adj2, obj, res)]


def _sentence_tokens(entry: EvalEntry, verb: str) -> list[str]:
    if entry.kind == "intransitive":
        return [entry.slots[0], verb]
    if entry.kind == "transitive":
        return [entry.slots[0], verb, entry.slots[3]]
    adj1, subj, _, _, adj2, obj = entry.slots
    return [adj1, subj, verb, adj2, obj]


def _vector_model(entry: EvalEntry, res: Resources, model: str, adj_mode: str):
    """Sentence vectors for both sentences, or None if anything is missing."""
    space = res.space
    out = []
    for verb in (entry.verb, entry.landmark):
        if model in ("add", "multiply"):
            vecs = [space.get(tok) for tok in _sentence_tokens(entry, verb)]
            if any(v is None for v in vecs):
                return None
            combined = vecs[0].copy()
            for v in vecs[1:]:
                combined = combined + v if model == "add" else combined * v
            out.append(combined)
            continue
        args = _noun_phrases(entry, res, adj_mode)
        if any(a is None for a in args):
            return None
        if model == "categorical":
            t = res.tensors.get(verb)
            if t is None or t.data.ndim != len(args):
                return None
            out.append(compose_reduced(t, args))
        elif model == "kronecker":
            v = space.get(verb)
            if v is None:
                return None
            if len(args) == 1:
                out.append(v * args[0])
            else:
                out.append((kron([v] * len(args)) * kron(args)).ravel())
        else:
            raise ValueError(f"unknown vector model {model!r}")
    return out


def entry_score(entry: EvalEntry, model: str, res: Resources) -> float | None:
    """Model score for one entry; None means the entry is skipped because a
    needed vector or tensor is missing.

    ``model`` is one of verb, bigram, trigram, add, multiply, categorical,
    kronecker; the structured models accept an adjective mode suffix for
    adj-transitive data, e.g. ``kronecker:mult``, ``categorical:categorical``,
    ``multiply:holistic`` (default mult).
    """
    base, _, adj_mode = model.partition(":")
    adj_mode = adj_mode or "mult"
    space = res.space
    if base == "verb":
        v, l = space.get(entry.verb), space.get(entry.landmark)
        if v is None or l is None:
            return None
        return _safe_cosine(v, l)
    if base in ("bigram", "trigram"):
        lm = res.ngram(2 if base == "bigram" else 3)
        s1 = _sentence_tokens(entry, entry.verb)
        s2 = _sentence_tokens(entry, entry.landmark)
        return lm.logprob(s1) + lm.logprob(s2)
    pair = _vector_model(entry, res, base, adj_mode)
    if pair is None:
        return None
    return _safe_cosine(pair[0], pair[1])


def _safe_cosine(u, v) -> float:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ZeroVectorWarning)
        return cosine(u, v)


def _ranks(values: Sequence[float]) -> np.ndarray:
    """Average ranks (1-based) with ties sharing the mean of their positions."""
    v = np.asarray(values, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(len(v))
    i = 0
    while i < len(v):
        j = i
        while j + 1 < len(v) and v[order[j + 1]] == v[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def spearman(model_scores: Sequence[float], human_scores: Sequence[float]) -> float:
    """Pearson correlation of average ranks."""
    if len(model_scores) != len(human_scores):
        raise ValueError("score lists must have equal length")
    if len(model_scores) < 2:
        raise ValueError("need at least two paired scores")
    rx, ry = _ranks(model_scores), _ranks(human_scores)
    sx, sy = np.std(rx), np.std(ry)
    if sx == 0 or sy == 0:
        raise ValueError("rank correlation undefined for constant scores")
    return float(np.mean((rx - rx.mean()) * (ry - ry.mean())) / (sx * sy))


def upper_bound(entries: Sequence[EvalEntry]) -> float:
    """Inter-annotator agreement: mean pairwise Spearman over shared items.

    Pairs with fewer than two shared items, or constant scores on them, are
    skipped; at least one usable pair is required.
    """
    by_annotator: dict[str, dict[tuple, float]] = defaultdict(dict)
    for e in entries:
        by_annotator[e.annotator][e.item_key()] = float(e.score)
    names = sorted(by_annotator)
    rhos = []
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            a, b = by_annotator[names[i]], by_annotator[names[j]]
            common = sorted(set(a) & set(b))
            if len(common) < 2:
                continue
            xs = [a[k] for k in common]
            ys = [b[k] for k in common]
            if len(set(xs)) < 2 or len(set(ys)) < 2:
                continue
            rhos.append(spearman(xs, ys))
    if not rhos:
        raise ValueError("no annotator pair shares enough rankable items")
    return float(np.mean(rhos))


@dataclass
class ExperimentReport:
    model: str
    rho: float
    n: int
    skipped: int
    upper_bound: float | None = None
    high_mean: float | None = None
    low_mean: float | None = None

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


@dataclass
class ExperimentConfig:
    entries: Sequence[EvalEntry]
    models: Sequence[str]
    resources: Resources
    aggregate: str = "pooled"
    include_upper_bound: bool = True
    include_band_means: bool = True


def band_means(entries: Sequence[EvalEntry], scores: Sequence[float | None]):
    """Mean model score per HIGH/LOW band (skipped entries excluded)."""
    acc = {"HIGH": [], "LOW": []}
    for e, s in zip(entries, scores):
        if s is not None:
            acc[e.band].append(s)
    return (
        float(np.mean(acc["HIGH"])) if acc["HIGH"] else None,
        float(np.mean(acc["LOW"])) if acc["LOW"] else None,
    )


def run_experiment(config: ExperimentConfig) -> list[ExperimentReport]:
    """Score every entry under every model and report rho per model,
    sorted by rho descending."""
    entries = list(config.entries)
    ub = None
    if config.include_upper_bound:
        try:
            ub = upper_bound(entries)
        except ValueError:
            ub = None
    reports = []
    for model in config.models:
        scores = [entry_score(e, model, config.resources) for e in entries]
        paired = [(s, float(e.score)) for s, e in zip(scores, entries) if s is not None]
        skipped = len(entries) - len(paired)
        if config.aggregate == "mean":
            grouped: dict[tuple, list[tuple[float, float]]] = defaultdict(list)
            for (s, h), e in zip(zip(scores, (e.score for e in entries)), entries):
                if s is not None:
                    grouped[e.item_key()].append((s, float(h)))
            paired = [
                (vals[0][0], float(np.mean([h for _, h in vals]))) for vals in grouped.values()
            ]
        if len(paired) >= 2:
            rho = spearman([p[0] for p in paired], [p[1] for p in paired])
        else:
            rho = float("nan")
        hi, lo = band_means(entries, scores) if config.include_band_means else (None, None)
        reports.append(
            ExperimentReport(model, rho, n=len(paired), skipped=skipped,
                             upper_bound=ub, high_mean=hi, low_mean=lo)
        )
    reports.sort(key=lambda r: (-(r.rho if not math.isnan(r.rho) else -2.0), r.model))
    return reports


def report_json(reports: Sequence[ExperimentReport]) -> str:
    return json.dumps([r.to_dict() for r in reports], indent=2, sort_keys=True)


def report_table(reports: Sequence[ExperimentReport]) -> str:
    lines = [f"{'model':<24}{'rho':>8}{'n':>7}{'skipped':>9}"]
    for r in reports:
        lines.append(f"{r.model:<24}{r.rho:>8.3f}{r.n:>7}{r.skipped:>9}")
    if reports and reports[0].upper_bound is not None:
        lines.append(f"{'(upper bound)':<24}{reports[0].upper_bound:>8.3f}")
    return "\n".join(lines)
