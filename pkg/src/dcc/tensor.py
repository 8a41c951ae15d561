"""Relation tensors: learning, reduced/full representations, composition.

A relation of arity m over a noun space N is stored reduced as an order-m
tensor (shape [dim(N)]*m).  Composition of a reduced tensor with its
arguments is component-wise multiplication against the Kronecker product
of the argument vectors, flattened row-major.  The full representation
embeds the reduced tensor along the diagonal of a sentence axis and is
composed by contracting each argument against its own axis; it serves as
the inner-product-map oracle for the reduced route and is only built at
test scale (a configurable cell cap refuses anything larger).
"""

from __future__ import annotations

import functools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .space import VectorSpace, ZeroVectorWarning

FULL_TENSOR_CELL_CAP = 10_000_000


class CompositionError(ValueError):
    """Shape or argument mismatch during composition."""


@dataclass
class Tensor:
    """Dense relation tensor.

    ``method`` records how it was built (sum, kronecker, full, regression).
    Reduced tensors of arity m have m axes of dim(N); full tensors carry a
    single sentence axis of size dim(N)**m, placed per ``layout``
    (axis tags such as ("arg1", "sent", "arg2")).  ``skipped`` counts
    training instances dropped for missing argument vectors.
    """

    data: np.ndarray
    label: str
    method: str
    arity: int | None = None
    layout: tuple[str, ...] | None = None
    skipped: int = 0

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)


@dataclass(frozen=True)
class RelationInstance:
    relation: str
    args: tuple[str, ...]


def kron(vectors: Sequence[np.ndarray]) -> np.ndarray:
    """Kronecker product of vectors as an order-m array (row-major flattening
    of this array is the standard flat Kronecker product)."""
    arrays = [np.asarray(v, dtype=float) for v in vectors]
    return functools.reduce(np.multiply.outer, arrays)


def learn_relation_sum(
    instances: Iterable[RelationInstance], space: VectorSpace, arity: int
) -> Tensor:
    """Sum of Kronecker products of argument vectors over all instances.

    Instances with any argument missing from the space are skipped and
    counted; if none are usable the relation cannot be learned.
    """
    instances = list(instances)
    if not instances:
        raise ValueError("no instances given")
    label = instances[0].relation
    total = np.zeros((space.dim,) * arity)
    skipped = 0
    used = 0
    for inst in instances:
        if inst.relation != label:
            raise ValueError(f"mixed relations in instance list: {label!r} vs {inst.relation!r}")
        if len(inst.args) != arity:
            raise ValueError(f"instance {inst} does not have arity {arity}")
        vecs = [space.get(w) for w in inst.args]
        if any(v is None for v in vecs):
            skipped += 1
            continue
        total += kron(vecs)
        used += 1
    if used == 0:
        raise ValueError(f"no usable instances for relation {label!r} (all {skipped} skipped)")
    return Tensor(total, label, "sum", arity=arity, skipped=skipped)


def learn_relation_kronecker(lex: np.ndarray, arity: int, label: str = "") -> Tensor:
    """m-fold Kronecker power of the relation word's own lexical vector."""
    lex = np.asarray(lex, dtype=float)
    if not np.any(lex):
        raise ValueError(f"lexical vector for {label or 'relation'} is zero")
    return Tensor(kron([lex] * arity), label, "kronecker", arity=arity)


def compose_reduced(t: Tensor, args: Sequence[np.ndarray]) -> np.ndarray:
    """t (.) (arg1 (x) ... (x) argm), flattened row-major."""
    args = [np.asarray(a, dtype=float) for a in args]
    m = t.data.ndim
    if len(args) != m:
        raise CompositionError(f"{t.label or 'tensor'}: expected {m} arguments, got {len(args)}")
    for i, a in enumerate(args):
        if a.shape != (t.data.shape[i],):
            raise CompositionError(
                f"argument {i} has shape {a.shape}, axis needs {t.data.shape[i]}"
            )
    return (t.data * kron(args)).ravel()


def _full_layout(m: int) -> tuple[str, ...]:
    if m == 2:
        return ("arg1", "sent", "arg2")
    return tuple(f"arg{i + 1}" for i in range(m)) + ("sent",)


def expand_reduced_to_full(t: Tensor, cell_cap: int = FULL_TENSOR_CELL_CAP) -> Tensor:
    """Embed a reduced tensor in the full representation.

    The sentence axis has size dim**m and the entry at sentence index s is
    t[i1..im] exactly when s is the row-major index of (i1..im), else 0.
    For arity 2 the layout is (arg1, sent, arg2); otherwise the sentence
    axis comes last.
    """
    m = t.data.ndim
    d = t.data.shape[0]
    if any(s != d for s in t.data.shape):
        raise CompositionError("reduced tensor must have equal axis sizes")
    cells = d ** (2 * m)
    if cells > cell_cap:
        raise MemoryError(f"full tensor would need {cells} cells (cap {cell_cap})")
    diag = np.zeros((d**m, d**m))
    np.fill_diagonal(diag, t.data.ravel())
    if m == 2:
        full = diag.reshape(d, d, d * d).transpose(0, 2, 1)
    else:
        full = diag.reshape((d,) * m + (d**m,))
    return Tensor(full, t.label, "full", arity=m, layout=_full_layout(m))


def compose_full_epsilon(t: Tensor, args: Sequence[np.ndarray]) -> np.ndarray:
    """Contract every argument against its own axis; returns the sentence
    vector.  This is the inner-product route the reduced composition must
    agree with."""
    if t.layout is None:
        raise CompositionError("full tensor is missing layout metadata")
    args = [np.asarray(a, dtype=float) for a in args]
    arg_axes = [tag for tag in t.layout if tag != "sent"]
    if len(args) != len(arg_axes):
        raise CompositionError(f"expected {len(arg_axes)} arguments, got {len(args)}")
    letters = "abcdefghijklmnop"
    subs = []
    arg_subs = []
    for i, tag in enumerate(t.layout):
        subs.append(letters[i])
        if tag != "sent":
            arg_subs.append(letters[i])
    out = letters[t.layout.index("sent")]
    for i, (a, ax) in enumerate(zip(args, arg_subs)):
        axis_size = t.data.shape[t.layout.index(f"arg{i + 1}")]
        if a.shape != (axis_size,):
            raise CompositionError(f"argument {i} has shape {a.shape}, axis needs {axis_size}")
    spec = "".join(subs) + "," + ",".join(arg_subs) + "->" + out
    return np.einsum(spec, t.data, *args)


def compose_baseline(model: str, vectors: Sequence[np.ndarray], params: dict | None = None):
    """Unstructured composition baselines.

    add, weighted-add (params["weights"]), multiply (optional
    params["smooth"] added to every component before multiplying),
    mixture (two vectors, params alpha/beta/gamma), verb-only
    (params["head"], defaulting to position 1), tensor-product (flat
    Kronecker product).
    """
    params = params or {}
    vecs = [np.asarray(v, dtype=float) for v in vectors]
    if not vecs:
        raise CompositionError("no vectors to compose")
    if model != "tensor-product":
        for v in vecs[1:]:
            if v.shape != vecs[0].shape:
                raise CompositionError("baseline composition needs equal-length vectors")
    if model == "add":
        return np.sum(vecs, axis=0)
    if model == "weighted-add":
        weights = params.get("weights")
        if weights is None or len(weights) != len(vecs):
            raise CompositionError("weighted-add needs params['weights'], one per vector")
        return np.sum([w * v for w, v in zip(weights, vecs)], axis=0)
    if model == "multiply":
        s = params.get("smooth", 0.0)
        out = vecs[0] + s
        for v in vecs[1:]:
            out = out * (v + s)
        return out
    if model == "mixture":
        if len(vecs) != 2:
            raise CompositionError("mixture composes exactly two vectors")
        try:
            alpha, beta, gamma = params["alpha"], params["beta"], params["gamma"]
        except KeyError as missing:
            raise CompositionError(f"mixture needs params alpha/beta/gamma: {missing}") from None
        return alpha * vecs[0] + beta * vecs[1] + gamma * (vecs[0] * vecs[1])
    if model == "verb-only":
        head = params.get("head", 1 if len(vecs) > 1 else 0)
        return vecs[head]
    if model == "tensor-product":
        return kron(vecs).ravel()
    raise CompositionError(f"unknown baseline model {model!r}")


def kronecker_similarity_factorized(verb1, verb2, subject, obj) -> float:
    """Sentence cosine under the Kronecker verb model without materializing
    dim(N)**2 vectors, via <a(x)b|c(x)d> = <a|c><b|d>."""
    v1, v2 = np.asarray(verb1, dtype=float), np.asarray(verb2, dtype=float)
    s, o = np.asarray(subject, dtype=float), np.asarray(obj, dtype=float)
    a, b = v1 * s, v1 * o
    c, d = v2 * s, v2 * o
    denom = np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(c) * np.linalg.norm(d)
    if denom == 0.0:
        warnings.warn("kronecker similarity with zero-norm factor", ZeroVectorWarning)
        return 0.0
    return float(np.dot(a, c) * np.dot(b, d) / denom)


def parse_relations(lines: Iterable[str]) -> list[RelationInstance]:
    """TSV lines ``relation<TAB>arg1<TAB>...<TAB>argm``; arity must be
    constant per relation."""
    out: list[RelationInstance] = []
    arity: dict[str, int] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) < 2:
            raise ValueError(f"relations line {lineno}: need relation and at least one argument")
        rel, args = parts[0], tuple(parts[1:])
        if rel in arity and arity[rel] != len(args):
            raise ValueError(
                f"relations line {lineno}: {rel!r} has arity {arity[rel]}, got {len(args)}"
            )
        arity[rel] = len(args)
        out.append(RelationInstance(rel, args))
    return out


def load_relations(path) -> list[RelationInstance]:
    with open(path, encoding="utf-8") as fh:
        return parse_relations(fh)


def learn_relations(
    instances: Iterable[RelationInstance],
    space: VectorSpace,
    arity: int,
    method: str = "sum",
) -> tuple[dict[str, Tensor], dict[str, str]]:
    """Learn one tensor per relation label; returns (tensors, skip report)."""
    by_label: dict[str, list[RelationInstance]] = {}
    for inst in instances:
        by_label.setdefault(inst.relation, []).append(inst)
    tensors: dict[str, Tensor] = {}
    report: dict[str, str] = {}
    for label in sorted(by_label):
        try:
            if method == "sum":
                tensors[label] = learn_relation_sum(by_label[label], space, arity)
            elif method == "kronecker":
                lex = space.get(label)
                if lex is None:
                    raise ValueError(f"no lexical vector for relation {label!r}")
                tensors[label] = learn_relation_kronecker(lex, arity, label)
            else:
                raise ValueError(f"unknown learning method {method!r}")
        except ValueError as exc:
            report[label] = str(exc)
    return tensors, report


def _fmt(x: float) -> str:
    return f"{float(x):.9g}"


def save_tensors(tensors: Mapping[str, Tensor], path) -> None:
    """One line per tensor: label, method, comma-separated dims, then the
    row-major weights space-separated, all tab-delimited; 9-significant-digit
    round-trip.  Full tensors are test oracles and are not serialized."""
    with open(path, "w", encoding="utf-8") as fh:
        for label in sorted(tensors):
            t = tensors[label]
            if t.method == "full":
                raise ValueError(f"refusing to serialize full tensor {label!r}")
            dims = ",".join(str(s) for s in t.data.shape)
            data = " ".join(_fmt(x) for x in t.data.ravel())
            fh.write(f"{label}\t{t.method}\t{dims}\t{data}\n")


def load_tensors(path) -> dict[str, Tensor]:
    out: dict[str, Tensor] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 tab-separated fields")
            label, method, dims_text, data_text = parts
            shape = tuple(int(d) for d in dims_text.split(","))
            data = np.array([float(x) for x in data_text.split(" ")]).reshape(shape)
            arity = len(shape) if method in ("sum", "kronecker") else None
            out[label] = Tensor(data, label, method, arity=arity)
    return out
