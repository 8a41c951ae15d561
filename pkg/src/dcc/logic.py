"""Tensor simulation of finite-domain predicate calculus.

Domain elements map to one-hot vectors, sets to 0/1 indicator vectors.
Unary predicates are diagonal matrices acting as set intersection;
m-ary relations are tensors with axes (truth, arg1, ..., argm), the truth
axis living in a boolean sentence space: B1 is one-dimensional with
true = [1] and falsehood the zero vector, B2 is two-dimensional with
true = [1, 0] and false = [0, 1].

Function application is right-to-left tensor contraction: a relation is
applied to its last argument first, so evaluating loves(j, m) computes
(T_loves x m) x j.  Quantifiers are provably not multilinear and are plain
functions here, kept apart from the tensor fragment.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Sequence

import numpy as np

B1 = "B1"
B2 = "B2"
_TOL = 1e-12


class UnsupportedModeError(ValueError):
    """Requested connective has no linear representation in this space."""


class ModelError(ValueError):
    """Ill-formed logic model or expression."""


@dataclass(frozen=True)
class LogicDomain:
    elements: tuple[str, ...]

    def __post_init__(self):
        if len(set(self.elements)) != len(self.elements):
            raise ModelError("domain elements must be unique")

    @property
    def dim(self) -> int:
        return len(self.elements)

    def index(self, name: str) -> int:
        try:
            return self.elements.index(name)
        except ValueError:
            raise ModelError(f"unknown domain element {name!r}") from None

    def one_hot(self, name: str) -> np.ndarray:
        v = np.zeros(self.dim)
        v[self.index(name)] = 1.0
        return v


def bool_dim(space: str) -> int:
    if space == B1:
        return 1
    if space == B2:
        return 2
    raise ModelError(f"boolean space must be 'B1' or 'B2', got {space!r}")


def top(space: str) -> np.ndarray:
    return np.array([1.0]) if space == B1 else np.array([1.0, 0.0])


def bottom(space: str) -> np.ndarray:
    """Falsehood: the zero vector in B1, the second basis vector in B2."""
    return np.array([0.0]) if space == B1 else np.array([0.0, 1.0])


def encode_set(domain: LogicDomain, members: Iterable[str]) -> np.ndarray:
    v = np.zeros(domain.dim)
    for name in members:
        v[domain.index(name)] = 1.0
    return v


def predicate_tensor(domain: LogicDomain, members: Iterable[str]) -> np.ndarray:
    """Diagonal 0/1 matrix; contraction with a set vector intersects it
    with the predicate's extension."""
    return np.diag(encode_set(domain, members))


def relation_tensor(domain: LogicDomain, tuples: Iterable[Sequence[str]], space: str,
                    arity: int | None = None) -> np.ndarray:
    """Truth-slice tensor for an m-ary relation.

    The true slice has a 1 at every member tuple; in B2 the false slice
    additionally has a 1 at every non-member tuple, so contraction with
    one-hot arguments always lands exactly on true or false.
    """
    member = {tuple(t) for t in tuples}
    if arity is None:
        if not member:
            raise ModelError("cannot infer arity of an empty relation; pass arity=")
        arity = len(next(iter(member)))
    if any(len(t) != arity for t in member):
        raise ModelError("relation tuples have mixed arity")
    d = domain.dim
    t = np.zeros((bool_dim(space),) + (d,) * arity)
    for tup in member:
        t[(0,) + tuple(domain.index(x) for x in tup)] = 1.0
    if space == B2:
        for tup in product(domain.elements, repeat=arity):
            if tup not in member:
                t[(1,) + tuple(domain.index(x) for x in tup)] = 1.0
    return t


def contract(t: np.ndarray, arg: np.ndarray) -> np.ndarray:
    """Contract the last axis of ``t`` with ``arg``; repeated application
    is curried function application."""
    t = np.asarray(t, dtype=float)
    arg = np.asarray(arg, dtype=float)
    if t.ndim == 0:
        raise ValueError("cannot contract an order-0 tensor")
    if arg.shape != (t.shape[-1],):
        raise ValueError(f"argument shape {arg.shape} does not match axis {t.shape[-1]}")
    return np.tensordot(t, arg, axes=([t.ndim - 1], [0]))


def apply_relation(t: np.ndarray, args: Sequence[np.ndarray]) -> np.ndarray:
    """Apply a relation tensor to arguments given subject-first: contraction
    runs right-to-left (object first)."""
    out = np.asarray(t, dtype=float)
    for a in reversed(list(args)):
        out = contract(out, a)
    return out


def truth_value(v: np.ndarray, space: str) -> bool:
    """Read a sentence vector back as a boolean.

    B1: true iff the norm exceeds the zero threshold.  B2: must be exactly
    the true or false point.
    """
    v = np.asarray(v, dtype=float)
    if space == B1:
        return bool(np.linalg.norm(v) > _TOL)
    if np.allclose(v, top(B2), atol=_TOL):
        return True
    if np.allclose(v, bottom(B2), atol=_TOL):
        return False
    raise ModelError(f"vector {v} is neither true nor false in B2")


_CONNECTIVES = {
    "not": None,
    "and": ([[1.0, 0.0], [0.0, 1.0]], [[0.0, 0.0], [1.0, 1.0]]),
    "or": ([[1.0, 1.0], [0.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]]),
    "implies": ([[1.0, 0.0], [0.0, 1.0]], [[1.0, 1.0], [0.0, 0.0]]),
}


def connective_tensor(kind: str, space: str = B2) -> np.ndarray:
    """Truth-functional connective as a tensor.

    In B2, negation is the swap matrix and the binary connectives are
    order-3 tensors whose partial application to the first argument picks
    the matrix applied to the second (apply via
    contract(contract(t, first), second)).  In B1 only conjunction is
    linear (multiplication of 0/1 scalars); everything else raises.
    """
    if kind not in _CONNECTIVES:
        raise ValueError(f"unknown connective {kind!r}")
    if space == B1:
        if kind == "and":
            return np.ones((1, 1, 1))
        raise UnsupportedModeError(f"{kind!r} has no linear representation in B1")
    if space != B2:
        raise ModelError(f"boolean space must be 'B1' or 'B2', got {space!r}")
    if kind == "not":
        return np.array([[0.0, 1.0], [1.0, 0.0]])
    true_block, false_block = _CONNECTIVES[kind]
    t = np.zeros((2, 2, 2))
    t[:, :, 0] = np.array(true_block)
    t[:, :, 1] = np.array(false_block)
    return t


def _check_indicator(v: np.ndarray, what: str) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if not np.all((v == 0.0) | (v == 1.0)):
        raise ValueError(f"{what} must be a 0/1 indicator vector, got {v}")
    return v


def forall(x: np.ndarray, y: np.ndarray, space: str = B2) -> np.ndarray:
    """All xs are ys: true iff x = min(x, y).  Not a multilinear map."""
    x = _check_indicator(x, "forall first argument")
    y = _check_indicator(y, "forall second argument")
    if x.shape != y.shape:
        raise ValueError("forall arguments must have equal length")
    ok = np.array_equal(np.minimum(x, y), x)
    return top(space) if ok else bottom(space)


def exists(x: np.ndarray, space: str = B2) -> np.ndarray:
    """Some x exists: true iff the indicator is non-empty.  Not linear."""
    x = _check_indicator(x, "exists argument")
    return top(space) if np.linalg.norm(x) > 0 else bottom(space)


@dataclass(frozen=True)
class LogicModel:
    domain: LogicDomain
    predicates: dict[str, frozenset[str]]
    relations: dict[str, frozenset[tuple[str, ...]]]


def parse_model(lines: Iterable[str]) -> LogicModel:
    """TSV model file: ``element<TAB>name`` lines declare the domain,
    ``pred<TAB>P<TAB>a,b`` declares a predicate extension, and
    ``rel<TAB>R<TAB>a,b;c,d`` declares relation tuples."""
    elements: list[str] = []
    predicates: dict[str, frozenset[str]] = {}
    relations: dict[str, frozenset[tuple[str, ...]]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if parts[0] == "element" and len(parts) == 2:
            elements.append(parts[1])
        elif parts[0] == "pred" and len(parts) == 3:
            members = [m for m in parts[2].split(",") if m]
            predicates[parts[1]] = frozenset(members)
        elif parts[0] == "rel" and len(parts) == 3:
            tuples = []
            for chunk in parts[2].split(";"):
                if chunk:
                    tuples.append(tuple(chunk.split(",")))
            relations[parts[1]] = frozenset(tuples)
        else:
            raise ModelError(f"model line {lineno}: cannot parse {line!r}")
    if not elements:
        raise ModelError("model declares no domain elements")
    return LogicModel(LogicDomain(tuple(elements)), predicates, relations)


def load_model(path) -> LogicModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh)


def evaluate(model: LogicModel, expression: str, space: str = B2) -> bool:
    """Evaluate a ground expression against a model using tensors.

    Grammar: ``name(arg, ...)`` where relations and predicates take domain
    elements, quantifiers (forall, exists) take declared predicate names,
    and connectives (not, and, or, implies) take sub-expressions.  In B1,
    falsehood is the zero vector.
    """
    vec = _eval_node(_parse_expr(expression), model, space)
    return truth_value(vec, space)


def _eval_node(node, model: LogicModel, space: str) -> np.ndarray:
    head, args = node
    dom = model.domain
    if head in ("and", "or", "implies", "not"):
        want = 1 if head == "not" else 2
        if len(args) != want:
            raise ModelError(f"{head} takes {want} argument(s)")
        t = connective_tensor(head, space)
        for sub in args:
            t = contract(t, _eval_node(sub, model, space))
        return t
    if head == "forall":
        if len(args) != 2:
            raise ModelError("forall takes two set names")
        return forall(_set_arg(model, args[0]), _set_arg(model, args[1]), space)
    if head == "exists":
        if len(args) != 1:
            raise ModelError("exists takes one set name")
        return exists(_set_arg(model, args[0]), space)
    if head in model.predicates:
        if len(args) != 1:
            raise ModelError(f"predicate {head!r} takes one element")
        t = predicate_tensor(dom, model.predicates[head])
        result = contract(t, dom.one_hot(_leaf_name(args[0])))
        ok = bool(result[dom.index(_leaf_name(args[0]))] > 0)
        return top(space) if ok else bottom(space)
    if head in model.relations:
        t = relation_tensor(dom, model.relations[head], space, arity=len(args))
        return apply_relation(t, [dom.one_hot(_leaf_name(a)) for a in args])
    raise ModelError(f"unknown name {head!r} in expression")


def _leaf_name(node) -> str:
    head, args = node
    if args:
        raise ModelError(f"{head!r} used where a plain name was expected")
    return head


def _set_arg(model: LogicModel, node) -> np.ndarray:
    name = _leaf_name(node)
    if name not in model.predicates:
        raise ModelError(f"quantifier argument {name!r} is not a declared set")
    return encode_set(model.domain, model.predicates[name])


def _parse_expr(text: str):
    """Parse ``name`` / ``name(arg, ...)`` expressions into (head, args) trees."""
    pos = 0

    def skip_ws():
        nonlocal pos
        while pos < len(text) and text[pos].isspace():
            pos += 1

    def parse_node():
        nonlocal pos
        skip_ws()
        start = pos
        while pos < len(text) and (text[pos].isalnum() or text[pos] in "_-"):
            pos += 1
        name = text[start:pos]
        if not name:
            raise ModelError(f"expected a name at position {pos} in {text!r}")
        skip_ws()
        args = []
        if pos < len(text) and text[pos] == "(":
            pos += 1
            skip_ws()
            if pos < len(text) and text[pos] == ")":
                pos += 1
                return (name, [])
            while True:
                args.append(parse_node())
                skip_ws()
                if pos < len(text) and text[pos] == ",":
                    pos += 1
                    continue
                if pos < len(text) and text[pos] == ")":
                    pos += 1
                    break
                raise ModelError(f"expected ',' or ')' at position {pos} in {text!r}")
        return (name, args)

    node = parse_node()
    skip_ws()
    if pos != len(text):
        raise ModelError(f"trailing input at position {pos} in {text!r}")
    return node
