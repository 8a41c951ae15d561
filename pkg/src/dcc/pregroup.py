"""Pregroup type algebra and a contraction-based reduction engine.

Types are sequences of adjoint-decorated atoms.  An atom ``a`` with adjoint
order ``k`` prints as ``a`` (k = 0), ``a^r``/``a^rr`` (k = 1, 2, ...) or
``a^l``/``a^ll`` (k = -1, -2, ...).  The unit type is the empty sequence and
prints as ``1``.  A contraction removes an adjacent pair of atoms with the
same name and adjoint orders (k, k+1); this single rule covers both the
``a a^r`` and ``a^l a`` cancellations.

>>> t = parse_type("n^r s n^l")
>>> str(t.l)
'n^ll s^l n'
>>> reduce([basic("n"), t, basic("n")], basic("s")) is not None
True
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Mapping, Sequence


class TypeParseError(ValueError):
    """Raised when type notation cannot be parsed."""


class LexiconMissError(KeyError):
    """Raised when a token has no lexicon entry."""

    def __init__(self, token: str):
        super().__init__(token)
        self.token = token

    def __str__(self) -> str:
        return f"no lexicon entry for token {self.token!r}"


@dataclass(frozen=True)
class Atom:
    """A basic type with an iterated-adjoint marker.

    ``adjoint_order`` counts right adjoints positively and left adjoints
    negatively; 0 is the plain atom.
    """

    name: str
    adjoint_order: int = 0

    def __post_init__(self):
        if not self.name:
            raise ValueError("atom name must be non-empty")

    def shifted(self, k: int) -> "Atom":
        return Atom(self.name, self.adjoint_order + k)

    def __str__(self) -> str:
        k = self.adjoint_order
        if k == 0:
            return self.name
        return self.name + "^" + ("r" * k if k > 0 else "l" * -k)


@dataclass(frozen=True)
class PregroupType:
    """An element of the free pregroup: an ordered tuple of atoms.

    Multiplication is concatenation (``*``); the unit is the empty type.
    ``.l`` and ``.r`` are the left and right adjoints, which reverse the
    atom order and shift every adjoint marker.
    """

    atoms: tuple[Atom, ...] = ()

    def __mul__(self, other: "PregroupType") -> "PregroupType":
        return PregroupType(self.atoms + other.atoms)

    @property
    def l(self) -> "PregroupType":
        return PregroupType(tuple(a.shifted(-1) for a in reversed(self.atoms)))

    @property
    def r(self) -> "PregroupType":
        return PregroupType(tuple(a.shifted(+1) for a in reversed(self.atoms)))

    def adjoint_power(self, k: int) -> "PregroupType":
        """k-fold adjoint: positive k applies ``.r`` k times, negative ``.l``."""
        t = self
        step = 1 if k > 0 else -1
        for _ in range(abs(k)):
            t = t.r if step > 0 else t.l
        return t

    def __len__(self) -> int:
        return len(self.atoms)

    def __iter__(self):
        return iter(self.atoms)

    def __str__(self) -> str:
        if not self.atoms:
            return "1"
        return " ".join(str(a) for a in self.atoms)


UNIT = PregroupType()


def basic(name: str) -> PregroupType:
    """Single plain atom as a type."""
    return PregroupType((Atom(name),))


def adjoint(t: PregroupType, side: str) -> PregroupType:
    """Left or right adjoint of a whole type. ``side`` is 'left' or 'right'."""
    if side == "left":
        return t.l
    if side == "right":
        return t.r
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def parse_type(text: str) -> PregroupType:
    """Parse whitespace-separated atom notation, e.g. ``"n^r s n^l"``.

    ``1`` denotes the unit and may appear anywhere (it contributes no atoms).
    Adjoint suffixes repeat for iterated adjoints (``a^ll``); mixing ``l``
    and ``r`` in one suffix is an error.
    """
    atoms: list[Atom] = []
    for pos, token in enumerate(text.split()):
        if token == "1":
            continue
        name, caret, suffix = token.partition("^")
        if not name:
            raise TypeParseError(f"token {pos}: empty atom in {token!r}")
        if caret and not suffix:
            raise TypeParseError(f"token {pos}: dangling '^' in {token!r}")
        order = 0
        if suffix:
            if set(suffix) == {"l"}:
                order = -len(suffix)
            elif set(suffix) == {"r"}:
                order = len(suffix)
            else:
                raise TypeParseError(
                    f"token {pos}: adjoint suffix must be all 'l' or all 'r', got {token!r}"
                )
        atoms.append(Atom(name, order))
    return PregroupType(tuple(atoms))


@dataclass(frozen=True)
class ReductionTrace:
    """A witnessed reduction: ordered contraction steps and the residual type.

    Each step is ``(position, pair)`` where ``position`` indexes the left
    atom of the contracted pair in the sequence *at the time of the step*
    and ``pair`` is the printed form of the removed atoms.
    """

    steps: tuple[tuple[int, str], ...]
    residual: PregroupType

    def replay(self, seq: "PregroupType | Iterable[PregroupType]") -> PregroupType:
        """Re-apply the recorded steps to ``seq``; raises if any step is invalid."""
        atoms = list(_flatten(seq))
        for pos, pair in self.steps:
            if pos < 0 or pos + 1 >= len(atoms):
                raise ValueError(f"step at position {pos} out of range")
            x, y = atoms[pos], atoms[pos + 1]
            if not _contractible(x, y):
                raise ValueError(f"step at position {pos} is not a contraction: {x} {y}")
            if f"{x} {y}" != pair:
                raise ValueError(f"step mismatch at {pos}: expected {pair!r}, found '{x} {y}'")
            del atoms[pos : pos + 2]
        return PregroupType(tuple(atoms))


def _flatten(seq) -> tuple[Atom, ...]:
    if isinstance(seq, PregroupType):
        return seq.atoms
    out: list[Atom] = []
    for t in seq:
        out.extend(t.atoms)
    return tuple(out)


def _contractible(x: Atom, y: Atom) -> bool:
    return x.name == y.name and y.adjoint_order == x.adjoint_order + 1


def reduce(
    seq: "PregroupType | Iterable[PregroupType]", target: PregroupType
) -> ReductionTrace | None:
    """Search for a contraction-only reduction of ``seq`` to ``target``.

    The search is exhaustive over contraction orders with memoization of
    failed states, so ``None`` is a proof that no contraction sequence
    reaches the target.  When several reductions exist, the one found first
    under leftmost-contraction-first ordering is returned.
    """
    atoms = _flatten(seq)
    goal = target.atoms
    if (len(atoms) - len(goal)) % 2 != 0 or len(atoms) < len(goal):
        return None

    dead: set[tuple[Atom, ...]] = set()

    def search(state: tuple[Atom, ...]) -> list[tuple[int, str]] | None:
        if state == goal:
            return []
        if len(state) <= len(goal) or state in dead:
            return None
        for i in range(len(state) - 1):
            x, y = state[i], state[i + 1]
            if _contractible(x, y):
                tail = search(state[:i] + state[i + 2 :])
                if tail is not None:
                    return [(i, f"{x} {y}")] + tail
        dead.add(state)
        return None

    found = search(atoms)
    if found is None:
        return None
    return ReductionTrace(tuple(found), target)


@dataclass(frozen=True)
class Judgment:
    """Outcome of a grammaticality check."""

    grammatical: bool
    assignment: tuple[PregroupType, ...] | None = None
    trace: ReductionTrace | None = None

    def __bool__(self) -> bool:
        return self.grammatical


def is_grammatical(
    tokens: Sequence[str],
    lexicon: Mapping[str, Sequence[PregroupType]],
    target: PregroupType,
) -> Judgment:
    """Decide whether some per-token type assignment reduces to ``target``.

    Tries assignments in lexicon order, leftmost token varying slowest, and
    returns the first witnessing assignment with its trace.
    """
    choices: list[Sequence[PregroupType]] = []
    for tok in tokens:
        if tok not in lexicon or not lexicon[tok]:
            raise LexiconMissError(tok)
        choices.append(tuple(lexicon[tok]))
    for assignment in product(*choices):
        trace = reduce(assignment, target)
        if trace is not None:
            return Judgment(True, assignment, trace)
    return Judgment(False)


def parse_lexicon(lines: Iterable[str]) -> dict[str, tuple[PregroupType, ...]]:
    """Parse lexicon TSV lines ``word<TAB>type-notation``; repeats accumulate."""
    lex: dict[str, tuple[PregroupType, ...]] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.rstrip("\n")
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise TypeParseError(f"lexicon line {lineno}: expected 2 tab-separated fields")
        word, notation = parts
        t = parse_type(notation)
        lex[word] = lex.get(word, ()) + (t,)
    return lex


def load_lexicon(path) -> dict[str, tuple[PregroupType, ...]]:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh)
