"""Context-free grammar validation, normalization, and pregroup translation.

A grammar is translated by treating every non-terminal production
``A -> B C`` as a type reduction and inferring which side carries a
compound type: either ``B := type(A) * type(C)^l`` or
``C := type(B)^r * type(A)``.  Branching over these two readings for each
rule produces at most ``2^|R_NT|`` candidate type dictionaries.

Grammar files use one rule per line, ``A -> B C``, with terminals in double
quotes and ``|`` as shorthand for alternative right-hand sides.  ``EPS`` is
the reserved empty-string symbol; ``#`` starts a comment.  The start symbol
is the left-hand side of the first rule.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .pregroup import UNIT, Atom, PregroupType, reduce

EPSILON = "EPS"

_RHS_TOKEN = re.compile(r'"[^"]*"|\S+')


class GrammarError(ValueError):
    """Raised for malformed grammar files or ill-formed Cfg values."""


class InferenceDeadlockError(RuntimeError):
    """No inference step applies to a rule under any surviving branch."""

    def __init__(self, rule: "Rule"):
        super().__init__(f"type inference deadlocked on rule: {rule}")
        self.rule = rule


@dataclass(frozen=True)
class Rule:
    lhs: str
    rhs: tuple[str, ...]

    def __str__(self) -> str:
        return f"{self.lhs} -> {' '.join(self.rhs) if self.rhs else EPSILON}"


@dataclass(frozen=True)
class Cfg:
    nonterminals: frozenset[str]
    terminals: frozenset[str]
    rules: tuple[Rule, ...]
    start: str

    def __post_init__(self):
        if self.start not in self.nonterminals:
            raise GrammarError(f"start symbol {self.start!r} is not a nonterminal")
        overlap = self.nonterminals & self.terminals
        if overlap:
            raise GrammarError(f"symbols are both terminal and nonterminal: {sorted(overlap)}")
        if EPSILON in self.nonterminals or EPSILON in self.terminals:
            raise GrammarError(f"{EPSILON} is reserved for the empty string")
        for rule in self.rules:
            if rule.lhs not in self.nonterminals:
                raise GrammarError(f"rule lhs {rule.lhs!r} is not a nonterminal")
            for sym in rule.rhs:
                if sym != EPSILON and sym not in self.nonterminals and sym not in self.terminals:
                    raise GrammarError(f"unknown symbol {sym!r} in rule {rule}")

    def core(self, rule: Rule) -> tuple[str, ...]:
        """Rule rhs with the invisible empty-string symbol removed."""
        return tuple(s for s in rule.rhs if s != EPSILON)

    def is_terminal_rule(self, rule: Rule) -> bool:
        core = self.core(rule)
        return bool(core) and all(s in self.terminals for s in core)

    def is_nonterminal_rule(self, rule: Rule) -> bool:
        core = self.core(rule)
        return bool(core) and all(s in self.nonterminals for s in core)

    def nonterminal_rules(self) -> tuple[Rule, ...]:
        return tuple(r for r in self.rules if self.is_nonterminal_rule(r))

    def format_rule(self, rule: Rule) -> str:
        parts = [f'"{s}"' if s in self.terminals else s for s in rule.rhs]
        return f"{rule.lhs} -> {' '.join(parts) if parts else EPSILON}"


def parse_grammar(lines: Iterable[str]) -> Cfg:
    rules: list[Rule] = []
    nonterminals: set[str] = set()
    terminals: set[str] = set()
    start: str | None = None
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "->" not in line:
            raise GrammarError(f"line {lineno}: expected 'A -> ...'")
        lhs, _, rhs_text = line.partition("->")
        lhs = lhs.strip()
        if not lhs or '"' in lhs:
            raise GrammarError(f"line {lineno}: bad rule lhs {lhs!r}")
        nonterminals.add(lhs)
        if start is None:
            start = lhs
        for alternative in _split_alternatives(rhs_text, lineno):
            rhs: list[str] = []
            for tok in alternative:
                if tok.startswith('"'):
                    word = tok[1:-1]
                    if not word:
                        raise GrammarError(f"line {lineno}: empty terminal")
                    terminals.add(word)
                    rhs.append(word)
                elif tok == EPSILON:
                    rhs.append(EPSILON)
                else:
                    nonterminals.add(tok)
                    rhs.append(tok)
            if not rhs:
                raise GrammarError(f"line {lineno}: empty right-hand side")
            rules.append(Rule(lhs, tuple(rhs)))
    if start is None:
        raise GrammarError("grammar has no rules")
    return Cfg(frozenset(nonterminals), frozenset(terminals), tuple(rules), start)


def _split_alternatives(rhs_text: str, lineno: int) -> list[list[str]]:
    tokens = _RHS_TOKEN.findall(rhs_text)
    alts: list[list[str]] = [[]]
    for tok in tokens:
        if tok == "|":
            alts.append([])
        else:
            alts[-1].append(tok)
    if any(not alt for alt in alts):
        raise GrammarError(f"line {lineno}: empty alternative")
    return alts


def load_grammar(path) -> Cfg:
    with open(path, encoding="utf-8") as fh:
        return parse_grammar(fh)


@dataclass(frozen=True)
class ValidationReport:
    pseudo_proper: bool
    violations: tuple[tuple[str, str], ...]
    basic_types: frozenset[str]
    complex_types: frozenset[str]


def validate(cfg: Cfg) -> ValidationReport:
    """Check the pseudo-proper conditions and the two lexicalization restrictions.

    Violations are (subject, reason) pairs; the report is pseudo_proper iff
    there are none.  Also classifies nonterminals into basic types (lhs of
    terminal rules) and complex types (lhs of nonterminal rules).
    """
    violations: list[tuple[str, str]] = []

    with_rule = {r.lhs for r in cfg.rules}
    for nt in sorted(cfg.nonterminals - with_rule):
        violations.append((nt, "nonterminal has no production rule"))

    reachable = {cfg.start}
    frontier = [cfg.start]
    while frontier:
        sym = frontier.pop()
        for rule in cfg.rules:
            if rule.lhs == sym:
                for s in cfg.core(rule):
                    if s not in reachable:
                        reachable.add(s)
                        frontier.append(s)
    for sym in sorted((cfg.nonterminals | cfg.terminals) - reachable):
        violations.append((sym, "symbol not reachable from the start symbol"))

    unit_edges: dict[str, set[str]] = {}
    for rule in cfg.rules:
        core = cfg.core(rule)
        if len(core) == 1 and core[0] in cfg.nonterminals:
            unit_edges.setdefault(rule.lhs, set()).add(core[0])
    for node in sorted(unit_edges):
        if _reaches(node, node, unit_edges):
            violations.append((node, "unit-rule cycle through this symbol"))

    term_lhs: set[str] = set()
    nonterm_lhs: set[str] = set()
    for rule in cfg.rules:
        core = cfg.core(rule)
        if not core:
            violations.append((str(rule), "rule produces only the empty string"))
            continue
        has_t = any(s in cfg.terminals for s in core)
        has_nt = any(s in cfg.nonterminals for s in core)
        if has_t and has_nt:
            violations.append((str(rule), "rule mixes terminals and nonterminals"))
        elif has_t:
            term_lhs.add(rule.lhs)
            if len(core) > 1:
                violations.append((str(rule), "terminal rule must produce a single word"))
        else:
            nonterm_lhs.add(rule.lhs)
    for sym in sorted(term_lhs & nonterm_lhs):
        violations.append((sym, "lhs of both terminal and nonterminal rules"))

    return ValidationReport(
        pseudo_proper=not violations,
        violations=tuple(violations),
        basic_types=frozenset(term_lhs),
        complex_types=frozenset(nonterm_lhs),
    )


def _reaches(src: str, dst: str, edges: Mapping[str, set[str]]) -> bool:
    seen: set[str] = set()
    stack = list(edges.get(src, ()))
    while stack:
        node = stack.pop()
        if node == dst:
            return True
        if node in seen:
            continue
        seen.add(node)
        stack.extend(edges.get(node, ()))
    return False


def _fresh_names(cfg: Cfg, prefix: str):
    used = set(cfg.nonterminals) | set(cfg.terminals)
    i = 0
    while True:
        i += 1
        name = f"{prefix}{i}"
        if name not in used:
            used.add(name)
            yield name


def binarize(cfg: Cfg) -> Cfg:
    """Split every rule with more than two non-ε symbols into binary rules.

    ``A -> B C D E`` becomes ``A -> F E``, ``F -> G D``, ``G -> B C`` with
    fresh symbols named _Bin1, _Bin2, ...  Already-binary grammars are
    returned unchanged.
    """
    if all(len(cfg.core(r)) <= 2 for r in cfg.rules):
        return cfg
    fresh = _fresh_names(cfg, "_Bin")
    new_rules: list[Rule] = []
    new_nts = set(cfg.nonterminals)
    for rule in cfg.rules:
        core = list(cfg.core(rule))
        if len(core) <= 2:
            new_rules.append(rule)
            continue
        lhs = rule.lhs
        pending: list[Rule] = []
        while len(core) > 2:
            name = next(fresh)
            new_nts.add(name)
            pending.append(Rule(lhs, (name, core[-1])))
            core = core[:-1]
            lhs = name
        pending.append(Rule(lhs, tuple(core)))
        new_rules.extend(pending)
    return Cfg(frozenset(new_nts), cfg.terminals, tuple(new_rules), cfg.start)


def lift_terminals(cfg: Cfg) -> Cfg:
    """Isolate terminals behind fresh basic types.

    Removes both restriction violations that block translation: rules mixing
    terminals with nonterminals, and nonterminals serving as lhs of both
    terminal and nonterminal rules.  Fresh symbols are named _T1, _T2, ...
    Grammars already in shape are returned unchanged.
    """
    mixed_rules = []
    for rule in cfg.rules:
        core = cfg.core(rule)
        if any(s in cfg.terminals for s in core) and any(s in cfg.nonterminals for s in core):
            mixed_rules.append(rule)
    term_lhs = {r.lhs for r in cfg.rules if cfg.is_terminal_rule(r)}
    nonterm_lhs = {r.lhs for r in cfg.rules if cfg.is_nonterminal_rule(r)}
    mixed_lhs = [r.lhs for r in cfg.rules if r.lhs in term_lhs and r.lhs in nonterm_lhs]
    if not mixed_rules and not mixed_lhs:
        return cfg

    fresh = _fresh_names(cfg, "_T")
    new_nts = set(cfg.nonterminals)
    word_sym: dict[str, str] = {}
    rules_1: list[Rule] = []
    for rule in cfg.rules:
        if rule not in mixed_rules:
            rules_1.append(rule)
            continue
        rhs: list[str] = []
        for sym in rule.rhs:
            if sym in cfg.terminals:
                if sym not in word_sym:
                    word_sym[sym] = next(fresh)
                    new_nts.add(word_sym[sym])
                rhs.append(word_sym[sym])
            else:
                rhs.append(sym)
        rules_1.append(Rule(rule.lhs, tuple(rhs)))
    for word in word_sym:
        rules_1.append(Rule(word_sym[word], (word,)))

    mid = Cfg(frozenset(new_nts), cfg.terminals, tuple(rules_1), cfg.start)
    term_lhs = {r.lhs for r in mid.rules if mid.is_terminal_rule(r)}
    nonterm_lhs = {r.lhs for r in mid.rules if mid.is_nonterminal_rule(r)}
    offenders = [nt for nt in dict.fromkeys(r.lhs for r in mid.rules) if nt in term_lhs and nt in nonterm_lhs]
    if not offenders:
        return mid

    lifted_sym = {nt: next(fresh) for nt in offenders}
    new_nts |= set(lifted_sym.values())
    rules_2: list[Rule] = []
    moved: dict[str, list[Rule]] = {nt: [] for nt in offenders}
    for rule in mid.rules:
        if rule.lhs in lifted_sym and mid.is_terminal_rule(rule):
            moved[rule.lhs].append(Rule(lifted_sym[rule.lhs], rule.rhs))
        else:
            rules_2.append(rule)
    for nt in offenders:
        rules_2.append(Rule(nt, (lifted_sym[nt],)))
        rules_2.extend(moved[nt])
    return Cfg(frozenset(new_nts), cfg.terminals, tuple(rules_2), cfg.start)


@dataclass(frozen=True)
class TypeDictionary:
    """Pregroup types for nonterminals plus a word lexicon.

    ``nonterminal_types`` always maps EPS to the unit type.  ``term_types``
    maps each word to its (possibly multiple) types; it is empty until
    ``term_dictionary`` fills it.
    """

    nonterminal_types: dict[str, PregroupType]
    term_types: dict[str, tuple[PregroupType, ...]] = field(default_factory=dict)

    def canonical_key(self):
        return (
            tuple(sorted((nt, str(t)) for nt, t in self.nonterminal_types.items())),
            tuple(sorted((w, tuple(str(t) for t in ts)) for w, ts in self.term_types.items())),
        )

    def term_lexicon(self) -> dict[str, tuple[PregroupType, ...]]:
        return dict(self.term_types)


def _substitute(t: PregroupType, atom_name: str, replacement: PregroupType) -> PregroupType:
    """One-pass substitution of every occurrence of an atom, at any adjoint
    order, by the correspondingly adjointed replacement type."""
    out: list[Atom] = []
    for a in t.atoms:
        if a.name == atom_name:
            out.extend(replacement.adjoint_power(a.adjoint_order).atoms)
        else:
            out.append(a)
    return PregroupType(tuple(out))


def _initial_assignment(cfg: Cfg) -> dict[str, PregroupType]:
    """Injective nonterminal -> fresh atom map; names are lowercased
    nonterminal names, uniquified in order of first appearance."""
    order: list[str] = []
    for rule in cfg.rules:
        for sym in (rule.lhs, *cfg.core(rule)):
            if sym in cfg.nonterminals and sym not in order:
                order.append(sym)
    for sym in sorted(cfg.nonterminals):
        if sym not in order:
            order.append(sym)
    taken: set[str] = set()
    assignment: dict[str, PregroupType] = {}
    for sym in order:
        base = sym.lower()
        name = base
        n = 1
        while name in taken:
            n += 1
            name = f"{base}_{n}"
        taken.add(name)
        assignment[sym] = PregroupType((Atom(name),))
    return assignment


def infer_types(cfg: Cfg, mode: str = "full") -> list[TypeDictionary]:
    """Infer pregroup type dictionaries for a validated, binarized, lifted CFG.

    Full mode explores both readings of every binary rule, returning every
    leaf dictionary of the inference tree (at most ``2^|R_NT|``, sorted
    canonically, duplicates removed).  Fast mode follows the first viable
    branch per rule and returns exactly one dictionary.

    Every candidate branch is checked against the rule that produced it
    (the rhs types must reduce to the lhs type); unsound branches are
    dropped, and a rule with no viable branch raises
    InferenceDeadlockError.
    """
    if mode not in ("full", "fast"):
        raise ValueError(f"mode must be 'full' or 'fast', got {mode!r}")
    d0 = _initial_assignment(cfg)
    boundary: list[dict[str, PregroupType]] = [dict(d0)]
    for rule in cfg.nonterminal_rules():
        new_boundary: list[dict[str, PregroupType]] = []
        for d in boundary:
            children = _rule_children(cfg, rule, d, d0)
            if mode == "fast":
                children = children[:1]
            new_boundary.extend(children)
        if not new_boundary:
            raise InferenceDeadlockError(rule)
        boundary = new_boundary[:1] if mode == "fast" else new_boundary

    dicts = []
    seen = set()
    for d in boundary:
        full = dict(d)
        full[EPSILON] = UNIT
        td = TypeDictionary(full)
        key = td.canonical_key()
        if key not in seen:
            seen.add(key)
            dicts.append(td)
    dicts.sort(key=lambda td: td.canonical_key())
    if mode == "fast" and len(dicts) != 1:
        raise AssertionError("fast mode must yield exactly one dictionary")
    return dicts


def _rule_children(cfg, rule, d, d0) -> list[dict[str, PregroupType]]:
    core = cfg.core(rule)
    a = rule.lhs
    candidates: list[dict[str, PregroupType]] = []

    def substituted(atom_name: str, replacement: PregroupType) -> dict[str, PregroupType]:
        return {x: _substitute(t, atom_name, replacement) for x, t in d.items()}

    if len(core) == 1:
        (b,) = core
        if d[b] == d0[b] and b != a:
            candidates.append(substituted(d0[b].atoms[0].name, d[a]))
        elif d[a] == d0[a] and b != a:
            candidates.append(substituted(d0[a].atoms[0].name, d[b]))
        elif d[a] == d[b]:
            candidates.append(dict(d))
        sound = [c for c in candidates if reduce([c[b]], c[a]) is not None]
        return sound

    b, c = core
    if d[b] == d0[b] and b != a:
        candidates.append(substituted(d0[b].atoms[0].name, d[a] * d[c].l))
    if d[c] == d0[c] and c != a:
        candidates.append(substituted(d0[c].atoms[0].name, d[b].r * d[a]))
    return [k for k in candidates if reduce([k[b], k[c]], k[a]) is not None]


def term_dictionary(cfg: Cfg, d: TypeDictionary) -> TypeDictionary:
    """Extend a nonterminal dictionary with the word lexicon.

    Every word receives the type of each basic nonterminal producing it.
    Terminal rules must produce single words from basic types.
    """
    report = validate(cfg)
    terms: dict[str, tuple[PregroupType, ...]] = {}
    for rule in cfg.rules:
        if not cfg.is_terminal_rule(rule):
            continue
        core = cfg.core(rule)
        if len(core) != 1:
            raise GrammarError(f"terminal rule must produce a single word: {cfg.format_rule(rule)}")
        if rule.lhs in report.complex_types:
            raise GrammarError(
                f"terminal {core[0]!r} is produced by complex type {rule.lhs}; lift terminals first"
            )
        word = core[0]
        t = d.nonterminal_types[rule.lhs]
        if t not in terms.get(word, ()):
            terms[word] = terms.get(word, ()) + (t,)
    return TypeDictionary(dict(d.nonterminal_types), terms)
