"""ATL*/CTL* formulas: AST, parser, printer and the rewrites used by the
verification procedure.

Surface syntax (ASCII)::

    atoms      [a-zA-Z_][a-zA-Z0-9_]*   (not a keyword)
    constants  true  false
    boolean    !  &  |  ->
    strategic  <<a,b>> psi   [[a,b]] psi
    path       A psi   E psi
    temporal   X  F  G  (unary)   U  R  (binary, right associative)

Binding, tightest first: ``! X F G``; ``U R``; ``&``; ``|``; ``->``.
A quantifier prefix (``<<..>>``, ``[[..]]``, ``A``, ``E``) scopes over the
following until-level expression, so ``<<a>> p U q & r`` reads
``(<<a>> (p U q)) & r``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator

from .errors import ArityError, ParseError, ScopeError


class Formula:
    """Base class of all AST nodes (frozen dataclasses, structural equality)."""

    __slots__ = ()

    def children(self) -> tuple["Formula", ...]:
        return ()

    def __str__(self):
        return to_string(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    name: str


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Or(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Strategic(Formula):
    """``<<coalition>> body``: the coalition can enforce ``body``."""
    coalition: tuple[str, ...]
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class StrategicDual(Formula):
    """``[[coalition]] body``: the coalition cannot avoid ``body``."""
    coalition: tuple[str, ...]
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class PathA(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class PathE(Formula):
    body: Formula

    def children(self):
        return (self.body,)


@dataclass(frozen=True)
class Next(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Finally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Globally(Formula):
    arg: Formula

    def children(self):
        return (self.arg,)


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class Release(Formula):
    left: Formula
    right: Formula

    def children(self):
        return (self.left, self.right)


STRATEGIC = (Strategic, StrategicDual)
QUANTIFIERS = (Strategic, StrategicDual, PathA, PathE)
TEMPORAL = (Next, Finally, Globally, Until, Release)


def rebuild(f: Formula, kids: Iterable[Formula]) -> Formula:
    """Same node kind as ``f`` with new children."""
    kids = tuple(kids)
    if isinstance(f, (Const, Atom)):
        return f
    if isinstance(f, STRATEGIC):
        return type(f)(f.coalition, kids[0])
    return type(f)(*kids)


def walk(f: Formula) -> Iterator[Formula]:
    """Pre-order traversal."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def transform(f: Formula, fn: Callable[[Formula], Formula | None]) -> Formula:
    """Top-down rewrite: ``fn`` returns a replacement or ``None`` to recurse."""
    out = fn(f)
    if out is not None:
        return out
    kids = f.children()
    if not kids:
        return f
    new = tuple(transform(k, fn) for k in kids)
    if all(a is b for a, b in zip(new, kids)):
        return f
    return rebuild(f, new)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<lstrat><<) | (?P<rstrat>>>)
  | (?P<ldual>\[\[) | (?P<rdual>\]\])
  | (?P<imp>->)
  | (?P<op>[!&|(),])
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<num>[0-9]+)
""", re.VERBOSE)

KEYWORDS = {"A", "E", "X", "F", "G", "U", "R", "true", "false"}


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    out, pos = [], 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        kind = m.lastgroup
        if kind != "ws":
            value = m.group(kind)
            if kind == "ident" and value in KEYWORDS:
                kind = value
            elif kind == "op":
                kind = value
            out.append((kind, value, pos))
        pos = m.end()
    out.append(("eof", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self) -> str:
        return self.tokens[self.i][0]

    def take(self, kind: str | None = None):
        tok = self.tokens[self.i]
        if kind is not None and tok[0] != kind:
            want = {"eof": "end of input"}.get(kind, repr(kind))
            got = "end of input" if tok[0] == "eof" else repr(tok[1])
            raise ParseError(f"expected {want}, found {got}", tok[2])
        self.i += 1
        return tok

    def parse(self) -> Formula:
        f = self.implication()
        self.take("eof")
        return f

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.peek() == "imp":
            self.take()
            right = self.implication()
            return Or(Not(left), right)
        return left

    def disjunction(self) -> Formula:
        f = self.conjunction()
        while self.peek() == "|":
            self.take()
            f = Or(f, self.conjunction())
        return f

    def conjunction(self) -> Formula:
        f = self.binary_temporal()
        while self.peek() == "&":
            self.take()
            f = And(f, self.binary_temporal())
        return f

    def binary_temporal(self) -> Formula:
        left = self.unary()
        if self.peek() in ("U", "R"):
            op = self.take()[0]
            right = self.binary_temporal()
            return Until(left, right) if op == "U" else Release(left, right)
        return left

    def coalition(self, close: str) -> tuple[str, ...]:
        names: list[str] = []
        if self.peek() == close:
            self.take()
            return ()
        while True:
            tok = self.tokens[self.i]
            # agent names may be numbers or coincide with keywords
            if tok[0] not in ("ident", "num") and tok[0] not in KEYWORDS:
                raise ArityError(f"malformed coalition at position {tok[2]}: "
                                 f"expected agent name, found {tok[1] or 'end of input'!r}")
            self.take()
            if tok[1] in names:
                raise ArityError(f"agent {tok[1]!r} listed twice in coalition")
            names.append(tok[1])
            nxt = self.tokens[self.i]
            if nxt[0] == ",":
                self.take()
                continue
            if nxt[0] == close:
                self.take()
                return tuple(names)
            raise ArityError(f"malformed coalition at position {nxt[2]}")

    def unary(self) -> Formula:
        kind, value, pos = self.tokens[self.i]
        if kind == "!":
            self.take()
            return Not(self.unary())
        if kind in ("X", "F", "G"):
            self.take()
            return {"X": Next, "F": Finally, "G": Globally}[kind](self.unary())
        if kind == "lstrat":
            self.take()
            return Strategic(self.coalition("rstrat"), self.binary_temporal())
        if kind == "ldual":
            self.take()
            return StrategicDual(self.coalition("rdual"), self.binary_temporal())
        if kind in ("A", "E"):
            self.take()
            body = self.binary_temporal()
            return PathA(body) if kind == "A" else PathE(body)
        if kind == "(":
            self.take()
            f = self.implication()
            self.take(")")
            return f
        if kind == "true":
            self.take()
            return TRUE
        if kind == "false":
            self.take()
            return FALSE
        if kind == "ident":
            self.take()
            return Atom(value)
        got = "end of input" if kind == "eof" else repr(value)
        raise ParseError(f"unexpected {got}", pos)


def check_scope(f: Formula) -> Formula:
    """Raise :class:`ScopeError` if a temporal operator is not under a
    quantifier."""
    def visit(g, scoped):
        if isinstance(g, TEMPORAL) and not scoped:
            raise ScopeError(f"temporal operator outside a quantifier in {to_string(g)!r}")
        inner = scoped or isinstance(g, QUANTIFIERS)
        for k in g.children():
            visit(k, inner)
    visit(f, False)
    return f


def parse(text: str) -> Formula:
    """Parse a state formula."""
    return check_scope(_Parser(text).parse())


def parse_path(text: str) -> Formula:
    """Parse a path formula (no scope discipline at top level)."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# printing

def _needs_parens(f: Formula) -> bool:
    return isinstance(f, QUANTIFIERS)


def to_string(f: Formula) -> str:
    def arg(g):
        s = to_string(g)
        return f"({s})" if _needs_parens(g) else s

    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"!{arg(f.arg)}"
    if isinstance(f, And):
        return f"({arg(f.left)} & {arg(f.right)})"
    if isinstance(f, Or):
        return f"({arg(f.left)} | {arg(f.right)})"
    if isinstance(f, Strategic):
        return f"<<{','.join(f.coalition)}>> {to_string(f.body)}"
    if isinstance(f, StrategicDual):
        return f"[[{','.join(f.coalition)}]] {to_string(f.body)}"
    if isinstance(f, PathA):
        return f"A {to_string(f.body)}"
    if isinstance(f, PathE):
        return f"E {to_string(f.body)}"
    if isinstance(f, Next):
        return f"X {arg(f.arg)}"
    if isinstance(f, Finally):
        return f"F {arg(f.arg)}"
    if isinstance(f, Globally):
        return f"G {arg(f.arg)}"
    if isinstance(f, Until):
        return f"({arg(f.left)} U {arg(f.right)})"
    if isinstance(f, Release):
        return f"({arg(f.left)} R {arg(f.right)})"
    raise TypeError(f"not a formula: {f!r}")


# ---------------------------------------------------------------------------
# negation normal form and atom bookkeeping

def negate(f: Formula) -> Formula:
    """NNF of ``!f``."""
    return to_nnf(Not(f))


def to_nnf(f: Formula) -> Formula:
    """Push negations down to atoms using the usual dualities."""
    if isinstance(f, (Const, Atom)):
        return f
    if not isinstance(f, Not):
        return rebuild(f, (to_nnf(k) for k in f.children()))
    g = f.arg
    if isinstance(g, Const):
        return Const(not g.value)
    if isinstance(g, Atom):
        return f
    if isinstance(g, Not):
        return to_nnf(g.arg)
    if isinstance(g, And):
        return Or(negate(g.left), negate(g.right))
    if isinstance(g, Or):
        return And(negate(g.left), negate(g.right))
    if isinstance(g, Strategic):
        return StrategicDual(g.coalition, negate(g.body))
    if isinstance(g, StrategicDual):
        return Strategic(g.coalition, negate(g.body))
    if isinstance(g, PathA):
        return PathE(negate(g.body))
    if isinstance(g, PathE):
        return PathA(negate(g.body))
    if isinstance(g, Next):
        return Next(negate(g.arg))
    if isinstance(g, Finally):
        return Globally(negate(g.arg))
    if isinstance(g, Globally):
        return Finally(negate(g.arg))
    if isinstance(g, Until):
        return Release(negate(g.left), negate(g.right))
    if isinstance(g, Release):
        return Until(negate(g.left), negate(g.right))
    raise TypeError(f"not a formula: {g!r}")


def is_nnf(f: Formula) -> bool:
    return all(isinstance(g.arg, Atom) for g in walk(f) if isinstance(g, Not))


def atoms_of(f: Formula) -> list[str]:
    """Atom names in first-occurrence order."""
    seen: dict[str, None] = {}
    for g in walk(f):
        if isinstance(g, Atom):
            seen.setdefault(g.name)
    return list(seen)


def extract_negated_atoms(f: Formula) -> list[str]:
    """Atoms occurring under a negation, first occurrence first."""
    seen: dict[str, None] = {}
    for g in walk(f):
        if isinstance(g, Not) and isinstance(g.arg, Atom):
            seen.setdefault(g.arg.name)
    return list(seen)


def replace_negated_atom(f: Formula, p: str, np: str) -> Formula:
    """Replace every ``!p`` by the atom ``np``."""
    target = Not(Atom(p))
    return transform(f, lambda g: Atom(np) if g == target else None)


def coalition_agents(f: Formula) -> list[str]:
    """Union of all coalitions, in first-occurrence order."""
    seen: dict[str, None] = {}
    for g in walk(f):
        if isinstance(g, STRATEGIC):
            for a in g.coalition:
                seen.setdefault(a)
    return list(seen)


def count_strategic(f: Formula) -> int:
    return sum(isinstance(g, STRATEGIC) for g in walk(f))


def update_formula(f: Formula, target: Formula, atom: str) -> Formula:
    """Replace every occurrence of ``target`` (exact structural match) by
    ``Atom(atom)``."""
    return transform(f, lambda g: Atom(atom) if g == target else None)


def atl_to_ctl(f: Formula, variant: str) -> Formula:
    """Replace every strategic operator by ``A`` (variant ``"n"``) or ``E``
    (variant ``"p"``)."""
    if variant not in ("n", "p"):
        raise ValueError("variant must be 'n' or 'p'")
    quant = PathA if variant == "n" else PathE

    def step(g):
        if isinstance(g, STRATEGIC):
            return quant(atl_to_ctl(g.body, variant))
        return None
    return transform(f, step)


def substitute_atoms(f: Formula, mapping: dict[str, Formula]) -> Formula:
    return transform(f, lambda g: mapping.get(g.name) if isinstance(g, Atom) else None)


# ---------------------------------------------------------------------------
# sub-formula tree

@dataclass(frozen=True)
class SubformulaNode:
    """One strategic sub-formula with its nested strategic children already
    replaced by their atoms."""
    index: int
    atom: str
    formula: Formula
    original: Formula
    depends_on: tuple[int, ...] = ()

    def variant_atom(self, variant: str) -> str:
        return variant + self.atom


@dataclass(frozen=True)
class SubformulaTree:
    nodes: tuple[SubformulaNode, ...]
    residue: Formula
    prefix: str = "atom"

    def __iter__(self):
        return iter(self.nodes)

    def __len__(self):
        return len(self.nodes)

    def node_of_atom(self, atom: str) -> SubformulaNode | None:
        for n in self.nodes:
            if n.atom == atom:
                return n
        return None

    def reconstruct(self) -> Formula:
        """Substitute atoms back, last node first."""
        f = self.residue
        for node in reversed(self.nodes):
            f = substitute_atoms(f, {node.atom: node.formula})
        return f


def fresh_prefix(reserved: Iterable[str], base: str = "atom") -> str:
    """A prefix ``P`` such that no ``P_k``, ``nP_k`` or ``pP_k`` is reserved."""
    reserved = set(reserved)
    prefix = base
    pat = None
    while True:
        pat = re.compile(rf"^[np]?{re.escape(prefix)}_\d+$")
        if not any(pat.match(r) for r in reserved):
            return prefix
        prefix += "_"


def subformulas(f: Formula, reserved: Iterable[str] = ()) -> SubformulaTree:
    """Strategic sub-formulas of ``f`` in post-order (dependencies first).

    Each strategic node gets a fresh atom ``atom_k`` (``k`` = 1, 2, ... in
    post-order); occurrences inside its ancestors are replaced by that atom.
    Structurally equal sub-formulas share one node.
    """
    prefix = fresh_prefix(list(reserved) + atoms_of(f))
    nodes: list[SubformulaNode] = []
    by_formula: dict[Formula, SubformulaNode] = {}

    def visit(g: Formula) -> tuple[Formula, set[int]]:
        kids = g.children()
        if not kids:
            return g, set()
        reduced, deps = [], set()
        for k in kids:
            r, d = visit(k)
            reduced.append(r)
            deps |= d
        new = rebuild(g, reduced)
        if isinstance(g, STRATEGIC):
            node = by_formula.get(new)
            if node is None:
                node = SubformulaNode(len(nodes) + 1, f"{prefix}_{len(nodes) + 1}", new, g,
                                      tuple(sorted(deps)))
                nodes.append(node)
                by_formula[new] = node
            return Atom(node.atom), {node.index}
        return new, deps

    residue, _ = visit(f)
    return SubformulaTree(tuple(nodes), residue, prefix)
