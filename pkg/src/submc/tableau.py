"""One-step expansion of LTL formulas, shared by the automata translators.

A cover of a formula is one way of satisfying it: literals that must hold
now, obligations for the next position, and the until-like formulas whose
fulfilment it postpones.  A formula holds on a word iff some cover is
consistent with the first letter and its obligations hold on the suffix
(with every postponed eventuality fulfilled eventually).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable

from . import formula as fm
from .errors import UnsupportedFormula


@dataclass(frozen=True)
class Cover:
    pos: frozenset
    neg: frozenset
    nxt: frozenset
    postponed: frozenset = frozenset()

    def consistent(self) -> bool:
        return not (self.pos & self.neg)

    def allows(self, label: frozenset) -> bool:
        return self.pos <= label and not (self.neg & label)

    def join(self, other: "Cover") -> "Cover":
        return Cover(self.pos | other.pos, self.neg | other.neg,
                     self.nxt | other.nxt, self.postponed | other.postponed)


EMPTY = Cover(frozenset(), frozenset(), frozenset())


def _product(a: tuple, b: tuple) -> tuple:
    out = []
    for x in a:
        for y in b:
            c = x.join(y)
            if c.consistent() and c not in out:
                out.append(c)
    return tuple(out)


@lru_cache(maxsize=100_000)
def covers(f: fm.Formula) -> tuple[Cover, ...]:
    """Expansion of an NNF formula into its covers."""
    if isinstance(f, fm.Const):
        return (EMPTY,) if f.value else ()
    if isinstance(f, fm.Atom):
        return (Cover(frozenset([f.name]), frozenset(), frozenset()),)
    if isinstance(f, fm.Not):
        if not isinstance(f.arg, fm.Atom):
            raise UnsupportedFormula(f"formula not in negation normal form: {f}")
        return (Cover(frozenset(), frozenset([f.arg.name]), frozenset()),)
    if isinstance(f, fm.And):
        return _product(covers(f.left), covers(f.right))
    if isinstance(f, fm.Or):
        return tuple(dict.fromkeys(covers(f.left) + covers(f.right)))
    if isinstance(f, fm.Next):
        return (Cover(frozenset(), frozenset(), frozenset([f.arg])),)
    if isinstance(f, fm.Until):
        later = Cover(frozenset(), frozenset(), frozenset([f]), frozenset([f]))
        return tuple(dict.fromkeys(covers(f.right) + _product(covers(f.left), (later,))))
    if isinstance(f, fm.Finally):
        later = Cover(frozenset(), frozenset(), frozenset([f]), frozenset([f]))
        return tuple(dict.fromkeys(covers(f.arg) + (later,)))
    if isinstance(f, fm.Release):
        keep = Cover(frozenset(), frozenset(), frozenset([f]))
        both = _product(covers(f.right), covers(f.left))
        return tuple(dict.fromkeys(both + _product(covers(f.right), (keep,))))
    if isinstance(f, fm.Globally):
        keep = Cover(frozenset(), frozenset(), frozenset([f]))
        return _product(covers(f.arg), (keep,))
    raise UnsupportedFormula(f"quantified sub-formula inside a path formula: {f}")


def covers_of_set(obligations: Iterable[fm.Formula]) -> tuple[Cover, ...]:
    """Covers of the conjunction of ``obligations``."""
    out = (EMPTY,)
    for g in sorted(obligations, key=fm.to_string):
        out = _product(out, covers(g))
        if not out:
            break
    return out


def eventualities(f: fm.Formula) -> list[fm.Formula]:
    """Until and finally sub-formulas, in a fixed order."""
    seen: dict = {}
    for g in fm.walk(f):
        if isinstance(g, (fm.Until, fm.Finally)):
            seen.setdefault(g)
    return sorted(seen, key=fm.to_string)


def literal_atoms(f: fm.Formula) -> frozenset:
    return frozenset(fm.atoms_of(f))
