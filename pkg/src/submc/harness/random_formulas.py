"""Seeded random formulas for cross-checking the checkers."""
from __future__ import annotations

import random
from typing import Sequence

from .. import formula as fm


def random_boolean(rng: random.Random, atoms: Sequence[str], depth: int = 1) -> fm.Formula:
    if depth <= 0 or rng.random() < 0.5:
        roll = rng.random()
        if roll < 0.05:
            return fm.Const(rng.random() < 0.5)
        a = fm.Atom(rng.choice(list(atoms)))
        return fm.Not(a) if roll < 0.3 else a
    op = rng.choice((fm.And, fm.Or))
    return op(random_boolean(rng, atoms, depth - 1), random_boolean(rng, atoms, depth - 1))


_UNARY = (fm.Next, fm.Finally, fm.Globally)
_BINARY = (fm.Until, fm.Release)


def random_ltl(rng: random.Random, atoms: Sequence[str], depth: int = 3,
               unary: Sequence = _UNARY, binary: Sequence = _BINARY,
               negation: bool = True) -> fm.Formula:
    """Random LTL formula of temporal/boolean nesting depth at most ``depth``."""
    if depth <= 0 or rng.random() < 0.2:
        a = fm.Atom(rng.choice(list(atoms)))
        return fm.Not(a) if negation and rng.random() < 0.3 else a
    roll = rng.random()
    if roll < 0.35 and unary:
        return rng.choice(list(unary))(random_ltl(rng, atoms, depth - 1, unary, binary, negation))
    if roll < 0.6 and binary:
        op = rng.choice(list(binary))
    else:
        op = rng.choice((fm.And, fm.Or))
    left = random_ltl(rng, atoms, depth - 1, unary, binary, negation)
    right = random_ltl(rng, atoms, depth - 1, unary, binary, negation)
    out = op(left, right)
    if negation and rng.random() < 0.1:
        return fm.Not(out)
    return out


def random_ctlstar(rng: random.Random, atoms: Sequence[str], depth: int = 3) -> fm.Formula:
    """Random CTL* state formula of nesting depth at most ``depth``."""
    if depth <= 0 or rng.random() < 0.15:
        a = fm.Atom(rng.choice(list(atoms)))
        return fm.Not(a) if rng.random() < 0.3 else a
    roll = rng.random()
    if roll < 0.7:
        quant = rng.choice((fm.PathA, fm.PathE))
        return quant(_path(rng, atoms, depth - 1))
    if roll < 0.85:
        return fm.Not(random_ctlstar(rng, atoms, depth - 1))
    op = rng.choice((fm.And, fm.Or))
    return op(random_ctlstar(rng, atoms, depth - 1), random_ctlstar(rng, atoms, depth - 1))


def _path(rng, atoms, depth) -> fm.Formula:
    if depth <= 0 or rng.random() < 0.2:
        if rng.random() < 0.25 and depth > 0:
            return random_ctlstar(rng, atoms, depth - 1)
        a = fm.Atom(rng.choice(list(atoms)))
        return fm.Not(a) if rng.random() < 0.3 else a
    roll = rng.random()
    if roll < 0.35:
        return rng.choice(_UNARY)(_path(rng, atoms, depth - 1))
    if roll < 0.6:
        op = rng.choice(_BINARY)
    elif roll < 0.85:
        op = rng.choice((fm.And, fm.Or))
    else:
        return fm.Not(_path(rng, atoms, depth - 1))
    return op(_path(rng, atoms, depth - 1), _path(rng, atoms, depth - 1))


def random_strategic(rng: random.Random, agents: Sequence[str], atoms: Sequence[str],
                     kind: str = "atl", dual: bool | None = None) -> fm.Formula:
    """One strategic operator over a body from the ``atl`` fragment, or a
    ``co-safety`` or ``safety`` body."""
    k = rng.randint(0, len(agents))
    coalition = tuple(sorted(rng.sample(list(agents), k), key=list(agents).index))
    if kind == "atl":
        b = lambda: random_boolean(rng, atoms, 1)
        roll = rng.randrange(5)
        body = [lambda: fm.Next(b()), lambda: fm.Until(b(), b()), lambda: fm.Release(b(), b()),
                lambda: fm.Finally(b()), lambda: fm.Globally(b())][roll]()
    elif kind == "co-safety":
        body = random_ltl(rng, atoms, 3, (fm.Next, fm.Finally), (fm.Until,), negation=False)
    elif kind == "safety":
        body = random_ltl(rng, atoms, 3, (fm.Next, fm.Globally), (fm.Release,), negation=False)
    else:
        raise ValueError(kind)
    if dual is None:
        dual = rng.random() < 0.5
    return (fm.StrategicDual if dual else fm.Strategic)(coalition, body)
