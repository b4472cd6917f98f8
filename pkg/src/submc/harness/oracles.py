"""Brute-force reference procedures used to cross-check the checkers.

None of these share code with the automata translators, except where a
function says so explicitly.
"""
from __future__ import annotations

import math
from typing import Iterable, Iterator, Sequence

from .. import formula as fm
from ..ctlstar import exists_path_states
from ..errors import SearchSpaceTooLarge, UnsupportedFormula
from ..games import check_strategic, is_boolean
from ..model import Icgs

# ---------------------------------------------------------------------------
# LTL on lassos


def temporal_count(f: fm.Formula) -> int:
    return sum(isinstance(g, fm.TEMPORAL) for g in fm.walk(f))


def lasso_mask(f: fm.Formula, seq: Sequence[int], loop: int,
               holds: dict[str, frozenset]) -> int:
    """Bit ``i`` is set iff the suffix of the lasso from position ``i``
    satisfies ``f``; ``holds[atom]`` is the set of states carrying ``atom``."""
    n = len(seq)
    full = (1 << n) - 1

    def nxt(mask):
        tail = (mask >> loop) & 1
        return (mask >> 1) | (tail << (n - 1))

    def ev(g) -> int:
        if isinstance(g, fm.Const):
            return full if g.value else 0
        if isinstance(g, fm.Atom):
            where = holds.get(g.name, frozenset())
            return sum(1 << i for i, s in enumerate(seq) if s in where)
        if isinstance(g, fm.Not):
            return full & ~ev(g.arg)
        if isinstance(g, fm.And):
            return ev(g.left) & ev(g.right)
        if isinstance(g, fm.Or):
            return ev(g.left) | ev(g.right)
        if isinstance(g, fm.Next):
            return nxt(ev(g.arg))
        if isinstance(g, (fm.Until, fm.Finally)):
            a, b = (full, ev(g.arg)) if isinstance(g, fm.Finally) else (ev(g.left), ev(g.right))
            z = 0
            while True:
                new = b | (a & nxt(z))
                if new == z:
                    return z
                z = new
        if isinstance(g, (fm.Release, fm.Globally)):
            a, b = (0, ev(g.arg)) if isinstance(g, fm.Globally) else (ev(g.left), ev(g.right))
            z = full
            while True:
                new = b & (a | nxt(z))
                if new == z:
                    return z
                z = new
        raise UnsupportedFormula(f"quantifier inside a lasso formula: {g}")

    return ev(f)


def iter_lassos(succ: Sequence[Sequence[int]], s: int, bound: int) -> Iterator[tuple[list[int], int]]:
    """Every lasso from ``s`` with at most ``bound`` positions, as the
    state sequence and the index the last state loops back to."""
    path = [s]
    stack = [iter(succ[s])]
    while stack:
        t = next(stack[-1], None)
        if t is None:
            stack.pop()
            path.pop()
            continue
        for j, u in enumerate(path):
            if u == t:
                yield path, j
        if len(path) < bound:
            path.append(t)
            stack.append(iter(succ[t]))


def _holds(m_labels: Sequence[frozenset]) -> dict[str, frozenset]:
    out: dict[str, set] = {}
    for s, lab in enumerate(m_labels):
        for p in lab:
            out.setdefault(p, set()).add(s)
    return {p: frozenset(v) for p, v in out.items()}


def lasso_bound(n_states: int, psi: fm.Formula) -> int:
    """Lasso length searched by default: one pass through the states per
    temporal operator, capped at two full laps plus two so that the
    enumeration stays tractable on small models."""
    return min(n_states * (temporal_count(psi) + 1), 2 * n_states + 2)


def _lasso_exists(succ, holds, s, psi, bound=None) -> bool:
    bound = lasso_bound(len(succ), psi) if bound is None else bound
    for seq, loop in iter_lassos(succ, s, bound):
        if lasso_mask(psi, seq, loop, holds) & 1:
            return True
    return False


def oracle_lasso_ltl(m: Icgs, s: int, psi: fm.Formula, bound: int | None = None) -> bool:
    """Whether some lasso from ``s`` of bounded length satisfies ``psi``."""
    return _lasso_exists(m.successors, _holds(m.labels), s, psi, bound)


def oracle_ctlstar_states(m: Icgs, f: fm.Formula) -> frozenset:
    """States satisfying a CTL* formula, path quantifiers decided by lasso
    enumeration."""
    succ = m.successors
    holds = dict(_holds(m.labels))
    everything = frozenset(range(m.n_states))
    counter = [0]

    def state_set(g) -> frozenset:
        if isinstance(g, fm.Const):
            return everything if g.value else frozenset()
        if isinstance(g, fm.Atom):
            return holds.get(g.name, frozenset())
        if isinstance(g, fm.Not):
            return everything - state_set(g.arg)
        if isinstance(g, fm.And):
            return state_set(g.left) & state_set(g.right)
        if isinstance(g, fm.Or):
            return state_set(g.left) | state_set(g.right)
        if isinstance(g, (fm.PathA, fm.PathE)):
            body = fm.transform(g.body, reduce)
            if isinstance(g, fm.PathE):
                return frozenset(s for s in everything if _lasso_exists(succ, holds, s, body))
            neg = fm.Not(body)
            return frozenset(s for s in everything if not _lasso_exists(succ, holds, s, neg))
        raise UnsupportedFormula(f"not a CTL* state formula: {g}")

    def reduce(g):
        if isinstance(g, (fm.PathA, fm.PathE)):
            counter[0] += 1
            name = f"\0{counter[0]}"
            holds[name] = state_set(g)
            return fm.Atom(name)
        return None

    return state_set(f)


# ---------------------------------------------------------------------------
# universal path checks on a fixed outcome graph


def _all_paths_fragment(succ: dict[int, Sequence[int]], labels: Sequence[frozenset],
                        body: fm.Formula) -> set[int]:
    """States of the graph all of whose paths satisfy a next/until/release
    body over boolean arguments."""
    nodes = list(succ)

    def bset(g):
        out = set()
        for s in nodes:
            if _bool_holds(g, labels[s]):
                out.add(s)
        return out

    if is_boolean(body):
        return bset(body)
    if isinstance(body, fm.Next):
        b = bset(body.arg)
        return {s for s in nodes if all(t in b for t in succ[s])}
    if isinstance(body, fm.Finally):
        a, b, until = set(nodes), bset(body.arg), True
    elif isinstance(body, fm.Globally):
        a, b, until = set(), bset(body.arg), False
    elif isinstance(body, (fm.Until, fm.Release)):
        a, b, until = bset(body.left), bset(body.right), isinstance(body, fm.Until)
    else:
        raise UnsupportedFormula(f"not a next/until/release body: {body}")
    if until:
        z = set(b)
        while True:
            new = z | {s for s in a if all(t in z for t in succ[s])}
            if new == z:
                return z
            z = new
    z = set(b)
    while True:
        new = {s for s in b if s in a or all(t in z for t in succ[s])}
        if new == z:
            return z
        z = new


def _bool_holds(g: fm.Formula, label: frozenset) -> bool:
    if isinstance(g, fm.Const):
        return g.value
    if isinstance(g, fm.Atom):
        return g.name in label
    if isinstance(g, fm.Not):
        return not _bool_holds(g.arg, label)
    if isinstance(g, fm.And):
        return _bool_holds(g.left, label) and _bool_holds(g.right, label)
    if isinstance(g, fm.Or):
        return _bool_holds(g.left, label) or _bool_holds(g.right, label)
    raise UnsupportedFormula(f"not a boolean formula: {g}")


def _in_fragment(body: fm.Formula) -> bool:
    if is_boolean(body):
        return True
    if isinstance(body, (fm.Next, fm.Finally, fm.Globally)):
        return is_boolean(body.arg)
    if isinstance(body, (fm.Until, fm.Release)):
        return is_boolean(body.left) and is_boolean(body.right)
    return False


# ---------------------------------------------------------------------------
# memoryless strategy enumeration


def strategy_space(m: Icgs, coalition: Iterable[int]) -> int:
    """Number of uniform memoryless joint strategies of the coalition."""
    return math.prod(len(m.protocol[i][min(cls)]) for i in set(coalition) for cls in m.indist[i])


def oracle_memoryless_uniform(m: Icgs, f: fm.Formula, state: int | None = None,
                              path_check: str = "auto", limit: int = 10 ** 6) -> bool:
    """Whether some uniform memoryless strategy of the coalition of the
    single strategic formula ``f = <<C>> psi`` enforces ``psi`` from
    ``state`` (default: the initial state).

    ``path_check`` decides how the outcome graph is tested: ``"graph"``
    (fixpoints, next/until/release bodies only), ``"nba"`` (Büchi product
    of the CTL* checker), ``"lasso"`` (lasso enumeration) or ``"auto"``.
    Choices are only made for classes the play can reach; more than
    ``limit`` examined strategies raise :class:`SearchSpaceTooLarge`.
    """
    if not isinstance(f, fm.Strategic):
        raise UnsupportedFormula("memoryless oracle expects <<C>> psi")
    body = fm.to_nnf(f.body)
    if any(isinstance(g, fm.QUANTIFIERS) for g in fm.walk(body)):
        raise UnsupportedFormula(f"nested quantifier in {f}")
    coalition = sorted(m.agent_set(f.coalition))
    examined = 0
    s0 = m.initial if state is None else state
    if path_check == "auto":
        path_check = "graph" if _in_fragment(body) else "nba"
    holds = _holds(m.labels)
    negated = fm.negate(body)
    in_c = set(coalition)

    def moves(s, choice):
        out = set()
        for joint, t in m.transitions[s].items():
            if all(joint[i] == choice[(i, m.class_of[i][s])] for i in coalition):
                out.add(t)
        return sorted(out)

    def verify(choice, reach) -> bool:
        nonlocal examined
        examined += 1
        if examined > limit:
            raise SearchSpaceTooLarge(f"more than {limit} memoryless strategies")
        succ = {s: moves(s, choice) for s in reach}
        if path_check == "graph":
            return s0 in _all_paths_fragment(succ, m.labels, body)
        nodes = sorted(reach)
        index = {s: k for k, s in enumerate(nodes)}
        g = [[index[t] for t in succ[s]] for s in nodes]
        if path_check == "nba":
            labels = [m.labels[s] for s in nodes]
            return not exists_path_states(g, labels, negated, [index[s0]])
        sub_holds = {p: frozenset(index[s] for s in v if s in index) for p, v in holds.items()}
        return not _lasso_exists(g, sub_holds, index[s0], negated,
                                 lasso_bound(m.n_states, negated))

    def search(choice) -> bool:
        reach, todo = {s0}, [s0]
        while todo:
            s = todo.pop()
            for i in coalition:
                key = (i, m.class_of[i][s])
                if key not in choice:
                    for a in sorted(m.protocol[i][s]):
                        choice[key] = a
                        if search(choice):
                            return True
                    del choice[key]
                    return False
            for t in moves(s, choice):
                if t not in reach:
                    reach.add(t)
                    todo.append(t)
        return verify(choice, reach)

    return search({}) if in_c else verify({}, _reachable(m, s0))


def _reachable(m: Icgs, s0: int) -> set[int]:
    reach, todo = {s0}, [s0]
    while todo:
        s = todo.pop()
        for t in m.successors[s]:
            if t not in reach:
                reach.add(t)
                todo.append(t)
    return reach


def memoryless_states(m: Icgs, f: fm.Formula, **kw) -> frozenset:
    """States where ``<<C>> psi`` has a memoryless witness, or where
    ``[[C]] psi`` holds by determinacy (no memoryless witness for the
    negated body).  Exact for next/until/release bodies under perfect
    information."""
    if isinstance(f, fm.StrategicDual):
        dual = fm.Strategic(f.coalition, fm.negate(f.body))
        return frozenset(s for s in range(m.n_states)
                         if not oracle_memoryless_uniform(m, dual, s, **kw))
    return frozenset(s for s in range(m.n_states) if oracle_memoryless_uniform(m, f, s, **kw))


# ---------------------------------------------------------------------------
# formula progression games


# Obligations are kept in disjunctive normal form: a frozenset of clauses,
# each a frozenset of temporal formulas.  TRUE has the empty clause.
_TRUE = frozenset([frozenset()])
_FALSE = frozenset()


def _and(a: frozenset, b: frozenset) -> frozenset:
    return frozenset(x | y for x in a for y in b)


def _or(a: frozenset, b: frozenset) -> frozenset:
    return a | b


def _obligation(g: fm.Formula, label: frozenset | None = None) -> frozenset:
    """DNF of ``g``; with ``label``, atoms are decided by it and temporal
    operators are unfolded one step."""
    if isinstance(g, fm.Const):
        return _TRUE if g.value else _FALSE
    if isinstance(g, fm.And):
        return _and(_obligation(g.left, label), _obligation(g.right, label))
    if isinstance(g, fm.Or):
        return _or(_obligation(g.left, label), _obligation(g.right, label))
    if label is None:
        return frozenset([frozenset([g])])
    if isinstance(g, fm.Atom):
        return _TRUE if g.name in label else _FALSE
    if isinstance(g, fm.Not):
        return _FALSE if g.arg.name in label else _TRUE
    here = frozenset([frozenset([g])])
    if isinstance(g, fm.Next):
        return _obligation(g.arg)
    if isinstance(g, fm.Finally):
        return _or(_obligation(g.arg, label), here)
    if isinstance(g, fm.Globally):
        return _and(_obligation(g.arg, label), here)
    if isinstance(g, fm.Until):
        return _or(_obligation(g.right, label), _and(_obligation(g.left, label), here))
    if isinstance(g, fm.Release):
        return _and(_obligation(g.right, label), _or(_obligation(g.left, label), here))
    raise UnsupportedFormula(f"cannot progress {g}")


def _progress(ob: frozenset, label: frozenset) -> frozenset:
    """Obligation for the suffix after reading ``label``."""
    out = _FALSE
    for clause in ob:
        part = _TRUE
        for g in clause:
            part = _and(part, _obligation(g, label))
            if not part:
                break
        out = _or(out, part)
        if frozenset() in out:
            return _TRUE
    return out


def oracle_progression_game(m: Icgs, f: fm.Formula) -> frozenset:
    """Exact satisfaction set of one strategic operator over a co-safety
    or safety body under perfect information, by solving the game on
    ``(state, progressed obligation)`` positions."""
    if not isinstance(f, fm.STRATEGIC):
        raise UnsupportedFormula("expected a strategic formula")
    body = fm.to_nnf(f.body)
    kinds = {type(g) for g in fm.walk(body)}
    reach = not kinds & {fm.Globally, fm.Release}
    if not reach and kinds & {fm.Finally, fm.Until}:
        raise UnsupportedFormula("mixed eventualities and invariants")
    existential = isinstance(f, fm.Strategic)
    coalition = sorted(m.agent_set(f.coalition))

    groups = []
    for s in range(m.n_states):
        by: dict[tuple, set] = {}
        for joint, t in m.transitions[s].items():
            by.setdefault(tuple(joint[i] for i in coalition), set()).add(t)
        groups.append([sorted(v) for v in by.values()])

    positions: dict[tuple, int] = {}
    after: list = []
    edges: list = []
    todo = []

    def intern(s, ob):
        key = (s, ob)
        if key not in positions:
            positions[key] = len(after)
            after.append(_progress(ob, m.labels[s]))
            edges.append(None)
            todo.append(key)
        return positions[key]

    starts = [intern(s, _obligation(body)) for s in range(m.n_states)]
    while todo:
        s, ob = todo.pop()
        k = positions[(s, ob)]
        nxt = after[k]
        if nxt == _TRUE or nxt == _FALSE:
            edges[k] = []
            continue
        edges[k] = [[intern(t, nxt) for t in outs] for outs in groups[s]]

    def pre(z: set, k: int) -> bool:
        profiles = edges[k]
        if existential:
            return any(all(x in z for x in outs) for outs in profiles)
        return all(any(x in z for x in outs) for outs in profiles)

    n = len(after)
    if reach:
        z = {k for k in range(n) if after[k] == _TRUE}
        while True:
            new = z | {k for k in range(n) if edges[k] and pre(z, k)}
            if new == z:
                break
            z = new
    else:
        z = {k for k in range(n) if after[k] != _FALSE}
        while True:
            new = {k for k in z if after[k] == _TRUE or pre(z, k)}
            if new == z:
                break
            z = new
    return frozenset(s for s, k in enumerate(starts) if k in z)


# ---------------------------------------------------------------------------
# perfect-information nested checking


def perfect_information_states(m: Icgs, f: fm.Formula) -> frozenset:
    """Satisfaction set of a (possibly nested) strategic formula when every
    agent observes the state, sub-formulas decided leaves first."""
    mp = m.with_perfect_information()
    tree = fm.subformulas(f, mp.atoms)
    for node in tree:
        mp = mp.relabel({node.atom: check_strategic(mp, node.formula)})
    everything = frozenset(range(mp.n_states))

    def ev(g):
        if isinstance(g, fm.Const):
            return everything if g.value else frozenset()
        if isinstance(g, fm.Atom):
            return mp.states_with(g.name)
        if isinstance(g, fm.Not):
            return everything - ev(g.arg)
        if isinstance(g, fm.And):
            return ev(g.left) & ev(g.right)
        if isinstance(g, fm.Or):
            return ev(g.left) | ev(g.right)
        raise UnsupportedFormula(f"path quantifier outside strategic operators: {g}")

    return ev(tree.residue)
