"""Strategic checking under perfect information and perfect recall.

Covers one strategic operator over a path formula whose state arguments
are boolean combinations of atoms.  Plain next/until/release bodies are
solved by fixpoints on the model; co-safety and safety bodies by
reachability and safety games on the product with a deterministic
automaton.  Everything else raises :class:`UnsupportedFormula`.
"""
from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import formula as fm
from .errors import ImperfectInformationError, UnsupportedFormula
from .model import Icgs
from .tableau import covers_of_set, literal_atoms


class PathClass(enum.Enum):
    ATL_FRAGMENT = "atl"
    CO_SAFETY = "co-safety"
    SAFETY = "safety"
    UNSUPPORTED = "unsupported"


def is_boolean(f: fm.Formula) -> bool:
    return not any(isinstance(g, fm.TEMPORAL + fm.QUANTIFIERS) for g in fm.walk(f))


_LITERAL_OPS = (fm.Atom, fm.Const, fm.And, fm.Or)


def _uses_only(f: fm.Formula, ops: tuple) -> bool:
    for g in fm.walk(f):
        if isinstance(g, fm.Not):
            if not isinstance(g.arg, fm.Atom):
                return False
        elif not isinstance(g, ops):
            return False
    return True


def classify_path_formula(psi: fm.Formula) -> PathClass:
    """Which solver handles ``psi`` (the body of one strategic operator)."""
    g = fm.to_nnf(psi)
    if any(isinstance(h, fm.QUANTIFIERS) for h in fm.walk(g)):
        return PathClass.UNSUPPORTED
    if is_boolean(g):
        return PathClass.ATL_FRAGMENT
    if isinstance(g, (fm.Next, fm.Finally, fm.Globally)) and is_boolean(g.arg):
        return PathClass.ATL_FRAGMENT
    if isinstance(g, (fm.Until, fm.Release)) and is_boolean(g.left) and is_boolean(g.right):
        return PathClass.ATL_FRAGMENT
    if _uses_only(g, _LITERAL_OPS + (fm.Next, fm.Finally, fm.Until)):
        return PathClass.CO_SAFETY
    if _uses_only(g, _LITERAL_OPS + (fm.Next, fm.Globally, fm.Release)):
        return PathClass.SAFETY
    return PathClass.UNSUPPORTED


def eval_boolean(m: Icgs, f: fm.Formula) -> frozenset:
    """States satisfying a quantifier-free, temporal-free formula."""
    everything = frozenset(range(m.n_states))
    if isinstance(f, fm.Const):
        return everything if f.value else frozenset()
    if isinstance(f, fm.Atom):
        return m.states_with(f.name)
    if isinstance(f, fm.Not):
        return everything - eval_boolean(m, f.arg)
    if isinstance(f, fm.And):
        return eval_boolean(m, f.left) & eval_boolean(m, f.right)
    if isinstance(f, fm.Or):
        return eval_boolean(m, f.left) | eval_boolean(m, f.right)
    raise UnsupportedFormula(f"not a boolean state formula: {f}")


# ---------------------------------------------------------------------------
# one-step predecessors

def _profile_successors(m: Icgs, coalition: Sequence[int], s: int) -> list[frozenset]:
    """For each coalition action profile at ``s``, the set of successors
    reachable under some completion by the other agents."""
    groups: dict[tuple, set] = {}
    for joint, t in m.transitions[s].items():
        groups.setdefault(tuple(joint[i] for i in coalition), set()).add(t)
    return [frozenset(v) for _, v in sorted(groups.items())]


def controllable_pre(m: Icgs, coalition: Iterable[int], target: Iterable[int]) -> frozenset:
    """States where the coalition has a profile forcing the next state into
    ``target`` whatever the other agents do."""
    coalition = sorted(set(coalition))
    target = frozenset(target)
    return frozenset(s for s in range(m.n_states)
                     if any(outs <= target for outs in _profile_successors(m, coalition, s)))


def uncontrollable_pre(m: Icgs, coalition: Iterable[int], target: Iterable[int]) -> frozenset:
    """States where every coalition profile admits a completion into
    ``target`` (the dual predecessor)."""
    coalition = sorted(set(coalition))
    target = frozenset(target)
    return frozenset(s for s in range(m.n_states)
                     if all(outs & target for outs in _profile_successors(m, coalition, s)))


class _Arena:
    """Explicit game graph: ``moves[p]`` lists, per coalition profile, the
    positions the opponents can push ``p`` to."""

    def __init__(self, moves: list[list[tuple[int, ...]]]):
        self.moves = moves
        self.n = len(moves)

    def pre(self, target: set, existential: bool) -> set:
        out = set()
        for p, profiles in enumerate(self.moves):
            if existential:
                ok = any(all(x in target for x in outs) for outs in profiles)
            else:
                ok = all(any(x in target for x in outs) for outs in profiles)
            if ok:
                out.add(p)
        return out

    def least(self, base: set, guard: set, existential: bool) -> set:
        """Least ``Z`` with ``Z = base | (guard & pre(Z))``."""
        z = set(base)
        while True:
            new = z | (guard & self.pre(z, existential))
            if new == z:
                return z
            z = new

    def greatest(self, base: set, escape: set, existential: bool) -> set:
        """Greatest ``Z`` with ``Z = base & (escape | pre(Z))``."""
        z = set(base)
        while True:
            new = base & (escape | self.pre(z, existential))
            if new == z:
                return z
            z = new


def _state_arena(m: Icgs, coalition: Sequence[int]) -> _Arena:
    return _Arena([[tuple(sorted(outs)) for outs in _profile_successors(m, coalition, s)]
                   for s in range(m.n_states)])


def check_atl_fragment(m: Icgs, existential: bool, coalition: Iterable[int],
                       psi: fm.Formula) -> frozenset:
    """Satisfaction set of ``<<C>> psi`` (``existential``) or ``[[C]] psi``
    for a next/until/release body over boolean arguments."""
    g = fm.to_nnf(psi)
    if classify_path_formula(g) is not PathClass.ATL_FRAGMENT:
        raise UnsupportedFormula(f"not a next/until/release body: {psi}")
    coalition = sorted(set(coalition))
    if is_boolean(g):
        return eval_boolean(m, g)
    arena = _state_arena(m, coalition)
    if isinstance(g, fm.Next):
        return frozenset(arena.pre(set(eval_boolean(m, g.arg)), existential))
    if isinstance(g, fm.Finally):
        left, right, until = fm.TRUE, g.arg, True
    elif isinstance(g, fm.Globally):
        left, right, until = fm.FALSE, g.arg, False
    else:
        left, right, until = g.left, g.right, isinstance(g, fm.Until)
    a, b = set(eval_boolean(m, left)), set(eval_boolean(m, right))
    if until:
        return frozenset(arena.least(b, a, existential))
    return frozenset(arena.greatest(b, a, existential))


# ---------------------------------------------------------------------------
# deterministic automata for co-safety objectives

Dnf = frozenset  # frozenset of frozensets of obligations

ACCEPT: Dnf = frozenset([frozenset()])
TRAP: Dnf = frozenset()


def _minimize(dnf: set) -> Dnf:
    if frozenset() in dnf:
        return ACCEPT
    keep = [c for c in dnf if not any(o < c for o in dnf)]
    return frozenset(keep)


@dataclass(eq=False)
class ObjectiveAutomaton:
    """Deterministic automaton built lazily by subset construction over
    the expansion covers of a co-safety formula.

    ``kind == "reach"``: a word is accepted once ``ACCEPT`` is visited.
    ``kind == "safe"``: ``formula`` is the negated objective and a word is
    accepted iff ``ACCEPT`` is never visited.
    """
    formula: fm.Formula
    kind: str
    alphabet: frozenset = field(init=False)
    initial: Dnf = field(init=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.alphabet = literal_atoms(self.formula)
        self.initial = frozenset([frozenset([self.formula])])

    def step(self, q: Dnf, label: Iterable[str]) -> Dnf:
        letter = self.alphabet & frozenset(label)
        key = (q, letter)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if q == ACCEPT or q == TRAP:
            out = q
        else:
            nxt = set()
            for conj in q:
                for c in covers_of_set(conj):
                    if c.allows(letter):
                        nxt.add(c.nxt)
            out = _minimize(nxt)
        self._cache[key] = out
        return out

    def is_accepting(self, q: Dnf) -> bool:
        return q == ACCEPT

    def states(self, letters: Iterable[Iterable[str]] | None = None) -> list[Dnf]:
        """States reachable from ``initial``; by default over every subset
        of the alphabet (small alphabets only)."""
        if letters is None:
            atoms = sorted(self.alphabet)
            letters = [frozenset(c) for r in range(len(atoms) + 1)
                       for c in itertools.combinations(atoms, r)]
        letters = [frozenset(l) for l in letters]
        seen, todo = [self.initial], [self.initial]
        while todo:
            q = todo.pop()
            for l in letters:
                r = self.step(q, l)
                if r not in seen:
                    seen.append(r)
                    todo.append(r)
        return seen

    def accepts_lasso(self, prefix: Sequence[Iterable[str]], cycle: Sequence[Iterable[str]]) -> bool:
        """Language membership of the word ``prefix cycle^omega``."""
        q = self.initial
        hit = False
        for l in prefix:
            q = self.step(q, l)
            hit = hit or q == ACCEPT
        seen = set()
        while True:
            for l in cycle:
                q = self.step(q, l)
                hit = hit or q == ACCEPT
            if q in seen:
                break
            seen.add(q)
        return hit if self.kind == "reach" else not hit


def ltl_to_dfa(psi: fm.Formula, kind: PathClass | str | None = None) -> ObjectiveAutomaton:
    """Deterministic reach (co-safety) or safe (safety) automaton for ``psi``.

    Without ``kind`` the co-safety reading is preferred when both apply.
    """
    g = fm.to_nnf(psi)
    co = not any(isinstance(h, fm.QUANTIFIERS) for h in fm.walk(g)) and \
        _uses_only(g, _LITERAL_OPS + (fm.Next, fm.Finally, fm.Until))
    safe = not any(isinstance(h, fm.QUANTIFIERS) for h in fm.walk(g)) and \
        _uses_only(g, _LITERAL_OPS + (fm.Next, fm.Globally, fm.Release))
    if kind is None:
        kind = PathClass.CO_SAFETY if co else PathClass.SAFETY
    kind = PathClass(kind)
    if kind is PathClass.CO_SAFETY and co:
        return ObjectiveAutomaton(g, "reach")
    if kind is PathClass.SAFETY and safe:
        return ObjectiveAutomaton(fm.negate(g), "safe")
    raise UnsupportedFormula(f"{psi} is not a {kind.value} formula")


# ---------------------------------------------------------------------------
# product games

def _product_arena(m: Icgs, coalition: Sequence[int], dfa: ObjectiveAutomaton):
    """Positions ``(s, q)`` where ``q`` has already read ``V(s)``."""
    index: dict[tuple, int] = {}
    positions: list[tuple] = []
    moves: list[list[tuple[int, ...]]] = []

    def intern(s, q):
        key = (s, q)
        k = index.get(key)
        if k is None:
            k = index[key] = len(positions)
            positions.append(key)
            todo.append(k)
        return k

    todo: list[int] = []
    starts = [intern(s, dfa.step(dfa.initial, m.labels[s])) for s in range(m.n_states)]
    profiles = [_profile_successors(m, coalition, s) for s in range(m.n_states)]
    while todo:
        k = todo.pop()
        while len(moves) <= k:
            moves.append([])
        s, q = positions[k]
        row = []
        for outs in profiles[s]:
            row.append(tuple(sorted(intern(t, dfa.step(q, m.labels[t])) for t in outs)))
        moves[k] = row
    while len(moves) < len(positions):
        moves.append([])
    return _Arena(moves), positions, starts


def solve_objective(m: Icgs, existential: bool, coalition: Iterable[int],
                    dfa: ObjectiveAutomaton) -> frozenset:
    coalition = sorted(set(coalition))
    arena, positions, starts = _product_arena(m, coalition, dfa)
    accepting = {k for k, (_, q) in enumerate(positions) if q == ACCEPT}
    everything = set(range(arena.n))
    if dfa.kind == "reach":
        win = arena.least(accepting, everything, existential)
    else:
        win = arena.greatest(everything - accepting, set(), existential)
    return frozenset(s for s, k in enumerate(starts) if k in win)


def check_strategic(m: Icgs, f: fm.Formula) -> frozenset:
    """Satisfaction set of a formula with exactly one strategic operator,
    the coalition having perfect information in ``m``."""
    if not isinstance(f, fm.STRATEGIC):
        raise UnsupportedFormula(f"expected a strategic formula, got {f}")
    if any(isinstance(g, fm.QUANTIFIERS) for g in fm.walk(f.body)):
        raise UnsupportedFormula(f"nested quantifier in {f}")
    coalition = sorted(m.agent_set(f.coalition))
    if not m.has_perfect_information(coalition):
        names = [m.agents[i] for i in coalition if len(m.indist[i]) != m.n_states]
        raise ImperfectInformationError(
            f"agents {names} confuse distinct states; perfect information required")
    existential = isinstance(f, fm.Strategic)
    body = fm.to_nnf(f.body)
    cls = classify_path_formula(body)
    if cls is PathClass.ATL_FRAGMENT:
        return check_atl_fragment(m, existential, coalition, body)
    if cls is PathClass.UNSUPPORTED:
        raise UnsupportedFormula(f"path formula outside the supported fragments: {f.body}")
    return solve_objective(m, existential, coalition, ltl_to_dfa(body, cls))
