"""CTL* model checking via LTL-to-Büchi translation and product emptiness.

Paths range over all enabled joint actions; indistinguishability plays no
role here.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import formula as fm
from .errors import UnsupportedFormula
from .model import Icgs
from .tableau import covers_of_set, eventualities, literal_atoms


@dataclass(eq=False)
class BuchiAutomaton:
    """Büchi automaton over atom-set letters, built on demand.

    States are ``(obligations, level)``.  The tableau has transition-based
    generalized acceptance, one set per eventuality (transitions that do
    not postpone it); the ``level`` counter degeneralizes it, and states
    at the top level are accepting.
    """
    formula: fm.Formula
    alphabet: frozenset = field(init=False)
    goals: tuple = field(init=False)
    initial: tuple = field(init=False)
    _cache: dict = field(default_factory=dict, init=False, repr=False)

    def __post_init__(self):
        self.alphabet = literal_atoms(self.formula)
        self.goals = tuple(eventualities(self.formula))
        self.initial = (frozenset([self.formula]), 0)

    @property
    def top(self) -> int:
        return len(self.goals)

    def is_accepting(self, q: tuple) -> bool:
        return q[1] == self.top

    def step(self, q: tuple, label: Iterable[str]) -> tuple:
        """Successor states after reading ``label`` in state ``q``."""
        letter = self.alphabet & frozenset(label)
        key = (q, letter)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        obligations, level = q
        out = []
        for c in covers_of_set(obligations):
            if not c.allows(letter):
                continue
            j = 0 if level == self.top else level
            while j < self.top and self.goals[j] not in c.postponed:
                j += 1
            r = (c.nxt, j)
            if r not in out:
                out.append(r)
        out = tuple(out)
        self._cache[key] = out
        return out

    def states(self, letters: Iterable[Iterable[str]] | None = None) -> list[tuple]:
        if letters is None:
            atoms = sorted(self.alphabet)
            letters = [frozenset(c) for r in range(len(atoms) + 1)
                       for c in itertools.combinations(atoms, r)]
        letters = [frozenset(l) for l in letters]
        seen, todo = {self.initial}, [self.initial]
        order = [self.initial]
        while todo:
            q = todo.pop()
            for l in letters:
                for r in self.step(q, l):
                    if r not in seen:
                        seen.add(r)
                        order.append(r)
                        todo.append(r)
        return order


def ltl_to_nba(psi: fm.Formula) -> BuchiAutomaton:
    """Büchi automaton accepting exactly the words satisfying ``psi``."""
    g = fm.to_nnf(psi)
    if any(isinstance(h, fm.QUANTIFIERS) for h in fm.walk(g)):
        raise UnsupportedFormula(f"quantifier inside a path formula: {psi}")
    return BuchiAutomaton(g)


# ---------------------------------------------------------------------------
# product emptiness

def _sccs(succ: Sequence[Sequence[int]]) -> list[list[int]]:
    """Tarjan's algorithm, iterative."""
    n = len(succ)
    index = [-1] * n
    low = [0] * n
    on = [False] * n
    stack: list[int] = []
    out: list[list[int]] = []
    counter = 0
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, 0)]
        while work:
            v, i = work.pop()
            if i == 0:
                index[v] = low[v] = counter
                counter += 1
                stack.append(v)
                on[v] = True
            recurse = False
            edges = succ[v]
            while i < len(edges):
                w = edges[i]
                i += 1
                if index[w] == -1:
                    work.append((v, i))
                    work.append((w, 0))
                    recurse = True
                    break
                if on[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            if low[v] == index[v]:
                comp = []
                while True:
                    w = stack.pop()
                    on[w] = False
                    comp.append(w)
                    if w == v:
                        break
                out.append(comp)
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
    return out


def exists_path_states(succ: Sequence[Sequence[int]], labels: Sequence[frozenset],
                        psi: fm.Formula, sources: Iterable[int] | None = None) -> frozenset:
    """States (among ``sources``) from which some path satisfies ``psi``."""
    nba = ltl_to_nba(psi)
    sources = range(len(succ)) if sources is None else list(sources)
    index: dict[tuple, int] = {}
    nodes: list[tuple] = []
    todo: list[int] = []

    def intern(s, q):
        k = index.get((s, q))
        if k is None:
            k = index[(s, q)] = len(nodes)
            nodes.append((s, q))
            todo.append(k)
        return k

    starts = {s: intern(s, nba.initial) for s in sources}
    edges: dict[int, list[int]] = {}
    while todo:
        k = todo.pop()
        s, q = nodes[k]
        row = []
        for r in nba.step(q, labels[s]):
            for t in succ[s]:
                row.append(intern(t, r))
        edges[k] = row
    graph = [edges[k] for k in range(len(nodes))]

    good = [False] * len(nodes)
    for comp in _sccs(graph):
        cyclic = len(comp) > 1 or comp[0] in graph[comp[0]]
        if cyclic and any(nba.is_accepting(nodes[k][1]) for k in comp):
            for k in comp:
                good[k] = True
    pred: list[list[int]] = [[] for _ in nodes]
    for k, row in enumerate(graph):
        for w in row:
            pred[w].append(k)
    frontier = [k for k in range(len(nodes)) if good[k]]
    while frontier:
        w = frontier.pop()
        for k in pred[w]:
            if not good[k]:
                good[k] = True
                frontier.append(k)
    return frozenset(s for s, k in starts.items() if good[k])


def exists_path(m: Icgs, s: int, psi: fm.Formula) -> bool:
    """Whether some path of ``m`` from ``s`` satisfies the LTL formula ``psi``."""
    return s in exists_path_states(m.successors, m.labels, psi, [s])


# ---------------------------------------------------------------------------
# CTL*

class _Labels:
    """Mutable labelling used while evaluating nested quantifiers."""

    def __init__(self, m: Icgs):
        self.m = m
        self.labels = [set(l) for l in m.labels]
        self.taken = set(m.atoms)
        self.counter = 0

    def fresh(self, states: Iterable[int]) -> str:
        while True:
            self.counter += 1
            name = f"_q{self.counter}"
            if name not in self.taken:
                break
        self.taken.add(name)
        for s in states:
            self.labels[s].add(name)
        return name

    def frozen(self) -> list[frozenset]:
        return [frozenset(l) for l in self.labels]


def _reduce(f: fm.Formula, lab: _Labels) -> fm.Formula:
    """Replace every maximal quantified sub-formula by a fresh atom."""
    def step(g):
        if isinstance(g, fm.QUANTIFIERS):
            return fm.Atom(lab.fresh(_sat(g, lab)))
        return None
    return fm.transform(f, step)


def _sat(f: fm.Formula, lab: _Labels) -> frozenset:
    m = lab.m
    n = m.n_states
    if isinstance(f, fm.STRATEGIC):
        raise UnsupportedFormula(f"strategic operator in a CTL* formula: {f}")
    if isinstance(f, (fm.PathA, fm.PathE)):
        body = _reduce(f.body, lab)
        labels = lab.frozen()
        if isinstance(f, fm.PathE):
            return exists_path_states(m.successors, labels, body)
        bad = exists_path_states(m.successors, labels, fm.negate(body))
        return frozenset(range(n)) - bad
    if isinstance(f, fm.Const):
        return frozenset(range(n)) if f.value else frozenset()
    if isinstance(f, fm.Atom):
        return frozenset(s for s in range(n) if f.name in lab.labels[s])
    if isinstance(f, fm.Not):
        return frozenset(range(n)) - _sat(f.arg, lab)
    if isinstance(f, fm.And):
        return _sat(f.left, lab) & _sat(f.right, lab)
    if isinstance(f, fm.Or):
        return _sat(f.left, lab) | _sat(f.right, lab)
    raise UnsupportedFormula(f"temporal operator outside a path quantifier: {f}")


def ctlstar_states(m: Icgs, f: fm.Formula) -> frozenset:
    """All states of ``m`` satisfying the CTL* state formula ``f``."""
    return _sat(f, _Labels(m))


def check_ctlstar(m: Icgs, s: int, f: fm.Formula) -> bool:
    """Whether ``m, s`` satisfies the CTL* state formula ``f``."""
    return s in ctlstar_states(m, f)
