"""Preprocessing and enumeration of perfect-information sub-models."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from typing import Iterable, Iterator

from . import formula as fm
from .errors import InitialStateRemoved
from .model import Icgs, first_conflict

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class PreprocessedProblem:
    """A negation-free NNF formula and the model extended with one
    complement atom per negated atom."""
    model: Icgs
    formula: fm.Formula
    atom_map: dict


def _fresh(name: str, taken: set) -> str:
    while name in taken:
        name += "_"
    return name


def preprocess(m: Icgs, f: fm.Formula) -> PreprocessedProblem:
    """Push negations to atoms, then replace each ``!p`` by a new atom
    ``np`` that holds exactly where ``p`` does not."""
    g = fm.to_nnf(f)
    taken = set(m.atoms) | set(fm.atoms_of(g))
    atom_map, extra = {}, {}
    for p in fm.extract_negated_atoms(g):
        np = _fresh("n" + p, taken)
        taken.add(np)
        atom_map[p] = np
        g = fm.replace_negated_atom(g, p, np)
        extra[np] = [s for s in range(m.n_states) if p not in m.labels[s]]
    return PreprocessedProblem(m.relabel(extra) if extra else m, g, atom_map)


@dataclass(frozen=True, eq=False)
class SubModel:
    """Restriction of ``base`` to ``core`` plus one sink state.

    The sink is the last state of ``model``.  ``to_base[k]`` is the base
    index of sub-model state ``k`` (``None`` for the sink).
    """
    model: Icgs
    base: Icgs
    core: frozenset
    kind: str
    to_base: tuple

    @property
    def sink(self) -> int:
        return self.model.n_states - 1

    def from_base(self, s: int) -> int | None:
        try:
            return self.to_base.index(s)
        except ValueError:
            return None

    def core_states(self) -> range:
        return range(self.model.n_states - 1)

    def with_model(self, model: Icgs) -> "SubModel":
        return SubModel(model, self.base, self.core, self.kind, self.to_base)


def _restrict(m: Icgs, core: Iterable[int], kind: str) -> SubModel:
    core = frozenset(core)
    if m.initial not in core:
        raise InitialStateRemoved(
            f"core must contain the initial state {m.states[m.initial]!r}")
    order = sorted(core)
    sink = len(order)
    index = {s: k for k, s in enumerate(order)}
    sink_name = _fresh("s_bot" if kind == "negative" else "s_top", set(m.states))

    everything = [frozenset(range(len(acts))) for acts in m.actions]
    protocol = tuple(tuple(m.protocol[i][s] for s in order) + (everything[i],)
                     for i in range(m.n_agents))
    transitions = [{j: index.get(t, sink) for j, t in m.transitions[s].items()}
                   for s in order]
    transitions.append({j: sink for j in itertools.product(*(sorted(e) for e in everything))})

    sink_label = frozenset() if kind == "negative" else frozenset(m.atoms)
    labels = tuple(m.labels[s] for s in order) + (sink_label,)
    indist = []
    for part in m.indist:
        classes = [frozenset(index[s] for s in cls if s in index) for cls in part]
        indist.append(tuple(c for c in classes if c) + (frozenset([sink]),))
    model = Icgs(m.agents, m.actions, tuple(m.states[s] for s in order) + (sink_name,),
                 m.atoms, index[m.initial], protocol, tuple(transitions), labels,
                 tuple(indist))
    return SubModel(model, m, core, kind, tuple(order) + (None,))


def generate_negative(m: Icgs, core: Iterable[int]) -> SubModel:
    """Sub-model whose removed transitions fall into an unlabelled sink."""
    return _restrict(m, core, "negative")


def generate_positive(m: Icgs, core: Iterable[int]) -> SubModel:
    """Sub-model whose removed transitions fall into a sink labelled with
    every atom."""
    return _restrict(m, core, "positive")


@dataclass(frozen=True, eq=False)
class CandidatePair:
    index: int
    core: frozenset
    neg: SubModel
    pos: SubModel
    last_split: tuple | None = None  # (removed state, kept partner)

    def core_names(self) -> list[str]:
        base = self.neg.base
        return [base.states[s] for s in sorted(self.core)]


def iter_cores(m: Icgs, agents: Iterable[int]) -> Iterator[tuple[frozenset, tuple | None]]:
    """Conflict-free cores in discovery order, each with the split that
    produced it.

    Depth-first: for the least conflicting pair ``(s, t)`` the branch
    without ``s`` is explored before the branch without ``t``.
    """
    agents = sorted(set(agents))
    start = frozenset(range(m.n_states))
    stack: list[tuple[frozenset, tuple | None]] = [(start, None)]
    visited: set[frozenset] = set()
    while stack:
        core, split = stack.pop()
        if core in visited:
            continue
        visited.add(core)
        conflict = first_conflict(m, agents, core)
        if conflict is None:
            yield core, split
            continue
        s, t, _ = conflict
        branches = []
        for drop, keep in ((s, t), (t, s)):
            if drop == m.initial:
                log.info("dropping %s would remove the initial state; branch pruned",
                         m.states[drop])
                continue
            branches.append((core - {drop}, (drop, keep)))
        stack.extend(reversed(branches))


def iter_submodels(m: Icgs, f: fm.Formula) -> Iterator[CandidatePair]:
    agents = [m.agent_index(a) for a in fm.coalition_agents(f)]
    for k, (core, split) in enumerate(iter_cores(m, agents)):
        yield CandidatePair(k, core, generate_negative(m, core), generate_positive(m, core), split)


def find_submodels(m: Icgs, f: fm.Formula) -> list[CandidatePair]:
    """All candidate pairs for the agents named in ``f``'s coalitions."""
    return list(iter_submodels(m, f))
