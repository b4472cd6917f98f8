"""Concurrent game structures with imperfect information (iCGS).

States, agents and actions are addressed by dense integer indices in file
order; names are kept for display and serialization.  A joint action is a
tuple of per-agent action indices in agent order.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import (
    ProtocolError,
    SchemaError,
    TransitionError,
    UnknownNameError,
)

JointAction = tuple  # tuple[int, ...], one action index per agent


def _partition_from_pairs(n: int, pairs: Iterable[tuple[int, int]]) -> tuple[frozenset, ...]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in pairs:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    classes: dict[int, list[int]] = {}
    for s in range(n):
        classes.setdefault(find(s), []).append(s)
    return tuple(frozenset(c) for _, c in sorted(classes.items()))


@dataclass(frozen=True, eq=False)
class Icgs:
    """An immutable iCGS.

    ``protocol[i][s]`` is the set of action indices agent ``i`` may play in
    state ``s``; ``transitions[s]`` maps every enabled joint action of ``s``
    to its successor; ``indist[i]`` is agent ``i``'s partition of the states.
    """

    agents: tuple[str, ...]
    actions: tuple[tuple[str, ...], ...]
    states: tuple[str, ...]
    atoms: tuple[str, ...]
    initial: int
    protocol: tuple[tuple[frozenset, ...], ...]
    transitions: tuple[Mapping[JointAction, int], ...]
    labels: tuple[frozenset, ...]
    indist: tuple[tuple[frozenset, ...], ...]

    # -- lookups ---------------------------------------------------------
    @cached_property
    def _state_index(self):
        return {name: i for i, name in enumerate(self.states)}

    @cached_property
    def _agent_index(self):
        return {name: i for i, name in enumerate(self.agents)}

    def state_index(self, name: str) -> int:
        try:
            return self._state_index[name]
        except KeyError:
            raise UnknownNameError(f"unknown state {name!r}") from None

    def agent_index(self, name: str) -> int:
        try:
            return self._agent_index[name]
        except KeyError:
            raise UnknownNameError(f"unknown agent {name!r}") from None

    def action_index(self, agent: int, name: str) -> int:
        try:
            return self.actions[agent].index(name)
        except ValueError:
            raise UnknownNameError(
                f"unknown action {name!r} for agent {self.agents[agent]!r}") from None

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_agents(self) -> int:
        return len(self.agents)

    def agent_set(self, names: Iterable[str]) -> frozenset:
        return frozenset(self.agent_index(n) for n in names)

    # -- structure -------------------------------------------------------
    def enabled(self, s: int) -> list[JointAction]:
        """Joint actions enabled at ``s``, in lexicographic index order."""
        return list(itertools.product(*(sorted(self.protocol[i][s])
                                         for i in range(self.n_agents))))

    def delta(self, s: int, joint: JointAction) -> int:
        try:
            return self.transitions[s][tuple(joint)]
        except KeyError:
            raise TransitionError(
                f"joint action {joint} not enabled at {self.states[s]!r}") from None

    @cached_property
    def successors(self) -> tuple[tuple[int, ...], ...]:
        """Distinct successors of each state, sorted."""
        return tuple(tuple(sorted(set(self.transitions[s].values())))
                     for s in range(self.n_states))

    @cached_property
    def class_of(self) -> tuple[tuple[int, ...], ...]:
        """``class_of[i][s]`` is the index of ``s``'s class in ``indist[i]``."""
        out = []
        for part in self.indist:
            row = [0] * self.n_states
            for k, cls in enumerate(part):
                for s in cls:
                    row[s] = k
            out.append(tuple(row))
        return tuple(out)

    def indistinguishable(self, agent: int, s: int, t: int) -> bool:
        return self.class_of[agent][s] == self.class_of[agent][t]

    def has_perfect_information(self, agents: Iterable[int] | None = None) -> bool:
        agents = range(self.n_agents) if agents is None else agents
        return all(len(self.indist[i]) == self.n_states for i in agents)

    def states_with(self, atom: str) -> frozenset:
        return frozenset(s for s in range(self.n_states) if atom in self.labels[s])

    # -- derived models ----------------------------------------------------
    def relabel(self, extra: Mapping[str, Iterable[int]]) -> "Icgs":
        """Copy with fresh atoms added; ``extra[atom]`` lists the states
        that carry it."""
        labels = [set(l) for l in self.labels]
        atoms = list(self.atoms)
        for atom, where in extra.items():
            if atom not in atoms:
                atoms.append(atom)
            for s in where:
                labels[s].add(atom)
        return Icgs(self.agents, self.actions, self.states, tuple(atoms), self.initial,
                    self.protocol, self.transitions,
                    tuple(frozenset(l) for l in labels), self.indist)

    def with_perfect_information(self) -> "Icgs":
        ident = tuple(tuple(frozenset([s]) for s in range(self.n_states))
                      for _ in self.agents)
        return Icgs(self.agents, self.actions, self.states, self.atoms, self.initial,
                    self.protocol, self.transitions, self.labels, ident)

    # -- validation --------------------------------------------------------
    def validate(self) -> "Icgs":
        """Check every structural invariant; return ``self``."""
        n, m = self.n_states, self.n_agents
        if m == 0 or n == 0:
            raise SchemaError("a model needs at least one agent and one state")
        if not 0 <= self.initial < n:
            raise SchemaError("initial state out of range")
        for i in range(m):
            if not self.actions[i]:
                raise SchemaError(f"agent {self.agents[i]!r} has no actions")
            for s in range(n):
                d = self.protocol[i][s]
                if not d:
                    raise ProtocolError(
                        f"empty protocol for agent {self.agents[i]!r} in state {self.states[s]!r}")
                if not d <= set(range(len(self.actions[i]))):
                    raise ProtocolError(f"protocol of {self.agents[i]!r} uses unknown actions")
            covered = sorted(s for cls in self.indist[i] for s in cls)
            if covered != list(range(n)):
                raise SchemaError(f"indistinguishability of {self.agents[i]!r} "
                                  "is not a partition of the states")
            for cls in self.indist[i]:
                ref = min(cls)
                for s in cls:
                    if self.protocol[i][s] != self.protocol[i][ref]:
                        raise ProtocolError(
                            f"protocol of {self.agents[i]!r} differs between "
                            f"indistinguishable states {self.states[ref]!r} and {self.states[s]!r}")
        for s in range(n):
            enabled = set(self.enabled(s))
            defined = set(self.transitions[s])
            if defined - enabled:
                bad = sorted(defined - enabled)[0]
                raise TransitionError(
                    f"transition from {self.states[s]!r} on disabled joint action "
                    f"{self.joint_names(bad)}")
            if enabled - defined:
                bad = sorted(enabled - defined)[0]
                raise TransitionError(
                    f"no transition from {self.states[s]!r} on enabled joint action "
                    f"{self.joint_names(bad)}")
            for t in self.transitions[s].values():
                if not 0 <= t < n:
                    raise TransitionError(f"transition from {self.states[s]!r} leaves the model")
            if not self.labels[s] <= set(self.atoms):
                raise UnknownNameError(f"state {self.states[s]!r} carries undeclared atoms")
        return self

    def joint_names(self, joint: JointAction) -> list[str]:
        return [self.actions[i][a] for i, a in enumerate(joint)]

    # -- serialization -----------------------------------------------------
    def to_dict(self) -> dict:
        doc = {
            "agents": [{"name": a, "actions": list(acts)}
                       for a, acts in zip(self.agents, self.actions)],
            "atoms": list(self.atoms),
            "states": [{"name": name, "labels": [p for p in self.atoms if p in self.labels[s]]}
                       for s, name in enumerate(self.states)],
            "initial": self.states[self.initial],
            "protocol": [{"agent": self.agents[i], "state": self.states[s],
                          "actions": [self.actions[i][a] for a in sorted(self.protocol[i][s])]}
                         for s in range(self.n_states) for i in range(self.n_agents)],
            "transitions": [{"from": self.states[s], "action": self.joint_names(j),
                             "to": self.states[t]}
                            for s in range(self.n_states)
                            for j, t in sorted(self.transitions[s].items())],
            "indistinguishable": [{"agent": self.agents[i],
                                   "states": [self.states[a], self.states[b]]}
                                  for i in range(self.n_agents)
                                  for cls in self.indist[i]
                                  for a, b in itertools.combinations(sorted(cls), 2)],
        }
        return doc

    def to_json(self, indent: int | None = 1) -> str:
        return json.dumps(self.to_dict(), indent=indent)



def _require(doc: Mapping, key: str, kind: type):
    if key not in doc:
        raise SchemaError(f"missing field {key!r}")
    value = doc[key]
    if not isinstance(value, kind):
        raise SchemaError(f"field {key!r} must be a {kind.__name__}")
    return value


def _unique(names: Sequence[str], what: str):
    seen = set()
    for name in names:
        if not isinstance(name, str) or not name:
            raise SchemaError(f"{what} names must be non-empty strings")
        if name in seen:
            raise SchemaError(f"duplicate {what} {name!r}")
        seen.add(name)


def from_dict(doc: Mapping) -> Icgs:
    """Build and validate an :class:`Icgs` from a parsed JSON document."""
    if not isinstance(doc, Mapping):
        raise SchemaError("model document must be a JSON object")
    agents_doc = _require(doc, "agents", list)
    states_doc = _require(doc, "states", list)
    initial_name = _require(doc, "initial", str)
    protocol_doc = _require(doc, "protocol", list)
    transitions_doc = _require(doc, "transitions", list)
    indist_doc = doc.get("indistinguishable", [])
    if not isinstance(indist_doc, list):
        raise SchemaError("field 'indistinguishable' must be a list")

    agents, actions = [], []
    for entry in agents_doc:
        name = _require(entry, "name", str)
        acts = _require(entry, "actions", list)
        _unique(acts, f"action of agent {name!r}")
        if not acts:
            raise SchemaError(f"agent {name!r} has no actions")
        agents.append(name)
        actions.append(tuple(acts))
    _unique(agents, "agent")
    if not agents:
        raise SchemaError("a model needs at least one agent")

    states, raw_labels = [], []
    for entry in states_doc:
        states.append(_require(entry, "name", str))
        raw_labels.append(_require(entry, "labels", list))
    _unique(states, "state")
    if not states:
        raise SchemaError("a model needs at least one state")
    state_ix = {n: i for i, n in enumerate(states)}
    agent_ix = {n: i for i, n in enumerate(agents)}

    def sidx(name):
        if name not in state_ix:
            raise UnknownNameError(f"unknown state {name!r}")
        return state_ix[name]

    def aidx(name):
        if name not in agent_ix:
            raise UnknownNameError(f"unknown agent {name!r}")
        return agent_ix[name]

    if "atoms" in doc:
        atoms = list(_require(doc, "atoms", list))
        _unique(atoms, "atom")
        for labs in raw_labels:
            for p in labs:
                if p not in atoms:
                    raise UnknownNameError(f"undeclared atom {p!r}")
    else:
        atoms = []
        for labs in raw_labels:
            for p in labs:
                if p not in atoms:
                    atoms.append(p)
    labels = tuple(frozenset(l) for l in raw_labels)

    n, m = len(states), len(agents)
    proto: list[list[frozenset | None]] = [[None] * n for _ in range(m)]
    for entry in protocol_doc:
        i = aidx(_require(entry, "agent", str))
        s = sidx(_require(entry, "state", str))
        names = _require(entry, "actions", list)
        if proto[i][s] is not None:
            raise SchemaError(f"duplicate protocol entry for ({agents[i]!r}, {states[s]!r})")
        ix = set()
        for a in names:
            if a not in actions[i]:
                raise UnknownNameError(f"unknown action {a!r} for agent {agents[i]!r}")
            ix.add(actions[i].index(a))
        proto[i][s] = frozenset(ix)
    for i in range(m):
        for s in range(n):
            if not proto[i][s]:
                raise ProtocolError(
                    f"empty protocol for agent {agents[i]!r} in state {states[s]!r}")
    protocol = tuple(tuple(row) for row in proto)

    trans: list[dict] = [dict() for _ in range(n)]
    for entry in transitions_doc:
        s = sidx(_require(entry, "from", str))
        t = sidx(_require(entry, "to", str))
        names = _require(entry, "action", list)
        if len(names) != m:
            raise SchemaError(f"joint action {names} must name one action per agent")
        joint = []
        for i, a in enumerate(names):
            if a not in actions[i]:
                raise UnknownNameError(f"unknown action {a!r} for agent {agents[i]!r}")
            joint.append(actions[i].index(a))
        joint = tuple(joint)
        if joint in trans[s]:
            raise TransitionError(f"duplicate transition from {states[s]!r} on {names}")
        trans[s][joint] = t

    pairs: list[list[tuple[int, int]]] = [[] for _ in range(m)]
    for entry in indist_doc:
        i = aidx(_require(entry, "agent", str))
        pair = _require(entry, "states", list)
        if len(pair) != 2:
            raise SchemaError("indistinguishability entries relate exactly two states")
        pairs[i].append((sidx(pair[0]), sidx(pair[1])))
    indist = tuple(_partition_from_pairs(n, p) for p in pairs)

    model = Icgs(tuple(agents), tuple(actions), tuple(states), tuple(atoms),
                 sidx(initial_name), protocol, tuple(trans), labels, indist)
    return model.validate()


def load_model(document: str | bytes | Mapping) -> Icgs:
    """Parse a JSON model document (text or already-decoded object)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"invalid JSON: {exc}") from None
    return from_dict(document)


def read_model(path) -> Icgs:
    with open(path, encoding="utf-8") as fh:
        return load_model(fh.read())


def enabled_joint_actions(m: Icgs, s: int) -> list[JointAction]:
    """Cartesian product of the agents' protocol sets at ``s``."""
    return m.enabled(s)


def indist_pairs(m: Icgs, agents: Iterable[int]) -> list[tuple[int, int]]:
    """Unordered pairs ``(s, t)``, ``s < t``, indistinguishable for some
    agent in ``agents``; sorted by state indices."""
    agents = sorted(set(agents))
    out = []
    for s in range(m.n_states):
        for t in range(s + 1, m.n_states):
            if any(m.class_of[i][s] == m.class_of[i][t] for i in agents):
                out.append((s, t))
    return out


def first_conflict(m: Icgs, agents: Sequence[int], core: Iterable[int]):
    """Least ``(s, t, agent)`` with ``s < t`` in ``core`` and ``s ~agent t``,
    or ``None``."""
    core = sorted(core)
    for x, s in enumerate(core):
        for t in core[x + 1:]:
            for i in agents:
                if m.class_of[i][s] == m.class_of[i][t]:
                    return s, t, i
    return None


def build(agents: Mapping[str, Sequence[str]], states: Mapping[str, Iterable[str]],
          initial: str, protocol: Mapping[tuple[str, str], Iterable[str]],
          transitions: Mapping[tuple[str, tuple[str, ...]], str],
          indistinguishable: Iterable[tuple[str, str, str]] = (),
          atoms: Sequence[str] | None = None) -> Icgs:
    """Convenience constructor from plain Python mappings (names only)."""
    doc = {
        "agents": [{"name": a, "actions": list(acts)} for a, acts in agents.items()],
        "states": [{"name": s, "labels": list(l)} for s, l in states.items()],
        "initial": initial,
        "protocol": [{"agent": a, "state": s, "actions": list(acts)}
                     for (a, s), acts in protocol.items()],
        "transitions": [{"from": s, "action": list(j), "to": t}
                        for (s, j), t in transitions.items()],
        "indistinguishable": [{"agent": a, "states": [s, t]} for a, s, t in indistinguishable],
    }
    if atoms is not None:
        doc["atoms"] = list(atoms)
    return from_dict(doc)
