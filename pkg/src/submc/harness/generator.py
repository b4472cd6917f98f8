"""Seeded random iCGS generation."""
from __future__ import annotations

import itertools
import random
from dataclasses import asdict, dataclass, replace

from ..model import Icgs, _partition_from_pairs


@dataclass(frozen=True)
class GeneratorConfig:
    """Knobs for :func:`random_icgs`.

    ``pi_percent`` is the share of unordered state pairs each agent
    confuses (closed transitively): 0 gives perfect information, 100 makes
    every state indistinguishable from every other for every agent.
    ``layered_fraction`` of the models use a mission-like layered topology
    instead of uniformly random successors.
    """
    states: int = 6
    agents: int = 2
    actions_per_agent: int = 2
    protocol_density: float = 0.7
    atom_count: int = 3
    label_density: float = 0.4
    pi_percent: float = 0.0
    seed: int | str = 0
    layered_fraction: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)


PRESETS = {
    "small": GeneratorConfig(),
    "experiment": GeneratorConfig(states=6, agents=2, actions_per_agent=2, atom_count=3,
                                  label_density=0.4, layered_fraction=0.3),
    # a larger mission-shaped model; several hundred states, a handful of agents
    "rover-large": GeneratorConfig(states=300, agents=4, actions_per_agent=3,
                                   atom_count=8, label_density=0.2, pi_percent=0.02,
                                   layered_fraction=1.0),
}


def _indistinguishability(rng: random.Random, n: int, pi: float) -> tuple[frozenset, ...]:
    pairs = list(itertools.combinations(range(n), 2))
    k = round(len(pairs) * pi / 100)
    chosen = rng.sample(pairs, k) if k < len(pairs) else pairs
    return _partition_from_pairs(n, chosen)


def _successor(rng: random.Random, s: int, n: int, layered: bool, width: int) -> int:
    if not layered:
        return rng.randrange(n)
    layer = s // width
    last = (n - 1) // width
    roll = rng.random()
    if roll < 0.6 and layer < last:
        lo, hi = (layer + 1) * width, min(n, (layer + 2) * width)
    elif roll < 0.8 or layer == 0:
        lo, hi = layer * width, min(n, (layer + 1) * width)
    elif roll < 0.9:
        lo, hi = 0, min(n, width)
    else:
        lo, hi = (layer - 1) * width, layer * width
    return rng.randrange(lo, hi)


def random_icgs(cfg: GeneratorConfig) -> Icgs:
    """A valid random iCGS, fully determined by ``cfg`` (including its
    seed)."""
    if min(cfg.states, cfg.agents, cfg.actions_per_agent) < 1:
        raise ValueError("states, agents and actions_per_agent must be at least 1")
    rng = random.Random(f"icgs:{cfg.seed}")
    n, m = cfg.states, cfg.agents
    layered = rng.random() < cfg.layered_fraction
    width = max(1, round(n ** 0.5))

    agents = tuple(f"ag{i}" for i in range(m))
    actions = tuple(tuple(f"a{j}" for j in range(cfg.actions_per_agent)) for _ in range(m))
    states = tuple(f"s{k}" for k in range(n))
    atoms = tuple(f"p{k}" for k in range(cfg.atom_count))

    indist = tuple(_indistinguishability(rng, n, cfg.pi_percent) for _ in range(m))
    protocol = []
    for i in range(m):
        row = [frozenset()] * n
        for cls in indist[i]:
            acts = frozenset(a for a in range(cfg.actions_per_agent)
                             if rng.random() < cfg.protocol_density)
            if not acts:
                acts = frozenset([rng.randrange(cfg.actions_per_agent)])
            for s in cls:
                row[s] = acts
        protocol.append(tuple(row))
    protocol = tuple(protocol)

    transitions = []
    for s in range(n):
        options = [sorted(protocol[i][s]) for i in range(m)]
        transitions.append({j: _successor(rng, s, n, layered, width)
                            for j in itertools.product(*options)})
    labels = tuple(frozenset(p for p in atoms if rng.random() < cfg.label_density)
                   for _ in range(n))
    return Icgs(agents, actions, states, atoms, 0, protocol, tuple(transitions),
                labels, indist).validate()


def config_for(base: GeneratorConfig, seed, pi_percent: float | None = None, **changes) -> GeneratorConfig:
    if pi_percent is not None:
        changes["pi_percent"] = pi_percent
    return replace(base, seed=seed, **changes)
