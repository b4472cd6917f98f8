"""Conclusiveness experiment over random models.

For every imperfect-information percentage in a grid, random models are
generated, a formula is drawn from a template pool, the procedure runs,
and verdicts are tallied.  Each run is also checked against the
soundness envelope:

(a) no ⊥ when a uniform memoryless strategy witnesses a single-operator
    formula;
(b) no ⊤ when the formula fails even under perfect information (formulas
    without ``[[C]]``);
(c) the internal consistency assertion never fires.
"""
from __future__ import annotations

import csv
import io
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

from .. import formula as fm
from ..errors import InternalSoundnessError, SearchSpaceTooLarge
from ..pipeline import Verdict, model_checking_procedure
from .generator import GeneratorConfig, config_for, random_icgs
from .oracles import oracle_memoryless_uniform, perfect_information_states

DEFAULT_GRID = tuple(range(0, 101, 10))
REFERENCE_RATE = 0.8


# ---------------------------------------------------------------------------
# formula templates

def _coalition(rng: random.Random, agents: Sequence[str]) -> str:
    k = rng.randint(1, len(agents))
    return ",".join(sorted(rng.sample(list(agents), k), key=list(agents).index))


def _goal(rng: random.Random, atoms: Sequence[str]) -> str:
    if rng.random() < 0.3 and len(atoms) > 1:
        a, b = rng.sample(list(atoms), 2)
        return f"({a} | {b})"
    return rng.choice(list(atoms))


def mission(rng, agents, atoms) -> str:
    """Reach ``x``, then ``y``, then ``x`` again."""
    x, y = _goal(rng, atoms), _goal(rng, atoms)
    return f"<<{_coalition(rng, agents)}>> F ({x} & F ({y} & F {x}))"


def cooperative_mission(rng, agents, atoms) -> str:
    """Reach ``x`` from where a sub-coalition can complete a mission."""
    x, y = _goal(rng, atoms), _goal(rng, atoms)
    return (f"<<{_coalition(rng, agents)}>> F ({x} & "
            f"<<{_coalition(rng, agents)}>> F ({y} & F {x}))")


def guarded_mission(rng, agents, atoms) -> str:
    """As :func:`cooperative_mission`, with a negated guard."""
    x, y, z = (_goal(rng, atoms) for _ in range(3))
    w = rng.choice(list(atoms))
    return (f"<<{_coalition(rng, agents)}>> F ({x} & !{w} & "
            f"<<{_coalition(rng, agents)}>> F ({y} & F {z}))")


def reach(rng, agents, atoms) -> str:
    return f"<<{_coalition(rng, agents)}>> F {_goal(rng, atoms)}"


TEMPLATES: dict[str, Callable] = {
    "mission": mission,
    "cooperative": cooperative_mission,
    "guarded": guarded_mission,
    "reach": reach,
}


# ---------------------------------------------------------------------------
# runs

@dataclass(frozen=True)
class ExperimentConfig:
    grid: tuple = DEFAULT_GRID
    models_per_bucket: int = 500
    seed: int | str = 0
    generator: GeneratorConfig = GeneratorConfig(layered_fraction=0.3)
    min_states: int = 4
    max_states: int = 8
    templates: tuple = tuple(TEMPLATES)
    envelope: bool = True
    oracle_limit: int = 4096


@dataclass
class RunResult:
    pi_percent: float
    index: int
    formula: str
    verdict: str
    candidates: int
    states: int
    envelope_a: str = "n/a"   # "ok", "violated", "skipped", "n/a"
    envelope_b: str = "n/a"
    soundness_error: bool = False


def single_run(cfg: ExperimentConfig, pi: float, index: int) -> RunResult:
    rng = random.Random(f"{cfg.seed}:{pi}:{index}")
    n = rng.randint(cfg.min_states, cfg.max_states)
    model = random_icgs(config_for(cfg.generator, f"{cfg.seed}:{pi}:{index}", pi, states=n))
    template = TEMPLATES[rng.choice(list(cfg.templates))]
    text = template(rng, model.agents, model.atoms)
    f = fm.parse(text)
    try:
        report = model_checking_procedure(model, f)
    except InternalSoundnessError:
        return RunResult(pi, index, text, Verdict.UNKNOWN.value, 0, n, soundness_error=True)
    out = RunResult(pi, index, text, report.verdict.value, report.candidates, n)
    if not cfg.envelope:
        return out

    g = fm.to_nnf(f)
    if fm.count_strategic(g) == 1 and isinstance(g, fm.Strategic):
        try:
            witness = oracle_memoryless_uniform(model, g, limit=cfg.oracle_limit)
            out.envelope_a = "violated" if witness and report.verdict is Verdict.FALSE else "ok"
        except SearchSpaceTooLarge:
            out.envelope_a = "skipped"
    if not any(isinstance(h, fm.StrategicDual) for h in fm.walk(g)):
        holds = model.initial in perfect_information_states(model, g)
        out.envelope_b = "violated" if not holds and report.verdict is Verdict.TRUE else "ok"
    return out


def _job(args):
    return single_run(*args)


@dataclass
class BucketStats:
    pi_percent: float
    runs: int = 0
    true: int = 0
    false: int = 0
    unknown: int = 0
    candidates_total: int = 0
    envelope_a_checked: int = 0
    envelope_a_skipped: int = 0
    envelope_a_violations: int = 0
    envelope_b_checked: int = 0
    envelope_b_violations: int = 0
    soundness_errors: int = 0

    @property
    def conclusive_rate(self) -> float:
        return (self.true + self.false) / self.runs if self.runs else 0.0

    def add(self, r: RunResult):
        self.runs += 1
        setattr(self, r.verdict, getattr(self, r.verdict) + 1)
        self.candidates_total += r.candidates
        self.envelope_a_checked += r.envelope_a in ("ok", "violated")
        self.envelope_a_skipped += r.envelope_a == "skipped"
        self.envelope_a_violations += r.envelope_a == "violated"
        self.envelope_b_checked += r.envelope_b in ("ok", "violated")
        self.envelope_b_violations += r.envelope_b == "violated"
        self.soundness_errors += r.soundness_error

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conclusive_rate"] = round(self.conclusive_rate, 4)
        return d


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    buckets: list[BucketStats]
    wall_time_s: float = 0.0
    runs: list[RunResult] = field(default_factory=list, repr=False)

    @property
    def total_runs(self) -> int:
        return sum(b.runs for b in self.buckets)

    @property
    def violations(self) -> int:
        return sum(b.envelope_a_violations + b.envelope_b_violations + b.soundness_errors
                   for b in self.buckets)

    def note(self) -> str:
        rates = [b.conclusive_rate for b in self.buckets]
        lo, hi = (min(rates), max(rates)) if rates else (0.0, 0.0)
        return (f"conclusive rate per bucket ranges from {lo:.1%} to {hi:.1%}; "
                f"the reference figure of about {REFERENCE_RATE:.0%} came from a different, "
                f"unpublished generator, so the rates are not expected to match it")

    def to_dict(self, timing: bool = True) -> dict:
        cfg = asdict(self.config)
        cfg["grid"] = list(self.config.grid)
        cfg["templates"] = list(self.config.templates)
        doc = {"config": cfg, "seed": self.config.seed,
               "buckets": [b.to_dict() for b in self.buckets],
               "total_runs": self.total_runs, "violations": self.violations,
               "note": self.note()}
        if timing:
            doc["wall_time_s"] = round(self.wall_time_s, 3)
        return doc

    def to_csv(self) -> str:
        buf = io.StringIO()
        rows = [b.to_dict() for b in self.buckets]
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]) if rows else ["pi_percent"],
                                lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return buf.getvalue()

    def to_text(self) -> str:
        lines = [f"{'pi%':>5} {'runs':>5} {'true':>5} {'false':>5} {'?':>5} {'rate':>7} {'viol':>5}"]
        for b in self.buckets:
            v = b.envelope_a_violations + b.envelope_b_violations + b.soundness_errors
            lines.append(f"{b.pi_percent:>5g} {b.runs:>5} {b.true:>5} {b.false:>5} "
                         f"{b.unknown:>5} {b.conclusive_rate:>7.1%} {v:>5}")
        lines.append(self.note())
        return "\n".join(lines)


def run_experiment(cfg: ExperimentConfig, parallel: int = 1,
                   progress: Callable[[int, int], None] | None = None) -> ExperimentReport:
    """Run every bucket of ``cfg``; results do not depend on ``parallel``."""
    t0 = time.perf_counter()
    jobs = [(cfg, pi, i) for pi in cfg.grid for i in range(cfg.models_per_bucket)]
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            results = list(pool.map(_job, jobs, chunksize=max(1, len(jobs) // (parallel * 8))))
    else:
        results = []
        for k, job in enumerate(jobs):
            results.append(_job(job))
            if progress:
                progress(k + 1, len(jobs))
    buckets = {pi: BucketStats(pi) for pi in cfg.grid}
    for r in results:
        buckets[r.pi_percent].add(r)
    return ExperimentReport(cfg, [buckets[pi] for pi in cfg.grid],
                            time.perf_counter() - t0, results)
