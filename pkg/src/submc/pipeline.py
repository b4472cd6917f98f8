"""The three-valued verification procedure.

For every candidate pair of sub-models: label the strategic
sub-formulas that hold on the sub-models, then decide the whole formula
on the original model with universal and existential path quantifiers in
place of the strategic ones.  The first conclusive candidate wins.
"""
from __future__ import annotations

import enum
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from . import formula as fm
from .ctlstar import check_ctlstar, ctlstar_states
from .errors import InternalSoundnessError, UnsupportedFormula
from .games import check_strategic
from .model import Icgs
from .submodel import (CandidatePair, find_submodels, generate_negative,
                       generate_positive, preprocess)

log = logging.getLogger(__name__)


class Verdict(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"

    @property
    def symbol(self) -> str:
        return {"true": "⊤", "false": "⊥", "unknown": "?"}[self.value]

    @property
    def conclusive(self) -> bool:
        return self is not Verdict.UNKNOWN

    @property
    def exit_code(self) -> int:
        return {"true": 0, "false": 1, "unknown": 2}[self.value]


@dataclass(frozen=True, order=True)
class ResultEntry:
    """Sub-formula ``sub`` holds at base state ``state`` on the sub-model
    named by the prefix of ``variant_atom`` (``n`` or ``p``)."""
    sub: int
    state: int
    variant_atom: str

    @property
    def variant(self) -> str:
        return self.variant_atom[0]


@dataclass
class SubformulaResults:
    entries: list[ResultEntry]
    pair: CandidatePair
    skipped: list[int] = field(default_factory=list)

    def states(self, sub: int, variant: str) -> frozenset:
        return frozenset(e.state for e in self.entries
                         if e.sub == sub and e.variant == variant)


def check_subformulas(pair: CandidatePair, f: fm.Formula,
                      tree: fm.SubformulaTree | None = None) -> SubformulaResults:
    """Check every strategic sub-formula, leaves first, on both sub-models.

    Satisfied sub-formulas become atoms of the sub-models, so enclosing
    sub-formulas see them; the positive sink carries every new atom.  A
    sub-formula outside the supported fragments is treated as unknown:
    false everywhere on the negative side, true everywhere on the
    positive side, and it produces no entries.
    """
    if tree is None:
        tree = fm.subformulas(f, pair.neg.base.atoms)
    mn, mp = pair.neg.model, pair.pos.model
    sink = pair.pos.sink
    to_base = pair.neg.to_base
    entries: list[ResultEntry] = []
    skipped: list[int] = []
    for node in tree:
        try:
            sat_n = check_strategic(mn, node.formula)
            sat_p = check_strategic(mp, node.formula)
        except UnsupportedFormula as exc:
            log.info("sub-formula %s skipped: %s", node.atom, exc)
            skipped.append(node.index)
            mn = mn.relabel({node.atom: ()})
            mp = mp.relabel({node.atom: range(mp.n_states)})
            continue
        core_n = sorted(s for s in sat_n if s != sink)
        core_p = sorted(s for s in sat_p if s != sink)
        if not set(core_n) <= set(core_p):
            raise InternalSoundnessError(
                f"{node.atom} holds on the negative sub-model where the positive one refutes it")
        mn = mn.relabel({node.atom: core_n})
        mp = mp.relabel({node.atom: core_p + [sink]})
        entries += [ResultEntry(node.index, to_base[s], node.variant_atom("n")) for s in core_n]
        entries += [ResultEntry(node.index, to_base[s], node.variant_atom("p")) for s in core_p]
    updated = CandidatePair(pair.index, pair.core, pair.neg.with_model(mn),
                            pair.pos.with_model(mp), pair.last_split)
    return SubformulaResults(sorted(entries), updated, skipped)


@dataclass
class CandidateOutcome:
    index: int
    core: list[str]
    entries: list[ResultEntry]
    skipped: list[int]
    phi_a: fm.Formula
    phi_e: fm.Formula
    a_holds: bool
    e_holds: bool
    timings_ms: dict = field(default_factory=dict)

    @property
    def verdict(self) -> Verdict:
        if self.a_holds:
            return Verdict.TRUE
        if not self.e_holds:
            return Verdict.FALSE
        return Verdict.UNKNOWN

    def to_dict(self, m: Icgs) -> dict:
        return {
            "index": self.index,
            "core": self.core,
            "entries": [{"state": m.states[e.state], "sub": e.sub, "atom": e.variant_atom}
                        for e in self.entries],
            "skipped": self.skipped,
            "phiA": fm.to_string(self.phi_a),
            "phiE": fm.to_string(self.phi_e),
            "A_holds": self.a_holds,
            "E_holds": self.e_holds,
        }


def residual_formulas(tree: fm.SubformulaTree, entries: Iterable[ResultEntry],
                      checked: Iterable[int] | None = None):
    """Per-variant node formulas and the residual formulas ``psi_n``,
    ``psi_p``.

    A node is replaced by its variant atom when it has entries of that
    variant, or when it is listed in ``checked`` (its sub-model result is
    known even if empty); otherwise its strategic operator stays in place.
    """
    have = {(e.sub, e.variant) for e in entries}
    for k in checked or ():
        have |= {(k, "n"), (k, "p")}
    forms: dict[str, dict[int, fm.Formula]] = {"n": {}, "p": {}}
    used: dict[str, set] = {"n": set(), "p": set()}
    for v in ("n", "p"):
        mapping: dict[str, fm.Formula] = {}
        for node in tree:
            forms[v][node.index] = fm.substitute_atoms(node.formula, mapping)
            if (node.index, v) in have:
                mapping[node.atom] = fm.Atom(node.variant_atom(v))
                used[v].add(node.index)
            else:
                mapping[node.atom] = forms[v][node.index]
        forms[v][0] = fm.substitute_atoms(tree.residue, mapping)
    return forms, used


def verification(m: Icgs, f: fm.Formula, entries: Iterable[ResultEntry],
                 core: Iterable[int] | None = None, tree: fm.SubformulaTree | None = None,
                 path_bounds: bool = True, index: int = 0,
                 checked: Iterable[int] | None = None) -> CandidateOutcome:
    """Decide ``f`` on ``m`` from the sub-formula entries of one candidate.

    ``core`` is the candidate's state set (default: every state); outside
    it nothing is known, so positive atoms hold there.  With
    ``path_bounds`` each negative atom is widened by the universal reading
    of its sub-formula and each positive atom narrowed by the existential
    reading, both computed on ``m``.  Nodes in ``checked`` are replaced
    by their atoms even without entries.
    """
    t0 = time.perf_counter()
    entries = sorted(entries)
    if tree is None:
        tree = fm.subformulas(f, m.atoms)
    core = frozenset(range(m.n_states)) if core is None else frozenset(core)
    outside = frozenset(range(m.n_states)) - core
    forms, used = residual_formulas(tree, entries, checked)

    labelled = m
    for node in tree:
        extra = {}
        for v in ("n", "p"):
            if node.index not in used[v]:
                continue
            where = frozenset(e.state for e in entries
                              if e.sub == node.index and e.variant == v)
            if v == "p":
                where |= outside
            if path_bounds:
                bound = ctlstar_states(labelled, fm.atl_to_ctl(forms[v][node.index], v))
                where = where | bound if v == "n" else where & bound
            extra[node.variant_atom(v)] = sorted(where)
        if len(extra) == 2 and not set(extra[node.variant_atom("n")]) <= set(
                extra[node.variant_atom("p")]):
            raise InternalSoundnessError(
                f"candidate {index}: {node.variant_atom('n')} labels a state that "
                f"{node.variant_atom('p')} does not")
        if extra:
            labelled = labelled.relabel(extra)

    phi_a = fm.atl_to_ctl(forms["n"][0], "n")
    phi_e = fm.atl_to_ctl(forms["p"][0], "p")
    a_holds = check_ctlstar(labelled, labelled.initial, phi_a)
    e_holds = check_ctlstar(labelled, labelled.initial, phi_e)
    if a_holds and not e_holds:
        raise InternalSoundnessError(
            f"candidate {index}: {fm.to_string(phi_a)} holds but {fm.to_string(phi_e)} fails")
    return CandidateOutcome(index, [m.states[s] for s in sorted(core)], entries, [],
                            phi_a, phi_e, a_holds, e_holds,
                            {"verification": (time.perf_counter() - t0) * 1e3})


def process_candidate(m: Icgs, f: fm.Formula, tree: fm.SubformulaTree, core: frozenset,
                      index: int = 0, path_bounds: bool = True) -> CandidateOutcome:
    """Sub-formula checking then verification for one core of the
    preprocessed model ``m``."""
    t0 = time.perf_counter()
    pair = CandidatePair(index, core, generate_negative(m, core), generate_positive(m, core))
    res = check_subformulas(pair, f, tree)
    t1 = time.perf_counter()
    # the literal reading only substitutes sub-formulas that produced entries
    checked = [n.index for n in tree if n.index not in res.skipped] if path_bounds else None
    out = verification(m, f, res.entries, core, tree, path_bounds, index, checked)
    out.skipped = res.skipped
    out.timings_ms["subformulas"] = (t1 - t0) * 1e3
    return out


def _worker(args):
    return process_candidate(*args)


@dataclass
class Report:
    verdict: Verdict
    candidates: int
    conclusive_candidate: int | None
    per_candidate: list[CandidateOutcome]
    model: Icgs
    formula: fm.Formula
    preprocessed: fm.Formula
    subformulas: list[str]
    timings_ms: dict

    @property
    def phi_a(self):
        return self.per_candidate[-1].phi_a if self.per_candidate else None

    @property
    def phi_e(self):
        return self.per_candidate[-1].phi_e if self.per_candidate else None

    def to_dict(self, timings: bool = True) -> dict:
        doc = {
            "verdict": self.verdict.value,
            "formula": fm.to_string(self.formula),
            "preprocessed": fm.to_string(self.preprocessed),
            "subformulas": self.subformulas,
            "candidates": self.candidates,
            "conclusive_candidate": self.conclusive_candidate,
            "per_candidate": [c.to_dict(self.model) for c in self.per_candidate],
        }
        if timings:
            doc["timings_ms"] = {k: round(v, 3) for k, v in self.timings_ms.items()}
        return doc


def model_checking_procedure(m: Icgs, f: fm.Formula | str, parallel: int = 1,
                             exhaustive: bool = False, path_bounds: bool = True) -> Report:
    """Run the whole procedure and return ⊤, ⊥ or ? with its evidence.

    Candidates are tried in enumeration order and the first conclusive one
    decides.  With ``parallel > 1`` all candidates are processed by a
    process pool and the same prefix is reported.  ``exhaustive`` processes
    every candidate and checks that no two conclusive verdicts disagree.
    """
    if isinstance(f, str):
        f = fm.parse(f)
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    pre = preprocess(m, f)
    model, g = pre.model, pre.formula
    tree = fm.subformulas(g, model.atoms)
    t1 = time.perf_counter()
    cores = [c.core for c in find_submodels(model, g)]
    t2 = time.perf_counter()
    timings["preprocess"] = (t1 - t0) * 1e3
    timings["enumerate"] = (t2 - t1) * 1e3

    outcomes: list[CandidateOutcome] = []
    if parallel > 1 and len(cores) > 1:
        jobs = [(model, g, tree, core, k, path_bounds) for k, core in enumerate(cores)]
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            outcomes = list(pool.map(_worker, jobs))
    else:
        for k, core in enumerate(cores):
            out = process_candidate(model, g, tree, core, k, path_bounds)
            outcomes.append(out)
            if out.verdict.conclusive and not exhaustive:
                break
    t3 = time.perf_counter()

    seen = {o.verdict for o in outcomes if o.verdict.conclusive}
    if len(seen) > 1:
        raise InternalSoundnessError("candidates disagree on a conclusive verdict")
    verdict, winner = Verdict.UNKNOWN, None
    for o in outcomes:
        if o.verdict.conclusive:
            verdict, winner = o.verdict, o.index
            break
    if not exhaustive and winner is not None:
        outcomes = outcomes[:winner + 1]

    timings["subformulas"] = sum(o.timings_ms.get("subformulas", 0.0) for o in outcomes)
    timings["verification"] = sum(o.timings_ms.get("verification", 0.0) for o in outcomes)
    timings["candidates"] = (t3 - t2) * 1e3
    timings["total"] = (time.perf_counter() - t0) * 1e3
    return Report(verdict, len(cores), winner, outcomes, model, f, g,
                  [f"{n.atom} = {fm.to_string(n.formula)}" for n in tree], timings)
