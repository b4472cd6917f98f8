import random

import pytest

from submc import formula as fm
from submc.errors import ImperfectInformationError, UnsupportedFormula
from submc.games import (PathClass, check_strategic, classify_path_formula, controllable_pre,
                         ltl_to_dfa, uncontrollable_pre)
from submc.harness.generator import GeneratorConfig, random_icgs
from submc.harness.oracles import memoryless_states, oracle_progression_game
from submc.harness.random_formulas import random_strategic
from submc.model import build
from conftest import names
from words import lasso_words, satisfies


@pytest.mark.parametrize("text, cls", [
    ("F ((pl | pr) & F (oc & rm))", PathClass.CO_SAFETY),
    ("X p", PathClass.ATL_FRAGMENT),
    ("p U q", PathClass.ATL_FRAGMENT),
    ("G (p | !q)", PathClass.ATL_FRAGMENT),
    ("p & q", PathClass.ATL_FRAGMENT),
    ("X X p", PathClass.CO_SAFETY),
    ("G (p & X q)", PathClass.SAFETY),
    ("!F (p & F q)", PathClass.SAFETY),
    ("G F p", PathClass.UNSUPPORTED),
    ("F (p & G q)", PathClass.UNSUPPORTED),
    ("F A X p", PathClass.UNSUPPORTED),
])
def test_classification(text, cls):
    assert classify_path_formula(fm.parse_path(text)) is cls


def test_controllable_pre(rover):
    rov = rover.agent_set(["rover"])
    s = rover.state_index
    assert s("s4") in controllable_pre(rover, rov, {s("s6")})
    assert controllable_pre(rover, rov, range(rover.n_states)) == frozenset(range(rover.n_states))
    assert rover.initial not in controllable_pre(rover, rov, {s("s4")})
    # nobody can force s4: every state has some other successor
    assert controllable_pre(rover, [], {s("s4")}) == frozenset()
    assert names(rover, uncontrollable_pre(rover, [], {s("s4")})) == {
        "s1", "s2", "s3", "s4", "s6", "s7"}
    # the mechanic alone can force s4 from the checkpoints
    mech = rover.agent_set(["mechanic"])
    assert names(rover, controllable_pre(rover, mech, {s("s4")})) == {"s1", "s2", "s3"}


def two_states():
    """s0 moves to s1 (p) only on the joint action (x, x); everything
    else stays or loops."""
    return build(
        agents={"a": ["x", "y"], "b": ["x", "y"]},
        states={"s0": [], "s1": ["p"]},
        initial="s0",
        protocol={(ag, st): ["x", "y"] for ag in "ab" for st in ("s0", "s1")},
        transitions={**{("s0", (u, v)): ("s1" if (u, v) == ("x", "x") else "s0")
                        for u in "xy" for v in "xy"},
                     **{("s1", (u, v)): "s1" if u == "x" else "s0" for u in "xy" for v in "xy"}},
        atoms=["p"])


def test_grand_coalition_next():
    m = two_states()
    assert check_strategic(m, fm.parse("<<a,b>> X p")) == {0, 1}
    assert check_strategic(m, fm.parse("<<a>> X p")) == {1}
    assert check_strategic(m, fm.parse("<<b>> X p")) == frozenset()
    # b keeps s0 by playing y and a leaves s1 by playing y; at s1 a's x keeps p
    assert check_strategic(m, fm.parse("[[b]] X p")) == {1}
    assert check_strategic(m, fm.parse("[[a]] X p")) == frozenset()
    assert check_strategic(m, fm.parse("<<>> X p")) == frozenset()


def test_rover_reach_with_perfect_information(rover):
    m = rover.with_perfect_information()
    sat = check_strategic(m, fm.parse("<<rover>> true U (oc & rm)"))
    assert names(m, sat) == {"s4", "s5", "s6", "s7", "s8"}


def test_mission_on_negative_submodel(rover, phis):
    from submc.submodel import generate_negative
    core = frozenset(range(rover.n_states)) - {rover.state_index("s1"), rover.state_index("s3")}
    sub = generate_negative(rover, core)
    psi1 = fm.parse("<<rover>> F ((pl | pr) & F (oc & rm))")
    assert names(sub.model, check_strategic(sub.model, psi1)) == {"s4", "s5", "s6", "s7", "s8"}


def test_imperfect_coalition_rejected(rover):
    with pytest.raises(ImperfectInformationError):
        check_strategic(rover, fm.parse("<<rover>> F pl"))
    # the mechanic observes everything
    assert check_strategic(rover, fm.parse("<<mechanic>> F pl")) == frozenset(
        [rover.state_index("s5")])


def test_unsupported_bodies(rover):
    m = rover.with_perfect_information()
    for text in ("<<rover>> G F pl", "<<rover>> F E G pl", "<<rover>> F (pl & G oc)"):
        with pytest.raises(UnsupportedFormula):
            check_strategic(m, fm.parse(text))
    with pytest.raises(UnsupportedFormula):
        check_strategic(m, fm.parse("pl"))


@pytest.mark.parametrize("seed", range(10))
def test_false_goal_is_empty(seed):
    m = random_icgs(GeneratorConfig(seed=seed))
    assert check_strategic(m, fm.parse("<<ag0>> F false")) == frozenset()
    assert check_strategic(m, fm.parse("[[ag0,ag1]] F (p0 & false)")) == frozenset()
    assert check_strategic(m, fm.parse("<<>> X true")) == frozenset(range(m.n_states))


# -- automata -----------------------------------------------------------------

def test_dfa_sizes():
    assert len(ltl_to_dfa(fm.parse_path("F p")).states()) == 2
    assert len(ltl_to_dfa(fm.parse_path("F (p & F q)")).states()) == 3
    safe = ltl_to_dfa(fm.parse_path("G p"))
    assert safe.kind == "safe" and len(safe.states()) == 2
    q = safe.step(safe.initial, [])
    assert safe.is_accepting(q) and safe.step(q, ["p"]) == q


@pytest.mark.parametrize("text", [
    "F p", "F (p & F q)", "p U q", "X (p | X q)", "(p U q) & F !p", "X X X p",
    "G p", "p R q", "G (p | X q)", "!(p U q)", "G (p & X !q)",
])
def test_dfa_language_matches_evaluator(text):
    psi = fm.parse_path(text)
    dfa = ltl_to_dfa(psi)
    for prefix, cycle in lasso_words(["p", "q"], 4):
        assert dfa.accepts_lasso(prefix, cycle) == satisfies(psi, prefix, cycle), (prefix, cycle)


def test_dfa_rejects_mixed_formula():
    with pytest.raises(UnsupportedFormula):
        ltl_to_dfa(fm.parse_path("G F p"))
    with pytest.raises(UnsupportedFormula):
        ltl_to_dfa(fm.parse_path("G p"), PathClass.CO_SAFETY)


# -- cross-checks -------------------------------------------------------------

def _random_case(seed, kind):
    rng = random.Random(f"games:{seed}")
    m = random_icgs(GeneratorConfig(states=rng.randint(1, 6), actions_per_agent=rng.randint(1, 2),
                                    atom_count=2, seed=f"games:{seed}"))
    return m, random_strategic(rng, m.agents, m.atoms, kind)


@pytest.mark.parametrize("seed", range(60))
def test_atl_fragment_matches_memoryless_enumeration(seed):
    m, f = _random_case(seed, "atl")
    assert check_strategic(m, f) == memoryless_states(m, f)


@pytest.mark.parametrize("seed", range(60))
@pytest.mark.parametrize("kind", ["co-safety", "safety"])
def test_objectives_match_progression_game(seed, kind):
    m, f = _random_case(seed, kind)
    got = check_strategic(m, f)
    assert got == oracle_progression_game(m, f)
    if isinstance(f, fm.Strategic):
        # a memoryless witness is in particular a perfect-recall one
        assert memoryless_states(m, f) <= got


def test_memory_can_matter():
    """A co-safety goal that needs memory: visit both p and q from a hub."""
    m = build(
        agents={"a": ["l", "r"]},
        states={"h": [], "sp": ["p"], "sq": ["q"]},
        initial="h",
        protocol={("a", "h"): ["l", "r"], ("a", "sp"): ["l"], ("a", "sq"): ["l"]},
        transitions={("h", ("l",)): "sp", ("h", ("r",)): "sq",
                     ("sp", ("l",)): "h", ("sq", ("l",)): "h"},
        atoms=["p", "q"])
    # a memoryless strategy makes one fixed choice at the hub, so from h
    # it never sees both targets
    for text in ("<<a>> (F p & F q)", "<<a>> F (p & F q)"):
        f = fm.parse(text)
        assert check_strategic(m, f) == {0, 1, 2}
        assert 0 not in memoryless_states(m, f)


@pytest.mark.parametrize("seed", range(25))
def test_extreme_coalitions_match_path_quantifiers(seed):
    from submc.ctlstar import ctlstar_states
    rng = random.Random(f"extreme:{seed}")
    m = random_icgs(GeneratorConfig(states=5, atom_count=2, seed=f"extreme:{seed}"))
    kind = rng.choice(["atl", "co-safety", "safety"])
    f = random_strategic(rng, m.agents, m.atoms, kind, dual=False)
    none = fm.Strategic((), f.body)
    every = fm.Strategic(m.agents, f.body)
    assert check_strategic(m, none) == ctlstar_states(m, fm.PathA(f.body))
    assert check_strategic(m, every) == ctlstar_states(m, fm.PathE(f.body))


@pytest.mark.parametrize("seed", range(25))
def test_monotone_in_labels(seed):
    rng = random.Random(f"mono:{seed}")
    m = random_icgs(GeneratorConfig(states=5, atom_count=2, seed=f"mono:{seed}"))
    f = random_strategic(rng, m.agents, m.atoms, rng.choice(["co-safety", "safety"]))
    if any(isinstance(g, fm.Not) for g in fm.walk(fm.to_nnf(f))):
        return
    bigger = m.relabel({"p0": [rng.randrange(m.n_states)]})
    assert check_strategic(m, f) <= check_strategic(bigger, f)
