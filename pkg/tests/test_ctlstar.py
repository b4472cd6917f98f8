import random

import pytest

from submc import formula as fm
from submc.ctlstar import check_ctlstar, ctlstar_states, exists_path, ltl_to_nba
from submc.errors import UnsupportedFormula
from submc.harness.generator import GeneratorConfig, random_icgs
from submc.harness.oracles import oracle_ctlstar_states, oracle_lasso_ltl
from submc.harness.random_formulas import random_ctlstar, random_ltl
from submc.model import build
from submc.submodel import preprocess
from words import lasso_words, nba_accepts, satisfies


def cycle(p_states=("s0",)):
    return build(agents={"a": ["x"]}, states={"s0": ["p"] if "s0" in p_states else [],
                                              "s1": ["p"] if "s1" in p_states else []},
                 initial="s0", protocol={("a", "s0"): ["x"], ("a", "s1"): ["x"]},
                 transitions={("s0", ("x",)): "s1", ("s1", ("x",)): "s0"}, atoms=["p"])


def test_nba_for_eventually_has_two_states():
    assert len(ltl_to_nba(fm.parse_path("F p")).states()) == 2


@pytest.mark.parametrize("text, length", [
    ("p U q", 4), ("X p", 3), ("F p", 4), ("G F p", 4), ("F G (p | q)", 4),
    ("G (p -> F q)", 4), ("p R (q | X p)", 3), ("!(p U (q & X !p))", 3), ("X X q & G !p", 3),
])
def test_nba_language_matches_evaluator(text, length):
    psi = fm.parse_path(text)
    nba = ltl_to_nba(psi)
    for prefix, cyc in lasso_words(["p", "q"], length):
        assert nba_accepts(nba, prefix, cyc) == satisfies(psi, prefix, cyc), (prefix, cyc)


def test_nba_rejects_quantifiers():
    with pytest.raises(UnsupportedFormula):
        ltl_to_nba(fm.parse_path("F A G p"))


def test_exists_path_examples(rover, phis):
    assert exists_path(rover, 0, fm.parse_path("F true"))
    m = cycle(("s0",))
    assert not exists_path(m, 0, fm.parse_path("G p"))
    assert exists_path(m, 0, fm.parse_path("G F p"))
    # rp and nip never hold together in the rover model, whatever the
    # sub-formula atom says
    pre = preprocess(rover, phis["phi3"])
    labelled = pre.model.relabel({"patom_1": range(rover.n_states)})
    assert not exists_path(labelled, labelled.initial, fm.parse_path("F (rp & nip & patom_1)"))


def test_path_quantifiers_on_fork(fork):
    assert not check_ctlstar(fork, 0, fm.parse("A F p"))
    assert check_ctlstar(fork, 0, fm.parse("E F p"))
    assert ctlstar_states(fork, fm.parse("A X E G !p")) == {2}
    assert ctlstar_states(fork, fm.parse("E X A G p")) == {0, 1}


def test_atom_at_state(rover):
    assert check_ctlstar(rover, rover.initial, fm.parse("sp"))
    assert not check_ctlstar(rover, rover.initial, fm.parse("cp"))


def test_strategic_operator_rejected(rover):
    with pytest.raises(UnsupportedFormula):
        ctlstar_states(rover, fm.parse("E F <<rover>> X p"))


def _small(seed, agents=1):
    return random_icgs(GeneratorConfig(states=random.Random(seed).randint(1, 6), agents=agents,
                                       actions_per_agent=2, atom_count=2,
                                       protocol_density=0.5, seed=f"ctl:{seed}"))


@pytest.mark.parametrize("seed", range(40))
def test_exists_path_matches_lasso_oracle(seed):
    rng = random.Random(f"ltl:{seed}")
    m = _small(seed)
    psi = random_ltl(rng, m.atoms, 3)
    for s in range(m.n_states):
        assert exists_path(m, s, psi) == oracle_lasso_ltl(m, s, psi)


@pytest.mark.parametrize("seed", range(40))
def test_duality_and_oracle(seed):
    rng = random.Random(f"ctl:{seed}")
    m = _small(seed)
    f = random_ctlstar(rng, m.atoms, 3)
    sat = ctlstar_states(m, f)
    assert sat == oracle_ctlstar_states(m, f)
    assert ctlstar_states(m, fm.Not(f)) == frozenset(range(m.n_states)) - sat


@pytest.mark.parametrize("seed", range(20))
def test_more_edges_more_paths(seed):
    rng = random.Random(f"edges:{seed}")
    small = random_icgs(GeneratorConfig(states=5, agents=1, actions_per_agent=1,
                                        atom_count=2, seed=f"edges:{seed}"))
    doc = small.to_dict()
    doc["agents"][0]["actions"].append("extra")
    for entry in doc["protocol"]:
        entry["actions"].append("extra")
    doc["transitions"] += [{"from": st, "action": ["extra"], "to": rng.choice(small.states)}
                           for st in small.states]
    from submc.model import load_model
    big = load_model(doc)
    psi = random_ltl(rng, small.atoms, 3)
    assert ctlstar_states(small, fm.PathE(psi)) <= ctlstar_states(big, fm.PathE(psi))
    assert ctlstar_states(big, fm.PathA(psi)) <= ctlstar_states(small, fm.PathA(psi))
