import pytest

from submc import formula as fm
from submc.errors import InitialStateRemoved, UnknownNameError
from submc.harness.generator import GeneratorConfig, random_icgs
from submc.model import first_conflict
from submc.submodel import find_submodels, generate_negative, generate_positive, preprocess
from conftest import names


def core_without(m, *removed):
    return frozenset(range(m.n_states)) - {m.state_index(s) for s in removed}


def test_preprocess_adds_complement_atom(rover, phis):
    pre = preprocess(rover, phis["phi3"])
    assert pre.atom_map == {"ip": "nip"}
    assert "nip" in pre.model.atoms
    assert names(rover, pre.model.states_with("nip")) == set(rover.states) - {"s6", "s7"}
    assert len(pre.model.states_with("nip")) == 9
    assert fm.extract_negated_atoms(pre.formula) == []
    assert "nip" in fm.atoms_of(pre.formula)


def test_preprocess_negation_free(rover, phis):
    pre = preprocess(rover, phis["phi1"])
    assert pre.model is rover
    assert pre.formula == fm.to_nnf(phis["phi1"])
    assert pre.atom_map == {}


def test_preprocess_two_negations(rover):
    pre = preprocess(rover, fm.parse("!oc & !rm"))
    assert pre.atom_map == {"oc": "noc", "rm": "nrm"}
    assert pre.formula == fm.parse("noc & nrm")


def test_preprocess_avoids_name_clash():
    m = random_icgs(GeneratorConfig(atom_count=2, seed=1))
    m = m.relabel({"np0": [0]})
    pre = preprocess(m, fm.parse("!p0"))
    assert pre.atom_map["p0"] not in m.atoms


def _edges(sub, state):
    m = sub.model
    s = m.state_index(state)
    return {tuple(m.joint_names(j)): m.states[t] for j, t in m.transitions[s].items()}


def test_negative_submodel_shape(rover):
    sub = generate_negative(rover, core_without(rover, "s1", "s3"))
    m = sub.model.validate()
    assert m.states == ("s_I", "s2", "s4", "s5", "s6", "s7", "s8", "e1", "e2", "s_bot")
    assert sub.sink == 9 and m.labels[sub.sink] == frozenset()
    out = _edges(sub, "s_I")
    assert {j for j, t in out.items() if t == "s_bot"} == {("chk", "ca"), ("chk", "cm")}
    assert out[("chk", "cw")] == "s2"
    # the sink enables every joint action and loops on itself
    assert set(m.transitions[sub.sink].values()) == {sub.sink}
    assert len(m.transitions[sub.sink]) == 5 * 6
    assert m.has_perfect_information(m.agent_set(["rover"]))
    # unaffected states keep their edges
    assert _edges(sub, "s4") == {("L", "i"): "s6", ("R", "i"): "s7", ("i", "i"): "s4"}
    assert _edges(sub, "s2") == {("i", "ok"): "s4", ("i", "nok"): "e1"}
    for k in sub.core_states():
        assert m.labels[k] == rover.labels[sub.to_base[k]]
        assert sub.from_base(sub.to_base[k]) == k


def test_positive_submodel_shape(rover):
    neg = generate_negative(rover, core_without(rover, "s1", "s3"))
    pos = generate_positive(rover, core_without(rover, "s1", "s3"))
    assert pos.model.states[-1] == "s_top"
    assert pos.model.labels[pos.sink] == frozenset(rover.atoms)
    assert pos.model.transitions == neg.model.transitions
    assert pos.model.labels[:-1] == neg.model.labels[:-1]


def test_full_core_leaves_sink_unreachable(rover):
    for sub in (generate_negative(rover, range(rover.n_states)),
                generate_positive(rover, range(rover.n_states))):
        assert all(sub.sink not in sub.model.successors[k] for k in sub.core_states())
    assert generate_positive(rover, range(rover.n_states)).model.labels[-1] == frozenset(rover.atoms)


def test_core_without_initial(rover):
    core = core_without(rover, "s_I")
    with pytest.raises(InitialStateRemoved):
        generate_negative(rover, core)
    with pytest.raises(InitialStateRemoved):
        generate_positive(rover, core)


@pytest.mark.parametrize("name", ["phi1", "phi2", "phi3"])
def test_rover_candidates(rover, phis, name):
    pairs = find_submodels(preprocess(rover, phis[name]).model, phis[name])
    removed = [set(rover.states) - set(p.core_names()) for p in pairs]
    assert removed == [{"s1", "s2"}, {"s1", "s3"}, {"s2", "s3"}]
    assert [p.index for p in pairs] == [0, 1, 2]


def test_perfect_information_model_single_pair():
    m = random_icgs(GeneratorConfig(states=5, pi_percent=0, seed=42))
    pairs = find_submodels(m, fm.parse("<<ag0,ag1>> F p0"))
    assert len(pairs) == 1 and pairs[0].core == frozenset(range(5))


def test_empty_coalitions_ignore_indistinguishability(rover):
    pairs = find_submodels(rover, fm.parse("A F pl"))
    assert len(pairs) == 1 and len(pairs[0].core) == rover.n_states


def test_unknown_agent(rover):
    with pytest.raises(UnknownNameError):
        find_submodels(rover, fm.parse("<<robot>> F pl"))


@pytest.mark.parametrize("seed", range(30))
def test_cores_conflict_free_and_maximal(seed):
    m = random_icgs(GeneratorConfig(states=6, pi_percent=20, seed=seed))
    agents = list(range(m.n_agents))
    pairs = find_submodels(m, fm.parse("<<ag0,ag1>> X p0"))
    cores = [p.core for p in pairs]
    assert len(set(cores)) == len(cores)
    for p in pairs:
        assert m.initial in p.core
        assert first_conflict(m, agents, p.core) is None
        if p.last_split is not None:
            dropped, _ = p.last_split
            assert first_conflict(m, agents, p.core | {dropped}) is not None
        for sub in (p.neg, p.pos):
            sub.model.validate()
            assert sub.model.has_perfect_information()
