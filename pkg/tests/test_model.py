import json

import pytest

from submc.errors import ProtocolError, SchemaError, TransitionError, UnknownNameError
from submc.model import (enabled_joint_actions, first_conflict, indist_pairs, load_model,
                         read_model)
from conftest import fixture_path


def minimal_doc():
    return {"agents": [{"name": "a", "actions": ["x"]}],
            "states": [{"name": "s", "labels": ["p"]}],
            "initial": "s",
            "protocol": [{"agent": "a", "state": "s", "actions": ["x"]}],
            "transitions": [{"from": "s", "action": ["x"], "to": "s"}]}


def test_rover_dimensions(rover):
    assert rover.n_states == 11
    assert rover.agents == ("rover", "mechanic")
    assert set(rover.atoms) == {"sp", "cp", "oc", "rm", "rp", "ip", "pl", "pr"}
    assert rover.states[rover.initial] == "s_I"


def test_minimal_model_accepted():
    m = load_model(minimal_doc())
    assert m.n_states == 1
    assert enabled_joint_actions(m, 0) == [(0,)]
    assert m.successors == ((0,),)


def test_non_uniform_protocol_rejected(rover):
    doc = rover.to_dict()
    for entry in doc["protocol"]:
        if entry["agent"] == "rover" and entry["state"] == "s1":
            entry["actions"] = ["i", "mp"]
    doc["transitions"] += [{"from": "s1", "action": ["mp", a], "to": "s1"}
                           for a in ("ok", "nok")]
    with pytest.raises(ProtocolError):
        load_model(doc)


def _joint_names(m, s):
    return {tuple(m.joint_names(j)) for j in enabled_joint_actions(m, s)}


def test_enabled_at_s4(rover):
    assert _joint_names(rover, rover.state_index("s4")) == {("L", "i"), ("R", "i"), ("i", "i")}


def test_enabled_at_initial(rover):
    assert _joint_names(rover, rover.initial) == {
        (r, c) for r in ("chk", "i") for c in ("ca", "cm", "cw")}


def test_indist_pairs(rover):
    pairs = {(rover.states[s], rover.states[t])
             for s, t in indist_pairs(rover, rover.agent_set(["rover"]))}
    assert pairs == {("s1", "s2"), ("s1", "s3"), ("s2", "s3")}
    assert indist_pairs(rover, rover.agent_set(["mechanic"])) == []
    assert indist_pairs(rover, []) == []


def test_first_conflict(rover):
    agents = sorted(rover.agent_set(["rover"]))
    s, t, _ = first_conflict(rover, agents, range(rover.n_states))
    assert (rover.states[s], rover.states[t]) == ("s1", "s2")
    core = set(range(rover.n_states)) - {rover.state_index("s1"), rover.state_index("s2")}
    assert first_conflict(rover, agents, core) is None


def test_round_trip(rover):
    again = load_model(rover.to_json())
    assert again.to_dict() == rover.to_dict()
    assert again.indist == rover.indist


def test_read_model_from_file():
    m = read_model(fixture_path("rover.json"))
    assert m.has_perfect_information(m.agent_set(["mechanic"]))
    assert not m.has_perfect_information()


def test_with_perfect_information(rover):
    assert rover.with_perfect_information().has_perfect_information()


def test_relabel_adds_atom(rover):
    m = rover.relabel({"q": [0, 4]})
    assert m.states_with("q") == {0, 4}
    assert "q" in m.atoms and "q" not in rover.atoms


@pytest.mark.parametrize("mutate, error", [
    (lambda d: d.pop("initial"), SchemaError),
    (lambda d: d.update(initial="nowhere"), UnknownNameError),
    (lambda d: d["transitions"].clear(), TransitionError),
    (lambda d: d["transitions"].append(dict(d["transitions"][0])), TransitionError),
    (lambda d: d["protocol"][0].update(actions=[]), ProtocolError),
    (lambda d: d["protocol"][0].update(actions=["y"]), UnknownNameError),
    (lambda d: d.update(atoms=[]), UnknownNameError),
    (lambda d: d["agents"].append(dict(d["agents"][0])), SchemaError),
    (lambda d: d["transitions"][0].update(action=["x", "x"]), SchemaError),
    (lambda d: d.update(indistinguishable=[{"agent": "a", "states": ["s"]}]), SchemaError),
])
def test_loader_errors(mutate, error):
    doc = minimal_doc()
    mutate(doc)
    with pytest.raises(error):
        load_model(doc)


def test_invalid_json_is_schema_error():
    with pytest.raises(SchemaError):
        load_model("{not json")
    with pytest.raises(SchemaError):
        load_model(json.dumps([1, 2]))


def test_delta_rejects_disabled(rover):
    with pytest.raises(TransitionError):
        rover.delta(rover.initial, (1, 3))
