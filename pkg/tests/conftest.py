from importlib import resources

import pytest

from submc import formula as fm
from submc.model import build, read_model


def fixture_path(name: str):
    return resources.files("submc") / "fixtures" / name


def rover_formulas() -> dict[str, str]:
    out = {}
    for line in fixture_path("rover_formulas.txt").read_text().splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            name, _, text = line.partition("=")
            out[name.strip()] = text.strip()
    return out


@pytest.fixture(scope="session")
def rover():
    return read_model(fixture_path("rover.json"))


@pytest.fixture(scope="session")
def phis():
    return {k: fm.parse(v) for k, v in rover_formulas().items()}


def names(m, states):
    return {m.states[s] for s in states}


@pytest.fixture
def fork():
    """s0 branches to s1 (p, absorbing) or s2 (absorbing, unlabelled)."""
    return build(
        agents={"a": ["l", "r"]},
        states={"s0": [], "s1": ["p"], "s2": []},
        initial="s0",
        protocol={("a", "s0"): ["l", "r"], ("a", "s1"): ["l"], ("a", "s2"): ["l"]},
        transitions={("s0", ("l",)): "s1", ("s0", ("r",)): "s2",
                     ("s1", ("l",)): "s1", ("s2", ("l",)): "s2"},
        atoms=["p"])


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE: list[str] = []


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Note one acceptance line; it is printed now and again in the summary."""
    line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE.append(line)
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
