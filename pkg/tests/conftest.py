import json
from importlib import resources

import numpy as np
import pytest

from netpdae.assembly import MeshParams, assemble
from netpdae.experiments import prepare
from netpdae.network import load_scenario


def fig1_dict():
    return json.loads(resources.files("netpdae").joinpath("scenarios", "fig1-network.json").read_text())


def damped_fig1_dict(a=0.5):
    """The fig1 scenario with a > 0 on every edge; its solution is transient."""
    d = fig1_dict()
    for e in d["edges"]:
        e["a"] = a
    return d


def single_edge_dict(n_vertices_dirichlet=2, h=0.0, f=0.0, d=1.0, a=0.0):
    kinds = ["dirichlet", "dirichlet" if n_vertices_dirichlet == 2 else "flux"]
    data = {"h": {"v1": h}, "f": {"e1": f}}
    if n_vertices_dirichlet == 2:
        data["h"]["v2"] = 0.0
    return {"vertices": [{"id": "v1", "kind": kinds[0]}, {"id": "v2", "kind": kinds[1]}],
            "edges": [{"id": "e1", "tail": "v1", "head": "v2", "length": 1.0, "a": a, "d": d}],
            "data": data, "initial": {}}


@pytest.fixture(scope="session")
def fig1():
    return load_scenario("fig1-network")


@pytest.fixture(scope="session")
def fig1_sys(fig1):
    return assemble(fig1.network, MeshParams(10))


@pytest.fixture(scope="session")
def fig1_prepared():
    return prepare("fig1-network", 10)


@pytest.fixture(scope="session")
def damped_prepared():
    return prepare(damped_fig1_dict(), 10)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_REPORT = pytest.StashKey[list]()


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for the terminal summary."""
    lines = request.config.stash.setdefault(_REPORT, [])

    def add(label, ok, detail):
        lines.append(f"{'PASS' if ok else 'FAIL'}  {label}: {detail}")
        return ok
    return add


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_REPORT, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
