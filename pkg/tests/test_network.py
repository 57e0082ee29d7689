import json

import pytest
from hypothesis import given, settings, strategies as st

from netpdae.network import (BUILTIN, NetworkError, build_data, build_network, dump_scenario, incidence_sign,
                             load_scenario, scenario_from_dict)

from conftest import fig1_dict


def test_fig1_network_signs(fig1):
    net = fig1.network
    assert len(net.vertices) == 6 and len(net.edges) == 6
    assert incidence_sign(net, "e1", "v1") == -1
    assert incidence_sign(net, "e1", "v2") == +1
    with pytest.raises(NetworkError):
        incidence_sign(net, "e1", "v3")


def test_sign_antisymmetry(fig1):
    net = fig1.network
    for k, e in enumerate(net.edges):
        assert incidence_sign(net, k, e.tail) + incidence_sign(net, k, e.head) == 0


def test_fig1_classification(fig1):
    net = fig1.network
    assert [net.vertices[i].id for i in net.dirichlet] == ["v1", "v6"]
    assert [net.vertices[i].id for i in net.flux] == ["v2", "v3", "v4", "v5"]
    assert net.d_min == 1.0 and net.a_max == 0.0


def test_single_edge_both_dirichlet():
    net = build_network({"vertices": [{"id": "a", "kind": "dirichlet"}, {"id": "b", "kind": "dirichlet"}],
                         "edges": [{"id": "e", "tail": "a", "head": "b"}]})
    assert net.dirichlet == (0, 1)


def _two_edges(kind_mid):
    return {"vertices": [{"id": "a", "kind": "dirichlet"}, {"id": "m", "kind": kind_mid},
                         {"id": "b", "kind": "dirichlet"}],
            "edges": [{"id": "e1", "tail": "a", "head": "m"}, {"id": "e2", "tail": "m", "head": "b"}]}


def test_mixed_orientation_rejected():
    with pytest.raises(NetworkError, match="mixed orientation at boundary vertex"):
        build_network(_two_edges("dirichlet"))
    build_network(_two_edges("flux"))


@pytest.mark.parametrize("patch, msg", [
    ({"d": 0.0}, "d must be positive"),
    ({"d": [1.0, -2.0]}, "d must be positive"),
    ({"a": -0.1}, "a must be non-negative"),
    ({"length": 0.0}, "length must be positive"),
])
def test_coefficient_validation(patch, msg):
    spec = _two_edges("flux")
    spec["edges"][0].update(patch)
    with pytest.raises(NetworkError, match=msg):
        build_network(spec)


def test_isolated_vertex_and_missing_dirichlet():
    spec = _two_edges("flux")
    spec["vertices"].append({"id": "z", "kind": "flux"})
    with pytest.raises(NetworkError, match="isolated"):
        build_network(spec)
    spec = _two_edges("flux")
    for v in spec["vertices"]:
        v["kind"] = "flux"
    with pytest.raises(NetworkError, match="dirichlet"):
        build_network(spec)


def test_data_kind_checks(fig1):
    with pytest.raises(NetworkError):
        build_data(fig1.network, {"h": {"v2": 1.0}})
    with pytest.raises(NetworkError):
        build_data(fig1.network, {"r": {"v1": 1.0}})


def test_builtins_load():
    for name in BUILTIN:
        assert load_scenario(name).network.edges


def test_round_trip(tmp_path, fig1):
    path = tmp_path / "s.json"
    dump_scenario(fig1, path)
    again = load_scenario(str(path))
    assert again.network == fig1.network
    assert again.data.to_dict(again.network) == fig1.data.to_dict(fig1.network)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 7), st.data())
def test_random_tree_round_trip(nv, data):
    """Random trees with leaves as dirichlet vertices survive serialization."""
    parents = [data.draw(st.integers(0, i - 1)) for i in range(1, nv)]
    edges = [{"id": f"e{i}", "tail": f"v{p}", "head": f"v{i}",
              "length": data.draw(st.floats(0.1, 3.0)), "d": data.draw(st.floats(0.1, 5.0))}
             for i, p in zip(range(1, nv), parents)]
    deg = {f"v{i}": 0 for i in range(nv)}
    for e in edges:
        deg[e["tail"]] += 1
        deg[e["head"]] += 1
    heads = {e["head"] for e in edges}
    verts = []
    for i in range(nv):
        vid = f"v{i}"
        leaf = deg[vid] == 1 and (vid in heads or i == 0)
        verts.append({"id": vid, "kind": "dirichlet" if leaf else "flux"})
    if not any(v["kind"] == "dirichlet" for v in verts):
        verts[-1]["kind"] = "dirichlet"
    spec = {"vertices": verts, "edges": edges}
    try:
        net = build_network(spec)
    except NetworkError:
        return
    net2 = build_network(json.loads(json.dumps(net.to_dict())))
    assert net2 == net


def test_scenario_unknown_edge_in_initial():
    d = fig1_dict()
    d["initial"]["p"]["nope"] = 1.0
    with pytest.raises(KeyError):
        scenario_from_dict(d)
