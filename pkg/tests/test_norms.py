import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netpdae.assembly import MeshParams, assemble
from netpdae.network import scenario_from_dict
from netpdae.norms import NormSpec, fit_power_law, norm_C_L2, norm_L2_time
from netpdae.reconstruction import PW_POLYNOMIAL, TimeFunction

from conftest import single_edge_dict


@pytest.fixture(scope="module")
def pipe2():
    return assemble(scenario_from_dict(single_edge_dict()).network, MeshParams(2))


def test_examples(pipe2):
    t = np.linspace(0, 1, 5)
    n = pipe2.n_p
    assert norm_C_L2(TimeFunction(t, np.zeros((5, n))), pipe2.M2) == 0.0
    assert norm_L2_time(TimeFunction(t, np.zeros((5, n))), pipe2.M2) == 0.0
    assert np.isclose(norm_C_L2(TimeFunction(t, np.ones((5, n))), pipe2.M2), 1.0, rtol=1e-14)
    M = 4 * np.eye(3)
    assert np.isclose(norm_C_L2(TimeFunction(t, np.tile([1.0, 0, 0], (5, 1))), M), 2.0)
    w = np.array([1.0, 0.0, 0.0])
    f = TimeFunction(t, np.outer(t, w))
    assert np.isclose(norm_L2_time(f, 3 * np.eye(3)), 1.0, rtol=1e-14)


def test_h1_norm(pipe2):
    s = pipe2
    x = np.zeros(s.n_p)
    x[s.edge_nodes[0]] = s.edge_x[0]
    f = TimeFunction([0.0, 1.0], np.vstack((x, x)))
    # |x|^2_L2 = 1/3 and |x'|^2 = 1
    assert np.isclose(norm_L2_time(f, NormSpec.h1(s)), np.sqrt(1 / 3 + 1), rtol=1e-14)
    with pytest.raises(ValueError):
        NormSpec("W2", s.M2).squared(x)


def test_against_brute_force(rng, pipe2):
    t = np.sort(np.concatenate(([0.0, 1.0], rng.random(6))))
    f = TimeFunction(t, rng.standard_normal((t.size, pipe2.n_p)))
    total = 0.0
    for a, b in zip(t[:-1], t[1:]):
        s = np.linspace(a, b, 1001)
        total += np.trapezoid(NormSpec.l2(pipe2.M2).squared(f(s)), s)
    brute = np.sqrt(total)
    assert abs(norm_L2_time(f, pipe2.M2) - brute) <= 1e-6 * brute


def test_c_norm_uses_midpoints():
    f = TimeFunction(np.linspace(0, 1, 3), [[1.0], [-1.0], [1.0]], PW_POLYNOMIAL, 2)
    # the parabola 1 - 8t + 8t^2 peaks at the nodes, so midpoints add nothing here
    assert np.isclose(norm_C_L2(f, np.eye(1)), 1.0)
    g = TimeFunction(np.linspace(0, 1, 3), [[0.0], [0.0], [0.0]]) - TimeFunction([0.0, 1.0], [[0.0], [2.0]])
    assert np.isclose(norm_C_L2(g, np.eye(1)), 2.0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.floats(-5, 5))
def test_homogeneity_and_triangle(seed, c):
    r = np.random.default_rng(seed)
    t = np.linspace(0, 1, 6)
    M = r.standard_normal((3, 3))
    M = M @ M.T + np.eye(3)
    f, g = TimeFunction(t, r.standard_normal((6, 3))), TimeFunction(t, r.standard_normal((6, 3)), PW_POLYNOMIAL, 2)
    for nrm in (lambda h: norm_C_L2(h, M), lambda h: norm_L2_time(h, M)):
        assert np.isclose(nrm(f * c), abs(c) * nrm(f), rtol=1e-12, atol=1e-14)
        assert nrm(f + g) <= nrm(f) + nrm(g) + 1e-12


def test_fit_power_law():
    x = np.array([1.0, 0.5, 0.25])
    fit = fit_power_law(x, 3 * x ** 2)
    assert abs(fit.exponent - 2) < 1e-12 and abs(fit.prefactor - 3) < 1e-12 and fit.residual < 1e-12
    assert abs(fit_power_law([(1.0, 1.0), (0.1, 0.1)]).exponent - 1) < 1e-12
    assert np.allclose(fit([2.0]), 12.0)
    with pytest.raises(ValueError):
        fit_power_law([1.0], [1.0])
    with pytest.raises(ValueError):
        fit_power_law([1.0, 0.5], [0.0, 1.0])


@settings(max_examples=50, deadline=None)
@given(st.floats(-3, 3), st.floats(0.01, 100), st.integers(2, 10))
def test_fit_recovers_synthetic(alpha, C, k):
    x = np.geomspace(1e-3, 1, k)
    fit = fit_power_law(x, C * x ** alpha)
    assert abs(fit.exponent - alpha) < 1e-10 and abs(fit.prefactor / C - 1) < 1e-10
