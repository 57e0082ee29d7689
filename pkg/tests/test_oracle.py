import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import solve_ivp

from netpdae.assembly import MeshParams, assemble, discretize_data
from netpdae.experiments import get_scenario
from netpdae.norms import fit_power_law
from netpdae.oracle import (OracleError, eps_for_split_index, initial_flux_norm_sq, integer_split_index,
                            lower_bound_sq, modal_amplitudes, modal_residual, parabolic_limit_solution,
                            series_flux_cell_averages, series_initial_flux, series_multiplier,
                            series_potential_norm, series_solution_hyperbolic, upper_bound_sq)
from netpdae.steppers import TimeGrid, solve_hyperbolic_reference

ALPHA = 0.55


def test_split_index():
    for K in (1, 4, 10, 37):
        assert integer_split_index(eps_for_split_index(K)) == K
    with pytest.raises(OracleError):
        integer_split_index(1e-3)
    with pytest.raises(OracleError):
        series_solution_hyperbolic([0.5], [0.1], 1e-3, ALPHA, 50)
    with pytest.raises(OracleError):
        modal_amplitudes([0.1], eps_for_split_index(4), 4)


def test_initial_flux_examples():
    assert abs(series_initial_flux(0.5, 0.3, 1)) < 1e-16
    direct = sum(k ** -ALPHA for k in range(1, 11))
    assert np.isclose(series_initial_flux(0.0, ALPHA, 10), direct / math.pi, rtol=1e-14)
    # integral bounds for the decreasing summand
    lo = (11 ** (1 - ALPHA) - 1) / (1 - ALPHA)
    hi = 1 + (10 ** (1 - ALPHA) - 1) / (1 - ALPHA)
    assert lo <= direct <= hi
    partial = [initial_flux_norm_sq(ALPHA, K) for K in (10, 100, 1000)]
    assert partial[0] < partial[1] < partial[2] < initial_flux_norm_sq(ALPHA)


def test_cell_averages_match_quadrature():
    from scipy.integrate import quad
    xb = np.linspace(0, 1, 6)
    avg = series_flux_cell_averages(xb, ALPHA, 40)
    for i in range(5):
        val, _ = quad(lambda x: series_initial_flux(x, ALPHA, 40), xb[i], xb[i + 1], limit=200)
        assert np.isclose(avg[i], val / 0.2, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("K", [1, 4, 10])
def test_modal_residual(K, rng):
    eps = eps_for_split_index(K)
    t = np.sort(rng.random(30)) * 20 * eps
    assert modal_residual(t, eps, 3 * K + 5).max() <= 1e-9


def test_trace_at_zero():
    eps = eps_for_split_index(4)
    x = np.linspace(0, 1, 21)
    p, m = series_solution_hyperbolic(x, [0.0], eps, ALPHA, 40)
    assert np.all(p == 0.0)
    assert np.allclose(m[0], series_initial_flux(x, ALPHA, 40), rtol=1e-13, atol=1e-13)
    p, _ = series_solution_hyperbolic([0.0, 1.0], np.linspace(0, 1, 7), eps, ALPHA, 40)
    assert np.abs(p).max() < 1e-12
    lam = series_multiplier([0.0], eps, ALPHA, 40)
    assert np.allclose(lam[0], [-series_initial_flux(0.0, ALPHA, 40), series_initial_flux(1.0, ALPHA, 40)])


def test_parseval_matches_pointwise():
    eps = eps_for_split_index(3)
    t = np.array([0.0, 0.01, 0.05])
    x = np.linspace(0, 1, 4001)
    p, _ = series_solution_hyperbolic(x, t, eps, ALPHA, 30)
    direct = np.sqrt(np.trapezoid(p ** 2, x, axis=1))
    assert np.allclose(series_potential_norm(t, eps, ALPHA, 30), direct, rtol=1e-6, atol=1e-14)


def test_bound_chain():
    eps = eps_for_split_index(4)
    t = np.unique(np.concatenate((np.linspace(0, 1, 2001), np.geomspace(eps / 100, 1, 3000))))
    sup = series_potential_norm(t, eps, ALPHA, 12810).max() ** 2
    low, up = lower_bound_sq(eps, ALPHA), upper_bound_sq(eps, ALPHA)
    assert 0 < low <= sup <= up
    # the lower bound uses the value at t = eps
    assert series_potential_norm([eps], eps, ALPHA, 12810)[0] ** 2 >= low


def test_truncation_tail():
    eps = eps_for_split_index(4)
    t = np.linspace(0, 0.2, 401)
    for K in (50, 200):
        a = series_potential_norm(t, eps, ALPHA, K)
        b = series_potential_norm(t, eps, ALPHA, 2 * K)
        # per-mode energy bound ||p_k(t)||^2 <= eps ||m_k(0)||^2
        k = np.arange(K + 1, 2 * K + 1)
        tail = math.sqrt(eps * np.sum(1.0 / (2 * math.pi ** 2 * k ** (2 * ALPHA))))
        assert abs(a.max() - b.max()) <= tail
        assert np.all(np.abs(a - b) <= tail)


def test_parabolic_limit_cases():
    c1 = parabolic_limit_solution("C1")
    assert np.all(c1.p0([0.2, 0.7], [0.0, 1.0]) == 0) and np.all(c1.lam0([0.5]) == 0)
    c2 = parabolic_limit_solution("C2", kmax=50)
    x = np.linspace(0, 1, 9)
    k = np.arange(1, 51)
    init = (np.sin(np.pi * np.outer(x, k)) / k ** (1 + ALPHA)).sum(axis=1)
    assert np.allclose(c2.p0(x, [0.0])[0], init, atol=1e-14)
    # m0 = -d/dx p0 checked by central differences
    h = 1e-6
    fd = -(c2.p0([0.3 + h], [0.01]) - c2.p0([0.3 - h], [0.01])) / (2 * h)
    assert np.isclose(c2.m0([0.3], [0.01])[0, 0], fd[0, 0], rtol=1e-6)
    with pytest.raises(ValueError):
        parabolic_limit_solution("C3")


def test_c2_modes_against_ode_integration():
    c2 = parabolic_limit_solution("C2", kmax=5)
    t = np.linspace(0, 0.1, 11)
    amp = c2.amplitudes(t)
    for k in range(1, 6):
        sol = solve_ivp(lambda s, y: -(math.pi * k) ** 2 * y, (0, 0.1), [k ** -(1 + ALPHA)], t_eval=t,
                        method="DOP853", rtol=1e-13, atol=1e-16)
        assert np.abs(sol.y[0] - amp[:, k - 1]).max() <= 1e-10


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 12), st.floats(0.0, 5.0))
def test_modal_amplitudes_bounded(K, s):
    """phi_k' starts at 1 and the mode energy never grows."""
    eps = eps_for_split_index(K)
    kmax = K + 6
    phi, dphi = modal_amplitudes([0.0, s * eps], eps, kmax)
    assert np.all(phi[0] == 0) and np.allclose(dphi[0], 1.0)
    k = np.arange(1, kmax + 1)
    energy = (math.pi * k) ** 2 * phi[1] ** 2 + eps * dphi[1] ** 2
    assert np.all(energy <= eps * (1 + 1e-12))


def test_solver_converges_to_series():
    eps = eps_for_split_index(4)
    kmax, T, tau = 8, 0.02, 5e-5
    scn = get_scenario("single-pipe")
    errs, hs = [], []
    for n in (20, 40, 80):
        s = assemble(scn.network, MeshParams(n))
        data = discretize_data(s, scn.data)
        m0 = series_flux_cell_averages(s.edge_x[0], ALPHA, kmax)
        traj = solve_hyperbolic_reference(s, data, np.zeros(s.n_p), m0, TimeGrid.from_tau(T, tau),
                                          "radau-iia-2", eps, stride=40)
        p, _ = series_solution_hyperbolic(s.edge_x[0], traj.t, eps, ALPHA, kmax)
        errs.append(np.abs(p - traj.p[:, s.edge_nodes[0]]).max())
        hs.append(1.0 / n)
    assert fit_power_law(hs, errs).exponent > 0.5
    assert errs[0] > errs[1] > errs[2]
