import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netpdae.reconstruction import (PW_CONSTANT, PW_LINEAR, PW_POLYNOMIAL, Combination, TimeFunction,
                                    eps_combination, reconstruct, stencil_start)
from netpdae.steppers import TimeGrid, Trajectory


def traj_from(t, **fields):
    return Trajectory("test", TimeGrid(float(t[-1]), len(t) - 1), np.asarray(t), fields)


@pytest.mark.parametrize("degree", [0, 1, 2, 3, 4])
def test_polynomial_reproduction(degree, rng):
    t = np.linspace(0.0, 1.0, 11)
    coef = rng.standard_normal((degree + 1, 2))
    vals = np.polynomial.polynomial.polyval(t, coef).T
    f = reconstruct(traj_from(t, p0=vals), "p0", degree=degree)
    s = rng.random(100)
    if degree == 0:
        return  # constants only; covered below
    assert np.allclose(f(s), np.polynomial.polynomial.polyval(s, coef).T, atol=1e-12)


def test_constant_reproduction():
    t = np.linspace(0.0, 2.0, 5)
    f = TimeFunction(t, np.full((5, 3), 1.5), PW_CONSTANT)
    assert np.all(f(np.linspace(0, 2, 17)) == 1.5)


def test_right_endpoint_convention():
    t = np.array([0.0, 1.0, 2.0])
    f = TimeFunction(t, [0.0, 10.0, 20.0], PW_CONSTANT)
    assert f([0.0, 0.5, 1.0, 1.0001, 2.0])[:, 0].tolist() == [0.0, 10.0, 10.0, 20.0, 20.0]


def test_degree_equivalences(rng):
    t = np.sort(np.concatenate(([0.0, 1.0], rng.random(8))))
    v = rng.standard_normal((t.size, 3))
    tr = traj_from(t, m0=v)
    s = rng.random(200)
    assert np.array_equal(reconstruct(tr, "m0", degree=0)(s), TimeFunction(t, v, PW_CONSTANT)(s))
    assert np.array_equal(reconstruct(tr, "m0", degree=1)(s), TimeFunction(t, v, PW_LINEAR)(s))
    assert np.allclose(reconstruct(tr, "m0", degree=1)(s), TimeFunction(t, v, PW_POLYNOMIAL, 1)(s), atol=1e-14)


def test_stencil_example():
    f = TimeFunction(np.linspace(0, 1, 11), np.zeros(11), PW_POLYNOMIAL, 2)
    assert f.stencil(4) == [2, 3, 4]
    assert f.stencil(1) == [0, 1, 2]
    assert f.stencil(10) == [8, 9, 10]
    g = TimeFunction(np.linspace(0, 1, 11), np.zeros(11), PW_POLYNOMIAL, 3)
    assert g.stencil(4) == [2, 3, 4, 5]
    assert g.stencil(10) == [7, 8, 9, 10]


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 6), st.integers(6, 30), st.data())
def test_stencil_contains_interval(degree, n, data):
    j = data.draw(st.integers(1, n))
    k0 = int(stencil_start(j, degree, n))
    nodes = set(range(k0, k0 + degree + 1))
    assert {j - 1, j} <= nodes and min(nodes) >= 0 and max(nodes) <= n


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 31 - 1), st.integers(0, 4))
def test_interpolation_property(seed, degree):
    r = np.random.default_rng(seed)
    t = np.cumsum(np.concatenate(([0.0], 0.1 + r.random(9))))
    v = r.standard_normal((10, 2))
    f = TimeFunction(t, v, PW_POLYNOMIAL, degree)
    for j in range(1, 10):
        for k in f.stencil(j):
            # evaluate inside interval j by continuity at stencil nodes of that interval
            if k in (j - 1, j):
                lo, hi = t[j - 1], t[j]
                s = lo + (hi - lo) * (1e-9 if k == j - 1 else 1.0)
                assert np.allclose(f(s), v[k], atol=1e-7)


def test_pw_linear_second_order():
    errs = []
    for n in (10, 20, 40):
        t = np.linspace(0, 1, n + 1)
        f = TimeFunction(t, np.sin(3 * t))
        s = np.linspace(0, 1, 2001)
        errs.append(np.abs(f(s)[:, 0] - np.sin(3 * s)).max())
    assert np.allclose(np.log2(np.array(errs[:-1]) / errs[1:]), 2.0, atol=0.1)


def test_eps_combination(rng):
    t = np.linspace(0, 1, 11)
    a, b = rng.standard_normal((11, 4)), rng.standard_normal((11, 4))
    f0, f1 = TimeFunction(t, a, PW_POLYNOMIAL, 2), TimeFunction(t, b)
    s = rng.random(100)
    assert np.array_equal(eps_combination(f0, f1, 0.0)(s), f0(s))
    assert np.allclose(eps_combination(f0, f0, 1.0)(s), 2 * f0(s), rtol=1e-15)
    assert np.allclose(eps_combination(f0, f1, 1e-3)(s), f0(s) + 1e-3 * f1(s), atol=1e-14)
    with pytest.raises(ValueError):
        eps_combination(f0, TimeFunction(np.linspace(0, 1, 12), np.zeros(12)), 1.0)


def test_combination_samples_first_grid():
    f = TimeFunction(np.linspace(0, 1, 3), [0.0, 1.0, 2.0])
    g = TimeFunction(np.linspace(0, 1, 5), np.zeros(5))
    d = f - g
    assert isinstance(d, Combination)
    assert np.allclose(d.sample_times(), [0, 0.25, 0.5, 0.75, 1.0])
    assert np.allclose(f.sample_times(0.1), np.unique(np.r_[0, 0.25, 0.5, 0.75, 1, 0.025, 0.05, 0.1, 0.2, 0.4, 0.8]))


def test_errors():
    tr = traj_from(np.linspace(0, 1, 3), p0=np.zeros((3, 1)))
    with pytest.raises(KeyError):
        reconstruct(tr, "p1")
    with pytest.raises(ValueError):
        reconstruct(tr, "p0", degree=3)
    with pytest.raises(ValueError):
        TimeFunction([0.0, 0.0, 1.0], np.zeros(3))
    with pytest.raises(ValueError):
        TimeFunction([0.0, 1.0], np.zeros(2), "spline")
