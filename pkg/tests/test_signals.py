import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netpdae.signals import PiecewisePoly, Poly, Sine, profile_from_json, signal_from_json


def test_poly_derivative_exact():
    p = Poly([1.0, 2.0, 3.0])
    assert p(2.0) == 1 + 4 + 12
    assert p.derivative()(2.0) == 2 + 12
    assert Poly([5.0]).derivative().is_zero()


def test_sine_derivative():
    s = Sine(2.0, 3.0, 0.1, 1.0)
    t = np.linspace(0, 1, 7)
    assert np.allclose(s.derivative()(t), 6.0 * np.cos(3.0 * t + 0.1))


def test_parse_signals():
    assert signal_from_json(2.0) == Poly([2.0])
    assert signal_from_json([0, 1]) == Poly([0, 1])
    assert isinstance(signal_from_json({"kind": "sin", "omega": 2}), Sine)
    with pytest.raises(ValueError):
        signal_from_json("x")


def test_piecewise_bounds_and_integral():
    pp = PiecewisePoly([0.0, 0.5, 1.0], [[1.0], [0.0, 0.0, 4.0]])
    lo, hi = pp.bounds()
    assert lo == 1.0 and hi == 4.0
    assert np.isclose(pp.integrate(0.0, 1.0), 0.5 + 4.0 * (1 - 0.125) / 3)
    assert profile_from_json(pp.to_json(), 1.0) == pp


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.floats(0.0, 0.9), st.floats(0.05, 0.1))
def test_integral_matches_quadrature(coeffs, a, w):
    pp = PiecewisePoly.poly(coeffs, 1.0)
    b = a + w
    x, wt = np.polynomial.legendre.leggauss(6)
    xm = 0.5 * (b - a) * x + 0.5 * (a + b)
    ref = 0.5 * (b - a) * np.sum(wt * pp(xm) * xm)
    assert np.isclose(pp.integrate(a, b, [0.0, 1.0]), ref, rtol=1e-12, atol=1e-14)
