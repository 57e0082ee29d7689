from fractions import Fraction

import numpy as np
import pytest

from netpdae.butcher import (ButcherTableau, TableauError, check_algebraic_stability, check_order_conditions,
                             stiff_accuracy_defect, tableau)

NAMES = ["implicit-euler", "radau-iia-2", "radau-iia-3"]


def test_implicit_euler():
    t = tableau("implicit-euler")
    assert t.A.tolist() == [[1.0]] and t.b.tolist() == [1.0] and t.c.tolist() == [1.0]
    assert (t.p, t.q) == (1, 1)
    assert not check_order_conditions(t, 2, 1)
    assert check_algebraic_stability(t) == {"psd": True, "min_eig": 1.0}


def test_radau2():
    t = tableau("radau-iia-2")
    f = t.as_fractions()
    assert f["A"] == [[Fraction(5, 12), Fraction(-1, 12)], [Fraction(3, 4), Fraction(1, 4)]]
    assert f["b"] == [Fraction(3, 4), Fraction(1, 4)] and f["c"] == [Fraction(1, 3), Fraction(1)]
    assert check_order_conditions(t, 3, 2)
    assert not check_order_conditions(t, 4, 2)
    assert check_algebraic_stability(t)["psd"]
    assert stiff_accuracy_defect(t) < 1e-14


def test_radau3():
    t = tableau("radau3")
    assert t.s == 3 and check_order_conditions(t, 5, 3) and not check_order_conditions(t, 6, 3)
    assert np.allclose(t.node_weights, [0, 0, 1], atol=1e-12)


def test_not_algebraically_stable():
    bad = ButcherTableau.__new__(ButcherTableau)
    bad.A, bad.b = np.array([[1.0, 0.0], [0.0, -1.0]]), np.array([0.5, 0.5])
    assert not check_algebraic_stability(bad)["psd"]
    with pytest.raises(TableauError):
        ButcherTableau([[1.0, 0.0], [0.0, -1.0]], [0.5, 0.5], [0.0, 1.0], p=1, q=1)


def test_validator_rejects():
    with pytest.raises(TableauError, match="order conditions"):
        ButcherTableau([[1.0]], [1.0], [1.0], p=2, q=1)
    with pytest.raises(TableauError, match="invertible"):
        ButcherTableau([[0.0, 0.0], [0.5, 0.5]], [0.5, 0.5], [0.0, 1.0], p=2, q=1)
    # Gauss midpoint: b^T A^{-1} 1 = 2
    with pytest.raises(TableauError, match="A\\^-1"):
        ButcherTableau([[0.5]], [1.0], [0.5], p=2, q=1)
    with pytest.raises(TableauError, match="exceed"):
        ButcherTableau([[5 / 12, -1 / 12], [3 / 4, 1 / 4]], [3 / 4, 1 / 4], [1 / 3, 1.0], p=2, q=2)
    with pytest.raises(KeyError):
        tableau("rk4")


@pytest.mark.parametrize("name", NAMES)
def test_contractive_on_left_half_plane(name):
    t = tableau(name)
    re, im = np.meshgrid(-np.geomspace(1e-3, 1e4, 40), np.concatenate(([0.0], np.geomspace(1e-3, 1e4, 40))))
    z = np.concatenate(((re + 1j * im).ravel(), 1j * np.geomspace(1e-3, 1e3, 20)))
    assert np.abs(t.stability_function(z)).max() <= 1 + 1e-12


def test_printable():
    assert "5/12" in str(tableau("radau-iia-2"))
