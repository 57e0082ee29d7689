"""Butcher tableaus and the structural checks the stage schemes rely on."""

from fractions import Fraction

import numpy as np


class TableauError(ValueError):
    pass


def check_order_conditions(tab, p, q, tol=1e-12):
    """True iff sum_j b_j c_j^(k-1) = 1/k for k <= p and sum_j A_ij c_j^(k-1) = c_i^k / k for k <= q."""
    A, b, c = tab.A, tab.b, tab.c
    for k in range(1, p + 1):
        if abs(b @ c ** (k - 1) - 1.0 / k) > tol:
            return False
    for k in range(1, q + 1):
        if np.abs(A @ c ** (k - 1) - c ** k / k).max() > tol:
            return False
    return True


def check_algebraic_stability(tab, tol=-1e-12):
    """Eigen-check of diag(b) A + A^T diag(b) - b b^T together with b >= 0."""
    A, b = tab.A, tab.b
    M = np.diag(b) @ A + A.T @ np.diag(b) - np.outer(b, b)
    lam = float(np.linalg.eigvalsh(0.5 * (M + M.T)).min())
    return {"psd": bool(lam >= tol and np.all(b >= 0)), "min_eig": lam}


def stiff_accuracy_defect(tab):
    """|b^T A^{-1} 1 - 1|."""
    return abs(float(tab.b @ np.linalg.solve(tab.A, np.ones(tab.s))) - 1.0)


class ButcherTableau:
    """Runge-Kutta coefficients (A, b, c) with declared order p and stage order q.

    Construction fails unless A is invertible, b^T A^{-1} 1 = 1, the method is
    algebraically stable, the declared order conditions hold and p > q
    (p = q = 1 is allowed for a single stage).
    """

    def __init__(self, A, b, c, p, q, name="custom"):
        self.A = np.atleast_2d(np.asarray(A, dtype=np.float64))
        self.b = np.atleast_1d(np.asarray(b, dtype=np.float64))
        self.c = np.atleast_1d(np.asarray(c, dtype=np.float64))
        self.p, self.q, self.name = int(p), int(q), name
        s = self.b.size
        if self.A.shape != (s, s) or self.c.size != s:
            raise TableauError("inconsistent tableau dimensions")
        if abs(np.linalg.det(self.A)) < 1e-14:
            raise TableauError("A must be invertible")
        self.Ainv = np.linalg.inv(self.A)
        if stiff_accuracy_defect(self) > 1e-12:
            raise TableauError("b^T A^-1 1 must equal 1")
        stab = check_algebraic_stability(self)
        if not stab["psd"]:
            raise TableauError(f"not algebraically stable (min eigenvalue {stab['min_eig']:.3e})")
        # p >= q + 1 for every multi-stage method shipped here; one-stage
        # implicit Euler has p = q = 1
        if self.p < self.q + (1 if s > 1 else 0):
            raise TableauError("order p must exceed stage order q")
        if not check_order_conditions(self, self.p, self.q):
            raise TableauError(f"order conditions for (p, q) = ({self.p}, {self.q}) fail")

    @property
    def s(self):
        return self.b.size

    @property
    def node_weights(self):
        """Row vector b^T A^{-1} forming step values from stage values."""
        return self.b @ self.Ainv

    def stability_function(self, z):
        """R(z) = 1 + z b^T (I - z A)^{-1} 1."""
        z = np.atleast_1d(np.asarray(z, dtype=complex))
        one = np.ones(self.s)
        out = np.empty(z.shape, dtype=complex)
        for i, zi in enumerate(z.ravel()):
            out.ravel()[i] = 1.0 + zi * (self.b @ np.linalg.solve(np.eye(self.s) - zi * self.A, one))
        return out

    def as_fractions(self, max_denominator=1000):
        fr = (lambda v: Fraction(float(v)).limit_denominator(max_denominator))
        return {"A": [[fr(x) for x in row] for row in self.A], "b": [fr(x) for x in self.b],
                "c": [fr(x) for x in self.c]}

    def __str__(self):
        f = self.as_fractions()
        rows = [f"{str(ci):>8} | " + "  ".join(f"{str(a):>8}" for a in row) for ci, row in zip(f["c"], f["A"])]
        rows.append("-" * len(rows[0]))
        rows.append(" " * 8 + " | " + "  ".join(f"{str(x):>8}" for x in f["b"]))
        return f"{self.name} (p={self.p}, q={self.q})\n" + "\n".join(rows)

    def __repr__(self):
        return f"ButcherTableau(name={self.name!r}, s={self.s}, p={self.p}, q={self.q})"


def _radau3():
    r6 = np.sqrt(6.0)
    A = [[(88 - 7 * r6) / 360, (296 - 169 * r6) / 1800, (-2 + 3 * r6) / 225],
         [(296 + 169 * r6) / 1800, (88 + 7 * r6) / 360, (-2 - 3 * r6) / 225],
         [(16 - r6) / 36, (16 + r6) / 36, 1 / 9]]
    b = [(16 - r6) / 36, (16 + r6) / 36, 1 / 9]
    c = [(4 - r6) / 10, (4 + r6) / 10, 1.0]
    return ButcherTableau(A, b, c, p=5, q=3, name="radau-iia-3")


_BUILDERS = {
    "implicit-euler": lambda: ButcherTableau([[1.0]], [1.0], [1.0], p=1, q=1, name="implicit-euler"),
    "radau-iia-2": lambda: ButcherTableau([[5 / 12, -1 / 12], [3 / 4, 1 / 4]], [3 / 4, 1 / 4], [1 / 3, 1.0],
                                          p=3, q=2, name="radau-iia-2"),
    "radau-iia-3": _radau3,
}

ALIASES = {"euler": "implicit-euler", "radau2": "radau-iia-2", "radau3": "radau-iia-3"}


def tableau(name):
    key = ALIASES.get(name, name)
    if key not in _BUILDERS:
        raise KeyError(f"unknown tableau {name!r}; known: {sorted(_BUILDERS)}")
    return _BUILDERS[key]()
