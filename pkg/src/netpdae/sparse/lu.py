"""Sparse LU factorization with reusable factors.

The kernels come from the compiled ``_core`` extension when it is importable
and from the pure-Python ``_lu_py`` module otherwise.
"""

import numpy as np
from scipy.linalg import qr
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import reverse_cuthill_mckee

from . import _lu_py

try:
    from . import _core
except ImportError:  # pragma: no cover - depends on the build
    _core = None

_KERNELS = {"python": _lu_py}
if _core is not None:
    _KERNELS["cython"] = _core

BACKEND = "cython" if _core is not None else "python"

# dense triangular solves are used by the fallback below this size
_DENSE_LIMIT = 3000


def available_backends():
    return sorted(_KERNELS)


def set_backend(name):
    """Select the kernel module used by subsequent factorizations."""
    global BACKEND
    if name not in _KERNELS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    BACKEND = name


class SingularMatrixError(ZeroDivisionError):
    pass


def column_ordering(A, method="rcm"):
    n = A.shape[0]
    if method == "natural":
        return np.arange(n, dtype=np.int64)
    if method != "rcm":
        raise ValueError(f"unknown ordering {method!r}")
    pattern = csr_matrix((np.ones(A.nnz), A.indices, A.indptr), shape=A.shape)
    pattern = pattern + pattern.T
    return np.asarray(reverse_cuthill_mckee(pattern.tocsr(), symmetric_mode=True), dtype=np.int64)


class Factorization:
    """LU factors of a square CSRMatrix: A[:, q] = P^T L U."""

    def __init__(self, A, ordering="rcm", backend=None):
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square")
        self.backend = backend or BACKEND
        kern = _KERNELS[self.backend]
        self.n = A.shape[0]
        self.shape = A.shape
        self.norm_max = A.max_abs()
        self.norm_1 = _norm1(A)
        self.q = column_ordering(A, ordering)
        Ap, Ai, Ax = A.to_csc_arrays()
        try:
            f = kern.lu_factor(self.n, Ap, Ai, Ax, self.q, 1e-14 * self.norm_max)
        except ZeroDivisionError as exc:
            raise SingularMatrixError(str(exc)) from None
        self.Lp, self.Li, self.Lx, self.Up, self.Ui, self.Ux, self.pinv = f
        self._dense = None
        if self.backend == "python" and self.n <= _DENSE_LIMIT:
            self._dense = _lu_py.DenseFactors(self.n, *f, self.q)
        self._rcond = None

    @property
    def fill(self):
        return int(self.Lp[-1] + self.Up[-1])

    def arrays(self):
        return (self.Lp, self.Li, self.Lx, self.Up, self.Ui, self.Ux, self.pinv, self.q)

    def _solve1(self, b):
        b = np.ascontiguousarray(b, dtype=np.float64)
        if self._dense is not None:
            return self._dense.solve(b)
        if self.backend == "cython":
            return _core.lu_solve(self.n, *self.arrays(), b)
        return _lu_py.lu_solve(self.n, *self.arrays(), b)

    def _solve1_t(self, b):
        b = np.ascontiguousarray(b, dtype=np.float64)
        if self._dense is not None:
            return self._dense.solve_transpose(b)
        if self.backend == "cython":
            return _core.lu_solve_transpose(self.n, *self.arrays(), b)
        return self._dense_factors().solve_transpose(b)

    def _dense_factors(self):
        if self._dense is None:
            self._dense = _lu_py.DenseFactors(self.n, *self.arrays())
        return self._dense

    def solve(self, b):
        b = np.asarray(b, dtype=np.float64)
        if b.shape[0] != self.n:
            raise ValueError("right-hand side has wrong length")
        if b.ndim == 1:
            return self._solve1(b)
        return np.column_stack([self._solve1(b[:, k]) for k in range(b.shape[1])])

    def solve_transpose(self, b):
        return self._solve1_t(np.asarray(b, dtype=np.float64))

    def rcond(self):
        """Reciprocal 1-norm condition estimate (Hager's method)."""
        if self._rcond is None:
            inv1 = _hager(self.solve, self.solve_transpose, self.n)
            self._rcond = 1.0 / (self.norm_1 * inv1) if inv1 > 0 else 0.0
        return self._rcond

    def march(self, G, phi, fbasis, weights, y0, stride, out, increment=False):
        """Run the fixed-matrix stepping kernel, see ``_lu_py.march``."""
        args = (G.indptr, G.indices, G.data, np.ascontiguousarray(phi), np.ascontiguousarray(fbasis),
                np.ascontiguousarray(weights, dtype=np.float64), np.ascontiguousarray(y0, dtype=np.float64),
                int(stride), out, bool(increment))
        if self.backend == "cython":
            return _core.march(self.arrays(), *args)
        return _lu_py.march(self._solve1, *args)


def factorize(A, ordering="rcm", backend=None):
    return Factorization(A, ordering=ordering, backend=backend)


def solve(F, b):
    return F.solve(b)


def row_rank(A, tol=1e-10):
    """Numerical rank from QR with column pivoting, relative tolerance ``tol``."""
    dense = A.to_dense() if hasattr(A, "to_dense") else np.atleast_2d(np.asarray(A, dtype=float))
    if dense.size == 0:
        return 0
    R = qr(dense, mode="r", pivoting=True)[0]
    d = np.abs(np.diag(R))
    if d.size == 0 or d[0] == 0.0:
        return 0
    return int(np.sum(d > tol * d[0]))


def _norm1(A):
    if A.nnz == 0:
        return 0.0
    return float(np.bincount(A.indices, weights=np.abs(A.data), minlength=A.shape[1]).max())


def _hager(solve, solve_t, n, maxiter=5):
    x = np.full(n, 1.0 / n)
    est = 0.0
    for _ in range(maxiter):
        y = solve(x)
        est_new = np.abs(y).sum()
        xi = np.sign(y)
        xi[xi == 0] = 1.0
        z = solve_t(xi)
        j = int(np.argmax(np.abs(z)))
        if est_new <= est or np.abs(z).max() <= z @ x:
            est = max(est, est_new)
            break
        est = est_new
        x = np.zeros(n)
        x[j] = 1.0
    return est
