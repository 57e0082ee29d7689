"""Pure-Python kernels, used when the compiled core is unavailable.

Same algorithms and array conventions as ``_core.pyx``: left-looking sparse LU
with partial pivoting (column-wise sparse triangular solves driven by a
depth-first reach), unit lower L with the unit diagonal stored first in each
column, U with the diagonal stored last.
"""

import numpy as np
from scipy.linalg import solve_triangular

BACKEND = "python"


def _reach(Lp, Li, pinv, Ap, Ai, col, xi, mark, stamp, n):
    top = n
    pstack = [0] * n
    for p in range(Ap[col], Ap[col + 1]):
        j0 = Ai[p]
        if mark[j0] == stamp:
            continue
        head = 0
        stack = [j0]
        while head >= 0:
            j = stack[head]
            jnew = pinv[j]
            if mark[j] != stamp:
                mark[j] = stamp
                pstack[head] = 0 if jnew < 0 else Lp[jnew] + 1
            done = True
            p2 = 0 if jnew < 0 else Lp[jnew + 1]
            for pp in range(pstack[head], p2):
                i = Li[pp]
                if mark[i] == stamp:
                    continue
                pstack[head] = pp
                head += 1
                if head < len(stack):
                    stack[head] = i
                else:
                    stack.append(i)
                done = False
                break
            if done:
                head -= 1
                top -= 1
                xi[top] = j
    return top


def lu_factor(n, Ap, Ai, Ax, q, pivtol):
    """Factorize A[:, q] = P^T L U; returns CSC arrays of L and U and pinv."""
    Lp = [0] * (n + 1)
    Up = [0] * (n + 1)
    Li, Lx, Ui, Ux = [], [], [], []
    pinv = [-1] * n
    x = [0.0] * n
    xi = [0] * n
    mark = [-1] * n
    for k in range(n):
        Lp[k] = len(Li)
        Up[k] = len(Ui)
        col = q[k]
        top = _reach(Lp, Li, pinv, Ap, Ai, col, xi, mark, k, n)
        for p in range(top, n):
            x[xi[p]] = 0.0
        for p in range(Ap[col], Ap[col + 1]):
            x[Ai[p]] = Ax[p]
        for px in range(top, n):
            j = xi[px]
            J = pinv[j]
            if J < 0:
                continue
            xj = x[j]
            for p in range(Lp[J] + 1, Lp[J + 1]):
                x[Li[p]] -= Lx[p] * xj
        ipiv = -1
        a = -1.0
        for p in range(top, n):
            i = xi[p]
            if pinv[i] < 0:
                t = abs(x[i])
                if t > a:
                    a = t
                    ipiv = i
            else:
                Ui.append(pinv[i])
                Ux.append(x[i])
        if ipiv < 0 or a <= pivtol:
            raise ZeroDivisionError(f"matrix is numerically singular at column {k}")
        pivot = x[ipiv]
        Ui.append(k)
        Ux.append(pivot)
        pinv[ipiv] = k
        Li.append(ipiv)
        Lx.append(1.0)
        for p in range(top, n):
            i = xi[p]
            if pinv[i] < 0:
                Li.append(i)
                Lx.append(x[i] / pivot)
            x[i] = 0.0
    Lp[n] = len(Li)
    Up[n] = len(Ui)
    Li = [pinv[i] for i in Li]
    as_i = (lambda v: np.asarray(v, dtype=np.int64))
    as_f = (lambda v: np.asarray(v, dtype=np.float64))
    return as_i(Lp), as_i(Li), as_f(Lx), as_i(Up), as_i(Ui), as_f(Ux), as_i(pinv)


class DenseFactors:
    """Dense copies of the triangular factors for LAPACK triangular solves."""

    def __init__(self, n, Lp, Li, Lx, Up, Ui, Ux, pinv, q):
        self.L = np.zeros((n, n))
        self.U = np.zeros((n, n))
        for k in range(n):
            s, e = Lp[k], Lp[k + 1]
            self.L[Li[s:e], k] = Lx[s:e]
            s, e = Up[k], Up[k + 1]
            self.U[Ui[s:e], k] = Ux[s:e]
        self.pinv = np.asarray(pinv)
        self.q = np.asarray(q)

    def solve(self, b):
        y = np.empty_like(b)
        y[self.pinv] = b
        y = solve_triangular(self.L, y, lower=True, unit_diagonal=True, check_finite=False)
        y = solve_triangular(self.U, y, lower=False, check_finite=False)
        x = np.empty_like(y)
        x[self.q] = y
        return x

    def solve_transpose(self, b):
        y = b[self.q]
        y = solve_triangular(self.U, y, trans="T", lower=False, check_finite=False)
        y = solve_triangular(self.L, y, trans="T", lower=True, unit_diagonal=True, check_finite=False)
        return y[self.pinv]


def lu_solve(n, Lp, Li, Lx, Up, Ui, Ux, pinv, q, b):
    """Solve A x = b with the factors of :func:`lu_factor` (plain loops)."""
    y = np.empty(n)
    y[pinv] = b
    for k in range(n):
        yk = y[k]
        if yk != 0.0:
            s, e = Lp[k] + 1, Lp[k + 1]
            y[Li[s:e]] -= Lx[s:e] * yk
    for k in range(n - 1, -1, -1):
        s, e = Up[k], Up[k + 1]
        y[k] /= Ux[e - 1]
        yk = y[k]
        if yk != 0.0:
            y[Ui[s:e - 1]] -= Ux[s:e - 1] * yk
    x = np.empty(n)
    x[q] = y
    return x


def march(solve, Gp, Gi, Gx, phi, fbasis, weights, y0, stride, out, increment=False):
    """Advance ``y`` through ``phi.shape[0]`` linear steps.

    Step j solves S Y = R_j + G y with stage loads R_j[s] = phi[j, s] @ fbasis,
    then sets y = sum_s weights[s] Y[s], or adds that sum to y when
    ``increment`` is set. Every ``stride``-th new state is written to
    consecutive rows of ``out``. Returns the final state.
    """
    nsteps, s, _ = phi.shape
    n = y0.size
    G = _csr_dense(Gp, Gi, Gx, s * n, n)
    y = y0.copy()
    row = 0
    for j in range(nsteps):
        rhs = (phi[j] @ fbasis).ravel() + G @ y
        Y = solve(rhs).reshape(s, n)
        y = y + weights @ Y if increment else weights @ Y
        if (j + 1) % stride == 0:
            out[row] = y
            row += 1
    return y


def _csr_dense(Gp, Gi, Gx, m, n):
    G = np.zeros((m, n))
    rows = np.repeat(np.arange(m), np.diff(Gp))
    G[rows, Gi] = Gx
    return G
