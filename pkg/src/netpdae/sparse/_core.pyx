# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: sparse LU with partial pivoting, triangular solves and
the fixed-matrix time-stepping loop.

Array conventions match ``_lu_py``. All index arrays are int64, values float64.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport fabs

cnp.import_array()

BACKEND = "cython"

ctypedef cnp.int64_t idx_t


cdef idx_t _reach(idx_t n, idx_t[::1] Lp, idx_t* Li, idx_t[::1] pinv,
                  idx_t[::1] Ap, idx_t[::1] Ai, idx_t col,
                  idx_t[::1] xi, idx_t[::1] stack, idx_t[::1] pstack,
                  idx_t[::1] mark, idx_t stamp) noexcept nogil:
    cdef idx_t top = n, p, j0, head, j, jnew, pp, p2, i
    cdef bint done
    for p in range(Ap[col], Ap[col + 1]):
        j0 = Ai[p]
        if mark[j0] == stamp:
            continue
        head = 0
        stack[0] = j0
        while head >= 0:
            j = stack[head]
            jnew = pinv[j]
            if mark[j] != stamp:
                mark[j] = stamp
                pstack[head] = 0 if jnew < 0 else Lp[jnew] + 1
            done = True
            p2 = 0 if jnew < 0 else Lp[jnew + 1]
            pp = pstack[head]
            while pp < p2:
                i = Li[pp]
                if mark[i] != stamp:
                    pstack[head] = pp
                    head += 1
                    stack[head] = i
                    done = False
                    break
                pp += 1
            if done:
                head -= 1
                top -= 1
                xi[top] = j
    return top


def lu_factor(idx_t n, idx_t[::1] Ap, idx_t[::1] Ai, double[::1] Ax,
              idx_t[::1] q, double pivtol):
    """Factorize A[:, q] = P^T L U (left-looking, partial pivoting)."""
    cdef idx_t cap = 4 * (Ap[n] + n) + 16
    cdef cnp.ndarray[idx_t, ndim=1] Li_a = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] Lx_a = np.empty(cap, dtype=np.float64)
    cdef cnp.ndarray[idx_t, ndim=1] Ui_a = np.empty(cap, dtype=np.int64)
    cdef cnp.ndarray[double, ndim=1] Ux_a = np.empty(cap, dtype=np.float64)
    cdef idx_t[::1] Lp = np.zeros(n + 1, dtype=np.int64)
    cdef idx_t[::1] Up = np.zeros(n + 1, dtype=np.int64)
    cdef idx_t[::1] pinv = np.full(n, -1, dtype=np.int64)
    cdef double[::1] x = np.zeros(n, dtype=np.float64)
    cdef idx_t[::1] xi = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] stack = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] pstack = np.zeros(n, dtype=np.int64)
    cdef idx_t[::1] mark = np.full(n, -1, dtype=np.int64)
    cdef idx_t lnz = 0, unz = 0, k, col, top, p, px, j, J, ipiv, i
    cdef idx_t* Li
    cdef double* Lx
    cdef idx_t* Ui
    cdef double* Ux
    cdef double a, t, xj, pivot
    for k in range(n):
        if lnz + n > cap or unz + n > cap:
            cap = 2 * cap + n
            Li_a = np.resize(Li_a, cap)
            Lx_a = np.resize(Lx_a, cap)
            Ui_a = np.resize(Ui_a, cap)
            Ux_a = np.resize(Ux_a, cap)
        Li = <idx_t*> Li_a.data
        Lx = <double*> Lx_a.data
        Ui = <idx_t*> Ui_a.data
        Ux = <double*> Ux_a.data
        Lp[k] = lnz
        Up[k] = unz
        col = q[k]
        top = _reach(n, Lp, Li, pinv, Ap, Ai, col, xi, stack, pstack, mark, k)
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
                t = fabs(x[i])
                if t > a:
                    a = t
                    ipiv = i
            else:
                Ui[unz] = pinv[i]
                Ux[unz] = x[i]
                unz += 1
        if ipiv < 0 or a <= pivtol:
            raise ZeroDivisionError(f"matrix is numerically singular at column {k}")
        pivot = x[ipiv]
        Ui[unz] = k
        Ux[unz] = pivot
        unz += 1
        pinv[ipiv] = k
        Li[lnz] = ipiv
        Lx[lnz] = 1.0
        lnz += 1
        for p in range(top, n):
            i = xi[p]
            if pinv[i] < 0:
                Li[lnz] = i
                Lx[lnz] = x[i] / pivot
                lnz += 1
            x[i] = 0.0
    Lp[n] = lnz
    Up[n] = unz
    Li = <idx_t*> Li_a.data
    for p in range(lnz):
        Li[p] = pinv[Li[p]]
    return (np.asarray(Lp), Li_a[:lnz].copy(), Lx_a[:lnz].copy(),
            np.asarray(Up), Ui_a[:unz].copy(), Ux_a[:unz].copy(), np.asarray(pinv))


cdef void _solve(idx_t n, idx_t[::1] Lp, idx_t[::1] Li, double[::1] Lx,
                 idx_t[::1] Up, idx_t[::1] Ui, double[::1] Ux,
                 idx_t[::1] pinv, idx_t[::1] q, double* b, double* y,
                 double* x) noexcept nogil:
    cdef idx_t k, p, e
    cdef double yk
    for k in range(n):
        y[pinv[k]] = b[k]
    for k in range(n):
        yk = y[k]
        if yk != 0.0:
            for p in range(Lp[k] + 1, Lp[k + 1]):
                y[Li[p]] -= Lx[p] * yk
    for k in range(n - 1, -1, -1):
        e = Up[k + 1] - 1
        y[k] /= Ux[e]
        yk = y[k]
        if yk != 0.0:
            for p in range(Up[k], e):
                y[Ui[p]] -= Ux[p] * yk
    for k in range(n):
        x[q[k]] = y[k]


def lu_solve(idx_t n, idx_t[::1] Lp, idx_t[::1] Li, double[::1] Lx,
             idx_t[::1] Up, idx_t[::1] Ui, double[::1] Ux,
             idx_t[::1] pinv, idx_t[::1] q, double[::1] b):
    """Solve A x = b with the factors of :func:`lu_factor`."""
    cdef double[::1] y = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n, dtype=np.float64)
    with nogil:
        _solve(n, Lp, Li, Lx, Up, Ui, Ux, pinv, q, &b[0], &y[0], <double*> x.data)
    return x


def lu_solve_transpose(idx_t n, idx_t[::1] Lp, idx_t[::1] Li, double[::1] Lx,
                       idx_t[::1] Up, idx_t[::1] Ui, double[::1] Ux,
                       idx_t[::1] pinv, idx_t[::1] q, double[::1] b):
    """Solve A^T x = b with the factors of :func:`lu_factor`."""
    cdef double[::1] y = np.empty(n, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] x = np.empty(n, dtype=np.float64)
    cdef idx_t k, p, e
    cdef double s
    with nogil:
        for k in range(n):
            y[k] = b[q[k]]
        # U^T is lower triangular: column k of U is row k of U^T
        for k in range(n):
            e = Up[k + 1] - 1
            s = y[k]
            for p in range(Up[k], e):
                s -= Ux[p] * y[Ui[p]]
            y[k] = s / Ux[e]
        for k in range(n - 1, -1, -1):
            s = y[k]
            for p in range(Lp[k] + 1, Lp[k + 1]):
                s -= Lx[p] * y[Li[p]]
            y[k] = s
        for k in range(n):
            x[k] = y[pinv[k]]
    return x


def march(tuple factors, idx_t[::1] Gp, idx_t[::1] Gi, double[::1] Gx,
          double[:, :, ::1] phi, double[:, ::1] fbasis, double[::1] weights,
          double[::1] y0, idx_t stride, double[:, ::1] out, bint increment=False):
    """Advance ``y`` through ``phi.shape[0]`` steps of a fixed linear scheme.

    Step j solves S Y = R_j + G y with R_j[s] = phi[j, s] @ fbasis and sets
    y = sum_s weights[s] Y[s] (``increment``: y += sum_s weights[s] Y[s]);
    every ``stride``-th state goes to ``out``.
    """
    cdef idx_t[::1] Lp = factors[0]
    cdef idx_t[::1] Li = factors[1]
    cdef double[::1] Lx = factors[2]
    cdef idx_t[::1] Up = factors[3]
    cdef idx_t[::1] Ui = factors[4]
    cdef double[::1] Ux = factors[5]
    cdef idx_t[::1] pinv = factors[6]
    cdef idx_t[::1] q = factors[7]
    cdef idx_t nsteps = phi.shape[0], s = phi.shape[1], nterm = phi.shape[2]
    cdef idx_t n = y0.shape[0], N = s * n
    cdef double[::1] rhs = np.empty(N, dtype=np.float64)
    cdef double[::1] Y = np.empty(N, dtype=np.float64)
    cdef double[::1] work = np.empty(N, dtype=np.float64)
    cdef cnp.ndarray[double, ndim=1] y_arr = np.array(y0, dtype=np.float64)
    cdef double[::1] y = y_arr
    cdef idx_t j, st, i, r, p, row = 0
    cdef double c, acc
    with nogil:
        for j in range(nsteps):
            for r in range(N):
                acc = 0.0
                for p in range(Gp[r], Gp[r + 1]):
                    acc += Gx[p] * y[Gi[p]]
                rhs[r] = acc
            for st in range(s):
                for i in range(nterm):
                    c = phi[j, st, i]
                    if c != 0.0:
                        for r in range(n):
                            rhs[st * n + r] += c * fbasis[i, r]
            _solve(N, Lp, Li, Lx, Up, Ui, Ux, pinv, q, &rhs[0], &work[0], &Y[0])
            for r in range(n):
                acc = 0.0
                for st in range(s):
                    acc += weights[st] * Y[st * n + r]
                if increment:
                    y[r] += acc
                else:
                    y[r] = acc
            if (j + 1) % stride == 0:
                for r in range(n):
                    out[row, r] = y[r]
                row += 1
    return y_arr
