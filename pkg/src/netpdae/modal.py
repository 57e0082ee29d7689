"""Exact-in-time modal solution of the homogeneous semi-discrete system.

With zero data, a = 0 and M_d = M_1 the flux can be eliminated:
eps M2 p'' + M2 p' + K^T M1^{-1} K p = 0 on the free potential dofs. The
generalized eigenvectors of (K^T M1^{-1} K, M2) decouple this into scalar
equations eps c'' + c' + theta c = 0 that are solved in closed form. The
parabolic limit is c' + theta c = 0.
"""

import numpy as np
from scipy.linalg import eigh


class ModalError(RuntimeError):
    pass


def _phi(theta, eps, t):
    """phi and phi' with eps phi'' + phi' + theta phi = 0, phi(0) = 0, phi'(0) = 1; shapes (len(t), len(theta))."""
    t = np.asarray(t, dtype=np.float64)[:, None]
    theta = np.asarray(theta, dtype=np.float64)[None, :]
    disc = 1.0 - 4.0 * eps * theta
    phi = np.empty((t.shape[0], theta.shape[1]))
    dphi = np.empty_like(phi)
    tol = 1e-12
    real = disc[0] > tol
    cplx = disc[0] < -tol
    crit = ~(real | cplx)
    if real.any():
        s = np.sqrt(disc[:, real])
        rp = -2.0 * theta[:, real] / (1.0 + s)  # (-1 + s) / (2 eps) without cancellation
        rm = -(1.0 + s) / (2.0 * eps)
        ep, em = np.exp(rp * t), np.exp(rm * t)
        phi[:, real] = (ep - em) / (rp - rm)
        dphi[:, real] = (rp * ep - rm * em) / (rp - rm)
    if cplx.any():
        w = np.sqrt(-disc[:, cplx]) / (2.0 * eps)
        dec = np.exp(-t / (2.0 * eps))
        phi[:, cplx] = dec * np.sin(w * t) / w
        dphi[:, cplx] = dec * (np.cos(w * t) - np.sin(w * t) / (2.0 * eps * w))
    if crit.any():
        dec = np.exp(-t / (2.0 * eps))
        phi[:, crit] = t * dec
        dphi[:, crit] = (1.0 - t / (2.0 * eps)) * dec
    return phi, dphi


class ModalSolver:
    """Modal decomposition of one assembled network with homogeneous data."""

    def __init__(self, sys):
        if sys.Ma.nnz and sys.Ma.max_abs() > 0:
            raise ModalError("modal solver needs a = 0")
        if not np.allclose(sys.Md.diagonal(), sys.M1.diagonal(), rtol=1e-12, atol=0):
            raise ModalError("modal solver needs d = 1 (M_d = M_1)")
        self.sys = sys
        dirichlet = set(int(i) for i in sys.B.triplets()[1])
        self.free = np.array([i for i in range(sys.n_p) if i not in dirichlet], dtype=np.int64)
        K = sys.K.to_dense()[:, self.free]
        M2 = sys.M2.to_dense()[np.ix_(self.free, self.free)]
        L = K.T @ (K / sys.M1.diagonal()[:, None])
        try:
            self.theta, self.V = eigh(L, M2)
        except np.linalg.LinAlgError as exc:
            raise ModalError(f"eigendecomposition failed: {exc}") from None
        self.Kf = K

    def coefficients(self, p_init, m_init):
        """Modal initial values c(0) = V^T M2 p and c'(0) = V^T K^T m (V is M2-orthonormal)."""
        M2 = self.sys.M2.to_dense()[np.ix_(self.free, self.free)]
        c0 = self.V.T @ (M2 @ np.asarray(p_init, dtype=np.float64)[self.free])
        c1 = self.V.T @ (self.Kf.T @ np.asarray(m_init, dtype=np.float64))
        return c0, c1

    def hyperbolic(self, eps, p_init, m_init, t):
        """Modal coefficients of p(t), shape (len(t), n_free)."""
        c0, c1 = self.coefficients(p_init, m_init)
        phi, dphi = _phi(self.theta, eps, t)
        return c0 * (dphi + phi / eps) + c1 * phi

    def parabolic(self, p_init, t):
        c0, _ = self.coefficients(p_init, np.zeros(self.sys.n_m))
        return c0 * np.exp(-np.outer(np.asarray(t, dtype=np.float64), self.theta))

    def error_C(self, eps, p_init, m_init, t):
        """max_t ||p(t) - p0(t)||_{M2}; the M2-norm of a potential is the 2-norm of its modal coefficients."""
        d = self.hyperbolic(eps, p_init, m_init, t) - self.parabolic(p_init, t)
        return float(np.sqrt((d ** 2).sum(axis=1)).max())

    def potential(self, coeffs):
        """Full potential vectors (Dirichlet dofs zero) from modal coefficients."""
        out = np.zeros((coeffs.shape[0], self.sys.n_p))
        out[:, self.free] = coeffs @ self.V.T
        return out
