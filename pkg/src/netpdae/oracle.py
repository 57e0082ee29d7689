"""Closed-form series solutions on a single unit pipe (d = 1, a = 0, p = 0 at both ends).

With vanishing initial potential and initial flux sum_k cos(pi k x) / (pi k^alpha)
every sine mode of the potential obeys eps c'' + c' + (pi k)^2 c = 0 with
c(0) = 0, c'(0) = k^(1 - alpha). Modes below the split index
K(eps) = 1 / (2 pi sqrt(eps)) are overdamped, mode K(eps) is critically damped
and the remaining ones oscillate.
"""

import math
from dataclasses import dataclass

import numpy as np


class OracleError(ValueError):
    pass


def split_index(eps):
    """K(eps) = 1 / (2 pi sqrt(eps)) as a float."""
    return 1.0 / (2.0 * math.pi * math.sqrt(eps))


def eps_for_split_index(K):
    """The eps with K(eps) = K."""
    return 1.0 / (2.0 * math.pi * K) ** 2


def integer_split_index(eps, rtol=1e-9):
    K = split_index(eps)
    Ki = int(round(K))
    if Ki < 1 or abs(K - Ki) > rtol * max(1.0, K):
        raise OracleError(f"K(eps) = {K:.12g} is not a positive integer")
    return Ki


def default_kmax(eps):
    return int(max(10 * math.ceil(split_index(eps)), 1000))


def _modes(kmax):
    return np.arange(1, int(kmax) + 1, dtype=np.float64)


def series_initial_flux(x, alpha, kmax):
    """Partial sum sum_{k<=kmax} cos(pi k x) / (pi k^alpha)."""
    x = np.asarray(x, dtype=np.float64)
    k = _modes(kmax)
    out = np.zeros(x.shape)
    for kc in np.array_split(k, max(1, k.size // 2048)):
        out += np.cos(np.pi * np.multiply.outer(x, kc)) @ (1.0 / (np.pi * kc ** alpha))
    return out


def series_flux_cell_averages(xb, alpha, kmax):
    """Exact averages of the truncated initial flux series over the cells [xb[i], xb[i+1]]."""
    xb = np.asarray(xb, dtype=np.float64)
    width = np.diff(xb)
    k = _modes(kmax)
    out = np.zeros(width.size)
    for kc in np.array_split(k, max(1, k.size // 2048)):
        S = np.sin(np.pi * np.multiply.outer(xb, kc))
        out += (S[1:] - S[:-1]) @ (1.0 / (np.pi ** 2 * kc ** (1.0 + alpha)))
    return out / width


def initial_flux_norm_sq(alpha, kmax=None):
    """||m(., 0)||^2 = sum 1 / (2 pi^2 k^(2 alpha)), truncated at kmax or summed to infinity."""
    if kmax is None:
        from scipy.special import zeta
        return float(zeta(2 * alpha)) / (2 * math.pi ** 2)
    return float(np.sum(1.0 / (2 * math.pi ** 2 * _modes(kmax) ** (2 * alpha))))


def modal_amplitudes(t, eps, kmax):
    """(phi_k(t), phi_k'(t)) for eps phi'' + phi' + (pi k)^2 phi = 0, phi(0) = 0, phi'(0) = 1.

    Shapes (len(t), kmax). Uses the three regimes split at the integer K(eps).
    """
    K = integer_split_index(eps)
    if kmax <= K:
        raise OracleError(f"kmax = {kmax} must exceed K(eps) = {K}")
    t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
    k = _modes(kmax)[None, :]
    phi = np.empty((t.shape[0], k.shape[1]))
    dphi = np.empty_like(phi)
    lo, hi = slice(0, K - 1), slice(K, None)
    # overdamped: e^{-t/2eps} sinh(ts/eps) written with exponents that cannot overflow
    s = np.sqrt(0.25 - eps * (np.pi * k[:, lo]) ** 2)
    ep = np.exp(t * (s - 0.5) / eps)
    em = np.exp(-t * (s + 0.5) / eps)
    phi[:, lo] = eps * 0.5 * (ep - em) / s
    dphi[:, lo] = 0.5 * (ep + em) - 0.25 * (ep - em) / s
    # critical mode k = K
    dec = np.exp(-t[:, 0] / (2 * eps))
    phi[:, K - 1] = t[:, 0] * dec
    dphi[:, K - 1] = (1.0 - t[:, 0] / (2 * eps)) * dec
    # oscillatory
    w = np.sqrt(eps * (np.pi * k[:, hi]) ** 2 - 0.25)
    dec = np.exp(-t / (2 * eps))
    arg = t * w / eps
    phi[:, hi] = dec * eps * np.sin(arg) / w
    dphi[:, hi] = dec * (np.cos(arg) - np.sin(arg) / (2 * w))
    return phi, dphi


def series_solution_hyperbolic(x, t, eps, alpha, kmax=None):
    """Truncated series (p, m) on the grid x (length nx) and times t; arrays of shape (len(t), nx)."""
    kmax = default_kmax(eps) if kmax is None else int(kmax)
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    phi, dphi = modal_amplitudes(t, eps, kmax)
    k = _modes(kmax)
    S = np.sin(np.pi * np.outer(k, x))
    C = np.cos(np.pi * np.outer(k, x))
    p = (phi * k ** (1.0 - alpha)) @ S
    m = (dphi / (np.pi * k ** alpha)) @ C
    return p, m


def series_multiplier(t, eps, alpha, kmax=None):
    """lambda(t) = [-m(0, t), m(1, t)]."""
    _, m = series_solution_hyperbolic([0.0, 1.0], t, eps, alpha, kmax)
    return np.column_stack((-m[:, 0], m[:, 1]))


def series_potential_norm(t, eps, alpha, kmax=None):
    """||p(., t)||_{L2(0,1)} by Parseval (sine modes have squared norm 1/2)."""
    kmax = default_kmax(eps) if kmax is None else int(kmax)
    phi, _ = modal_amplitudes(t, eps, kmax)
    k = _modes(kmax)
    return np.sqrt(0.5 * ((phi * k ** (1.0 - alpha)) ** 2).sum(axis=1))


def modal_residual(t, eps, kmax):
    """Relative residual of eps phi'' + phi' + (pi k)^2 phi = 0 per mode, from exact second derivatives."""
    phi, dphi = modal_amplitudes(t, eps, kmax)
    k = _modes(kmax)[None, :]
    # phi'' follows from the closed forms: differentiate phi' once more
    K = integer_split_index(eps)
    tt = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
    ddphi = np.empty_like(phi)
    lo, hi = slice(0, K - 1), slice(K, None)
    s = np.sqrt(0.25 - eps * (np.pi * k[:, lo]) ** 2)
    ep = np.exp(tt * (s - 0.5) / eps)
    em = np.exp(-tt * (s + 0.5) / eps)
    # d/dt [e^{-t/2eps}(cosh(ts/eps) - sinh(ts/eps)/(2s))]
    ddphi[:, lo] = 0.5 * (ep - em) * (s / eps + 1 / (4 * eps * s)) - 0.5 * (ep + em) / eps
    dec = np.exp(-tt[:, 0] / (2 * eps))
    ddphi[:, K - 1] = dec * (-1.0 / (2 * eps) - (1.0 - tt[:, 0] / (2 * eps)) / (2 * eps))
    w = np.sqrt(eps * (np.pi * k[:, hi]) ** 2 - 0.25)
    dec = np.exp(-tt / (2 * eps))
    arg = tt * w / eps
    ddphi[:, hi] = dec * (-(w / eps) * np.sin(arg) - np.cos(arg) / (2 * eps)
                          - (np.cos(arg) - np.sin(arg) / (2 * w)) / (2 * eps))
    res = eps * ddphi + dphi + (np.pi * k) ** 2 * phi
    scale = np.abs(dphi) + (np.pi * k) ** 2 * np.abs(phi) + eps * np.abs(ddphi)
    return np.abs(res) / np.maximum(scale, 1e-300)


# --------------------------------------------------------------- bounds

def upper_bound_sq(eps, alpha, kmax=None):
    """Energy bound ||p(t)||^2 <= eps ||m(0)||^2, valid for all t."""
    return eps * initial_flux_norm_sq(alpha, kmax)


def lower_bound_sq(eps, alpha):
    """Explicit lower bound of ||p(., eps)||^2 at integer K(eps)."""
    K = integer_split_index(eps)
    top = math.sqrt(1 + (5 * math.pi / 3) ** 2)
    bot = math.sqrt(1 + (math.pi / 3) ** 2)
    count = math.floor(top - 1) - math.ceil(bot - 1)
    return eps * K / (8 * math.e * math.pi ** 2 * K ** (2 * alpha)) * count / math.floor(top) ** (2 * alpha)


# --------------------------------------------------------------- parabolic limit

@dataclass(frozen=True)
class ParabolicLimitSolution:
    """Exact (p0, m0, lambda0) of the eps = 0 problem on the unit pipe."""

    case: str
    alpha: float = 0.55
    kmax: int = 1000

    def p0(self, x, t):
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.case == "C1":
            return np.zeros((t.size, x.size))
        return self.amplitudes(t) @ np.sin(np.pi * np.outer(_modes(self.kmax), x))

    def m0(self, x, t):
        """m0 = -d/dx p0."""
        x = np.atleast_1d(np.asarray(x, dtype=np.float64))
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        if self.case == "C1":
            return np.zeros((t.size, x.size))
        k = _modes(self.kmax)
        return -(self.amplitudes(t) * np.pi * k) @ np.cos(np.pi * np.outer(k, x))

    def lam0(self, t):
        m = self.m0([0.0, 1.0], t)
        return np.column_stack((-m[:, 0], m[:, 1]))

    def amplitudes(self, t):
        """Sine coefficients of p0 at times t, shape (len(t), kmax)."""
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))[:, None]
        k = _modes(self.kmax)[None, :]
        if self.case == "C1":
            return np.zeros((t.shape[0], k.shape[1]))
        return np.exp(-(np.pi * k) ** 2 * t) / k ** (1.0 + self.alpha)


def parabolic_limit_solution(case, alpha=0.55, kmax=1000):
    """Case C1: zero initial potential with the cosine flux series; C2: sine potential series, zero flux."""
    if case not in ("C1", "C2"):
        raise ValueError(f"unknown case {case!r}")
    return ParabolicLimitSolution(case, float(alpha), int(kmax))
