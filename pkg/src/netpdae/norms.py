"""Discrete space-time norms and power-law fits."""

from dataclasses import dataclass

import numpy as np

from .sparse import CSRMatrix


def _quad(M, V):
    """Row-wise sqrt of v^T M v for V of shape (k, n)."""
    MV = (M @ V.T).T if isinstance(M, CSRMatrix) else V @ np.asarray(M).T
    return np.sqrt(np.maximum(np.einsum("ij,ij->i", V, MV), 0.0))


@dataclass(frozen=True)
class NormSpec:
    """Spatial part of a norm: ``L2`` uses M, ``H1`` adds (K v)^T M1^{-1} (K v)."""

    kind: str
    M: object
    K: object = None
    M1_diag: np.ndarray = None

    @classmethod
    def l2(cls, M):
        return cls("L2", M)

    @classmethod
    def h1(cls, sys):
        return cls("H1", sys.M2, sys.K, sys.M1.diagonal())

    def squared(self, V):
        V = np.atleast_2d(V)
        out = _quad(self.M, V) ** 2
        if self.kind == "H1":
            KV = (self.K @ V.T).T
            out = out + np.einsum("ij,ij->i", KV, KV / self.M1_diag)
        elif self.kind != "L2":
            raise ValueError(f"unknown spatial norm {self.kind!r}")
        return out


def _spec(spatial):
    return spatial if isinstance(spatial, NormSpec) else NormSpec.l2(spatial)


def norm_C_L2(diff, M2, times=None, log_eps=None):
    """max_t sqrt(v(t)^T M2 v(t)) over nodes, midpoints and optional log samples near 0."""
    if times is None:
        times = diff.sample_times(log_eps)
    spec = _spec(M2)
    best = 0.0
    for chunk in np.array_split(times, max(1, times.size // 4096)):
        best = max(best, float(np.sqrt(spec.squared(diff(chunk)).max(initial=0.0))))
    return best


_GX, _GW = np.polynomial.legendre.leggauss(3)


def norm_L2_time(diff, spatial):
    """sqrt(int_0^T |v(t)|^2 dt) with 3-point Gauss-Legendre per interval of the first grid."""
    spec = _spec(spatial)
    t = diff.nodes
    a, b = t[:-1], t[1:]
    pts = (0.5 * (b - a))[:, None] * _GX[None, :] + (0.5 * (a + b))[:, None]
    vals = spec.squared(diff(pts.ravel())).reshape(pts.shape)
    return float(np.sqrt(np.sum(0.5 * (b - a) * (vals @ _GW))))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    residual: float

    def __call__(self, x):
        return self.prefactor * np.asarray(x, dtype=np.float64) ** self.exponent


def fit_power_law(x, err=None):
    """Least-squares fit of log err = exponent * log x + log C.

    Accepts either a list of (x, err) pairs or two sequences.
    """
    if err is None:
        pairs = np.asarray(x, dtype=np.float64)
        x, err = pairs[:, 0], pairs[:, 1]
    x = np.asarray(x, dtype=np.float64)
    err = np.asarray(err, dtype=np.float64)
    if x.size != err.size or x.size < 2:
        raise ValueError("need at least two (x, err) pairs")
    if np.any(x <= 0) or np.any(err <= 0):
        raise ValueError("power-law fit needs positive x and err")
    lx, le = np.log(x), np.log(err)
    A = np.column_stack((lx, np.ones_like(lx)))
    coef, *_ = np.linalg.lstsq(A, le, rcond=None)
    res = float(np.linalg.norm(A @ coef - le))
    return PowerLawFit(float(coef[0]), float(np.exp(coef[1])), res)
