"""Time-continuous reconstructions of node data.

A reconstruction is evaluated as ``f(t)`` for an array of times and returns
an array of shape (len(t), dim). Interval j is (t_{j-1}, t_j]; t = 0 belongs
to the first interval.
"""

import numpy as np

PW_CONSTANT = "pw-constant"
PW_LINEAR = "pw-linear"
PW_POLYNOMIAL = "pw-polynomial"


def _interval_index(nodes, t):
    """1-based index j with t in (t_{j-1}, t_j], clipped to [1, n]."""
    return np.clip(np.searchsorted(nodes, t, side="left"), 1, nodes.size - 1)


def stencil_start(j, degree, n):
    """First node index of the interpolation stencil for interval j (1-based) on n intervals."""
    if degree % 2:
        k0 = j - (degree + 1) // 2
    else:
        k0 = j - 1 - degree // 2
    return np.clip(k0, 0, n - degree)


class _Base:
    nodes = None

    @property
    def T(self):
        return float(self.nodes[-1])

    def sample_times(self, log_eps=None):
        """Grid nodes and interval midpoints, optionally with points eps*2^k (k >= -2) up to T."""
        mids = 0.5 * (self.nodes[1:] + self.nodes[:-1])
        ts = [self.nodes, mids]
        if log_eps is not None:
            k = np.arange(-2, int(np.ceil(np.log2(self.T / log_eps))) + 1)
            pts = log_eps * 2.0 ** k
            ts.append(pts[(pts > 0) & (pts <= self.T)])
        return np.unique(np.concatenate(ts))

    def __sub__(self, other):
        return Combination([(1.0, self), (-1.0, other)], check_grid=False)

    def __add__(self, other):
        return Combination([(1.0, self), (1.0, other)], check_grid=False)

    def __mul__(self, c):
        return Combination([(float(c), self)])

    __rmul__ = __mul__


class TimeFunction(_Base):
    """Piecewise-constant, piecewise-linear or piecewise-polynomial function of time."""

    def __init__(self, nodes, values, kind=PW_LINEAR, degree=None):
        self.nodes = np.asarray(nodes, dtype=np.float64)
        self.values = np.asarray(values, dtype=np.float64)
        if self.values.ndim == 1:
            self.values = self.values[:, None]
        if self.nodes.ndim != 1 or self.nodes.size < 2 or self.values.shape[0] != self.nodes.size:
            raise ValueError("need at least two nodes and one value row per node")
        if np.any(np.diff(self.nodes) <= 0):
            raise ValueError("nodes must be increasing")
        self.kind = kind
        if kind == PW_CONSTANT:
            degree = 0
        elif kind == PW_LINEAR:
            degree = 1
        elif kind == PW_POLYNOMIAL:
            if degree is None or int(degree) < 0:
                raise ValueError("pw-polynomial needs a degree >= 0")
            degree = int(degree)
            if degree + 1 > self.nodes.size:
                raise ValueError(f"degree {degree} needs {degree + 1} nodes, grid has {self.nodes.size}")
        else:
            raise ValueError(f"unknown kind {kind!r}")
        self.degree = degree

    @property
    def n(self):
        return self.nodes.size - 1

    @property
    def dim(self):
        return self.values.shape[1]

    def __call__(self, t):
        t = np.atleast_1d(np.asarray(t, dtype=np.float64))
        j = _interval_index(self.nodes, t)
        if self.kind == PW_CONSTANT:
            out = self.values[j].copy()
            out[t <= self.nodes[0]] = self.values[0]
            return out
        if self.kind == PW_LINEAR:
            t0, t1 = self.nodes[j - 1], self.nodes[j]
            w = ((t - t0) / (t1 - t0))[:, None]
            return (1.0 - w) * self.values[j - 1] + w * self.values[j]
        k0 = stencil_start(j, self.degree, self.n)
        out = np.zeros((t.size, self.dim))
        for i in range(self.degree + 1):
            li = np.ones(t.size)
            xi = self.nodes[k0 + i]
            for m in range(self.degree + 1):
                if m != i:
                    xm = self.nodes[k0 + m]
                    li *= (t - xm) / (xi - xm)
            out += li[:, None] * self.values[k0 + i]
        return out

    def stencil(self, j):
        """Node indices used on interval j (1-based)."""
        if self.kind == PW_CONSTANT:
            return [j]
        k0 = int(stencil_start(j, self.degree, self.n))
        return list(range(k0, k0 + self.degree + 1))


class Combination(_Base):
    """Linear combination sum c_i f_i; sampling follows the first term's grid."""

    def __init__(self, terms, check_grid=True):
        self.terms = [(float(c), f) for c, f in terms]
        if not self.terms:
            raise ValueError("empty combination")
        self.nodes = self.terms[0][1].nodes
        if check_grid:
            for _, f in self.terms[1:]:
                if f.nodes.shape != self.nodes.shape or not np.allclose(f.nodes, self.nodes, rtol=0, atol=1e-14):
                    raise ValueError("time grids differ")

    @property
    def dim(self):
        return self.terms[0][1].dim

    def __call__(self, t):
        out = None
        for c, f in self.terms:
            v = c * f(t)
            out = v if out is None else out + v
        return out


def reconstruct(traj, field, kind=PW_LINEAR, degree=None):
    """Reconstruction of one trajectory field.

    ``degree`` selects the interpolation polynomial of the given degree on the
    stencil described in :func:`stencil_start`; degree 0 gives the
    right-endpoint piecewise constant and degree 1 the piecewise linear
    interpolant.
    """
    values = traj.field(field)
    if degree is not None:
        kind = PW_CONSTANT if degree == 0 else (PW_LINEAR if degree == 1 else PW_POLYNOMIAL)
    return TimeFunction(traj.t, values, kind, degree)


def eps_combination(f0, f1, eps):
    """Pointwise f0 + eps f1 on a common grid."""
    return Combination([(1.0, f0), (float(eps), f1)])
