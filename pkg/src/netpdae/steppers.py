"""Time integrators for the semi-discrete network systems.

Every scheme is written as a linear system E y' + A y = F(t) in a stacked
unknown y. Euler steps solve (E/tau + A) y_j = F(t_j) + E y_{j-1}/tau; a
Runge-Kutta tableau replaces y' on the stages by A^{-1} D_tau Y with
D_tau Y = (Y - y_{j-1} 1)/tau and sets y_j = b^T A^{-1} Y. Both are solved
for the increment Y - y_{j-1} 1, which keeps long runs free of roundoff
drift. The step matrix does not depend on j, so it is factorized once and
the time loop only does back-substitutions (compiled kernel when available).

The regularized parabolic-limit scheme carries the extra multiplier mu and
the hidden constraint B p' = h' as an additional row, the coupled scheme adds
the first-order correction (p1, m1) driven by the discrete derivative of p0,
and the hyperbolic reference integrates the index-2 system directly.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .assembly import (DiscreteData, LoadTerms, consistent_initial_flux, discretize_data,
                       hamiltonian)
from .butcher import ButcherTableau, tableau as get_tableau
from .network import BoundaryAndSourceData
from .signals import Poly
from .sparse import CSRMatrix, SingularMatrixError, factorize, kron

__all__ = ["TimeGrid", "Trajectory", "solve_parabolic_euler", "solve_parabolic_rk", "solve_coupled_euler",
           "solve_coupled_rk", "solve_hyperbolic_reference", "hamiltonian", "StepMatrixError"]

_CHUNK = 1 << 15


class StepMatrixError(RuntimeError):
    pass


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into n steps."""

    T: float
    n: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("T must be positive")
        if int(self.n) < 1:
            raise ValueError("need at least one step")

    @classmethod
    def from_tau(cls, T, tau):
        n = int(round(T / tau))
        if n < 1 or abs(n * tau - T) > 1e-9 * T:
            raise ValueError(f"tau={tau} does not divide T={T}")
        return cls(float(T), n)

    @property
    def tau(self):
        return self.T / self.n

    def node(self, j):
        return j * self.T / self.n

    @property
    def nodes(self):
        return np.arange(self.n + 1) * (self.T / self.n)


@dataclass
class Trajectory:
    """Node values of one solver run.

    ``t`` are the stored times (every ``stride``-th grid node), ``fields``
    maps names such as p0, m0, lam, mu, p1, m1, p, m to arrays of shape
    (len(t), dim).
    """

    scheme: str
    grid: TimeGrid
    t: np.ndarray
    fields: dict
    stride: int = 1
    residuals: dict = field(default_factory=dict)
    meta: dict = field(default_factory=dict)

    def __getattr__(self, name):
        fields = self.__dict__.get("fields", {})
        if name in fields:
            return fields[name]
        raise AttributeError(name)

    def field(self, name):
        if name not in self.fields:
            raise KeyError(f"trajectory of scheme {self.scheme!r} has no field {name!r}")
        return self.fields[name]

    def energies(self, sys, eps):
        p = self.fields.get("p", self.fields.get("p0"))
        m = self.fields.get("m", self.fields.get("m0"))
        return np.array([hamiltonian(sys, pj, mj, eps) for pj, mj in zip(p, m)])

    def write_csv(self, path, names=None):
        names = names or list(self.fields)
        header = ["t"]
        for nm in names:
            header += [f"{nm}[{i}]" for i in range(self.fields[nm].shape[1])]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for j, tj in enumerate(self.t):
                row = [repr(float(tj))]
                for nm in names:
                    row += [repr(float(v)) for v in self.fields[nm][j]]
                w.writerow(row)


# ------------------------------------------------------------------ engine

def _block_matrix(rows, cols, entries):
    """Block matrix with given block sizes; ``entries`` maps (i, j) to CSRMatrix."""
    r0 = np.concatenate(([0], np.cumsum(rows)))
    c0 = np.concatenate(([0], np.cumsum(cols)))
    rs, cs, vs = [np.zeros(0, np.int64)], [np.zeros(0, np.int64)], [np.zeros(0)]
    for (i, j), blk in entries.items():
        if blk.shape != (rows[i], cols[j]):
            raise ValueError(f"block ({i}, {j}) has shape {blk.shape}, expected {(rows[i], cols[j])}")
        r, c, v = blk.triplets()
        rs.append(r + r0[i])
        cs.append(c + c0[j])
        vs.append(v)
    return CSRMatrix.from_triplets((int(r0[-1]), int(c0[-1])), np.concatenate(rs), np.concatenate(cs),
                                   np.concatenate(vs))


def _embed(load, offset, n):
    return LoadTerms(n, [(s, np.concatenate((np.zeros(offset), v, np.zeros(n - offset - v.size))))
                         for s, v in load.terms])


def _basis(load):
    """Merge polynomial signals into a monomial basis; other signals stay separate."""
    polys = [(s, v) for s, v in load.terms if isinstance(s, Poly)]
    others = [(s, v) for s, v in load.terms if not isinstance(s, Poly) and not s.is_zero() and np.any(v)]
    funcs, vecs = [], []
    if polys:
        deg = max(s.degree for s, _ in polys)
        for k in range(deg + 1):
            vk = sum(s.coeffs[k] * v for s, v in polys if s.degree >= k)
            if np.any(vk):
                funcs.append(Poly([0.0] * k + [1.0]))
                vecs.append(vk)
    for s, v in others:
        funcs.append(s)
        vecs.append(v)
    if not funcs:
        funcs, vecs = [Poly([0.0])], [np.zeros(load.size)]
    return funcs, np.array(vecs)


def _march(E, A, load, y0, grid, tab, stride=1, backend=None):
    """Integrate E y' + A y = load(t); returns (times, states) at every ``stride``-th node."""
    n = E.shape[0]
    tau = grid.tau
    if grid.n % stride:
        raise ValueError("stride must divide the number of steps")
    # increment form: unknowns Z = Y - 1 (x) y_{j-1}, so S Z = F(stages) - 1 (x) A y_{j-1}
    # and y_j = y_{j-1} + w^T Z; roundoff then scales with the increment, not with y
    if tab is None:
        S = E.scale(1.0 / tau) + A
        G = A.scale(-1.0)
        weights, c = np.ones(1), np.ones(1)
    else:
        W = tab.Ainv
        S = kron(W, E).scale(1.0 / tau) + kron(np.eye(tab.s), A)
        G = kron(np.ones((tab.s, 1)), A).scale(-1.0)
        weights, c = tab.node_weights, tab.c
    try:
        F = factorize(S, backend=backend)
    except SingularMatrixError as exc:
        raise StepMatrixError(f"step matrix is singular ({exc})") from None
    funcs, fbasis = _basis(load)
    s = weights.size
    nstore = grid.n // stride
    out = np.empty((nstore + 1, n))
    out[0] = y0
    y = np.asarray(y0, dtype=np.float64).copy()
    chunk = stride * max(1, _CHUNK // stride)
    j0 = 0
    while j0 < grid.n:
        j1 = min(grid.n, j0 + chunk)
        tprev = np.arange(j0, j1) * (grid.T / grid.n)
        st = tprev[:, None] + c[None, :] * tau
        phi = np.empty((j1 - j0, s, len(funcs)))
        for i, fn in enumerate(funcs):
            phi[:, :, i] = fn(st)
        rows = out[1 + j0 // stride:1 + j1 // stride]
        y = F.march(G, phi, fbasis, weights, y, stride, rows, increment=True)
        j0 = j1
    times = np.arange(nstore + 1) * stride * (grid.T / grid.n)
    return times, out, F


def _node_quadrature(load, grid, times, tab):
    """sum_k w_k load(t_{j-1} + c_k tau) at stored node times (w = b^T A^{-1}, or b)."""
    if tab is None:
        return load.at(times)
    tau = grid.tau
    out = np.zeros((times.size, load.size))
    for wk, ck in zip(tab.node_weights, tab.c):
        out += wk * load.at(times - tau + ck * tau)
    return out


def _b_quadrature(load, grid, times, tab):
    if tab is None:
        return load.at(times)
    tau = grid.tau
    out = np.zeros((times.size, load.size))
    for bk, ck in zip(tab.b, tab.c):
        out += bk * load.at(times - tau + ck * tau)
    return out


def _prepare(sys, data):
    if isinstance(data, BoundaryAndSourceData):
        return discretize_data(sys, data)
    if not isinstance(data, DiscreteData):
        raise TypeError("data must be BoundaryAndSourceData or DiscreteData")
    return data


def _resolve_tab(tab):
    if tab is None or isinstance(tab, ButcherTableau):
        return tab
    return get_tableau(tab)


def _check_dirichlet(sys, data, p, tol=1e-10):
    res = np.abs(sys.B @ p - data.H(0.0)).max(initial=0.0)
    if res > tol:
        raise ValueError(f"inconsistent initial potential: |B p - h(0)| = {res:.3e}")


def _initial_multiplier(sys, rhs, hdot):
    """Solve [M2 B^T; B 0] [v; lam] = [rhs; hdot] and return (v, lam)."""
    S = _block_matrix([sys.n_p, sys.n_b], [sys.n_p, sys.n_b], {(0, 0): sys.M2, (0, 1): sys.B.T, (1, 0): sys.B})
    x = factorize(S).solve(np.concatenate((rhs, hdot)))
    return x[:sys.n_p], x[sys.n_p:]


# ------------------------------------------------------------------ parabolic limit

def _parabolic_system(sys, data):
    np_, nm, nb = sys.n_p, sys.n_m, sys.n_b
    sizes = [np_, nm, nb, nb]
    I = CSRMatrix.identity(nb)
    E = _block_matrix(sizes, sizes, {(0, 0): sys.M2, (3, 0): sys.B})
    A = _block_matrix(sizes, sizes, {
        (0, 0): sys.Ma, (0, 1): -sys.K.T, (0, 2): sys.B.T, (0, 3): sys.B.T,
        (1, 0): sys.K, (1, 1): sys.Md,
        (2, 0): sys.B, (2, 3): -I,
    })
    n = sum(sizes)
    offs = np.cumsum([0] + sizes)
    load = (_embed(data.G, offs[0], n) + _embed(data.F, offs[1], n) + _embed(data.H, offs[2], n)
            + _embed(data.Hdot, offs[3], n))
    return E, A, load, offs


def _parabolic_initial(sys, data, p):
    m = consistent_initial_flux(sys, p, data.F(0.0))
    pdot, lam = _initial_multiplier(sys, data.G(0.0) - sys.Ma @ p + sys.K.T @ m, data.Hdot(0.0))
    mu = sys.B @ p - data.H(0.0)
    return m, pdot, lam, mu


def _run_parabolic(sys, data, p0_init, grid, tab, name, stride=1, backend=None):
    data = _prepare(sys, data)
    p0_init = np.asarray(p0_init, dtype=np.float64)
    _check_dirichlet(sys, data, p0_init)
    E, A, load, offs = _parabolic_system(sys, data)
    m, _, lam, mu = _parabolic_initial(sys, data, p0_init)
    y0 = np.concatenate((p0_init, m, lam, mu))
    t, Y, F = _march(E, A, load, y0, grid, tab, stride, backend)
    fields = {"p0": Y[:, offs[0]:offs[1]], "m0": Y[:, offs[1]:offs[2]],
              "lam": Y[:, offs[2]:offs[3]], "mu": Y[:, offs[3]:offs[4]]}
    traj = Trajectory(name, grid, t, fields, stride, meta={"rcond": F.rcond(), "fill": F.fill})
    _parabolic_residuals(sys, data, traj, tab)
    return traj


def _parabolic_residuals(sys, data, traj, tab, p="p0", m="m0"):
    t = traj.t[1:]
    P, M = traj.field(p)[1:], traj.field(m)[1:]
    h_q = _node_quadrature(data.H, traj.grid, t, tab)
    f_q = _node_quadrature(data.F, traj.grid, t, tab)
    B, K, Md = sys.B.to_dense(), sys.K, sys.Md
    res = {"constraint": float(np.abs(P @ B.T - traj.mu[1:] - h_q).max(initial=0.0)),
           "flux": float(np.abs((K @ P.T).T + (Md @ M.T).T - f_q).max(initial=0.0))}
    if traj.stride == 1:
        hd = _b_quadrature(data.Hdot, traj.grid, t, tab)
        dP = np.diff(traj.field(p), axis=0) / traj.grid.tau
        res["hidden_constraint"] = float(np.abs(dP @ B.T - hd).max(initial=0.0))
    traj.residuals.update(res)


def solve_parabolic_euler(sys, data, p0_init, grid, stride=1, backend=None):
    """Regularized implicit Euler scheme for the parabolic limit (p0, m0, lambda, mu)."""
    return _run_parabolic(sys, data, p0_init, grid, None, "parabolic-euler", stride, backend)


def solve_parabolic_rk(sys, data, p0_init, grid, tab, stride=1, backend=None):
    """Stage version of the regularized scheme with node values b^T A^{-1} (stages)."""
    tab = _resolve_tab(tab)
    return _run_parabolic(sys, data, p0_init, grid, tab, f"parabolic-{tab.name}", stride, backend)


# ------------------------------------------------------------------ coupled second order

def _coupled_system(sys, data):
    np_, nm, nb = sys.n_p, sys.n_m, sys.n_b
    # unknown order: p0, p1, m0, m1, lam, mu, lam1
    sizes = [np_, np_, nm, nm, nb, nb, nb]
    I = CSRMatrix.identity(nb)
    ratio = sys.M1.diagonal() / sys.Md.diagonal()
    DK = CSRMatrix.diag(ratio) @ sys.K
    # rows: p0 eq, p1 eq, m1 eq, m0 eq, constraint, hidden constraint, B p1 = 0
    E = _block_matrix(sizes, sizes, {(0, 0): sys.M2, (1, 1): sys.M2, (2, 0): -DK, (5, 0): sys.B})
    A = _block_matrix(sizes, sizes, {
        (0, 0): sys.Ma, (0, 2): -sys.K.T, (0, 4): sys.B.T, (0, 5): sys.B.T,
        (1, 1): sys.Ma, (1, 3): -sys.K.T, (1, 6): sys.B.T,
        (2, 1): sys.K, (2, 3): sys.Md,
        (3, 0): sys.K, (3, 2): sys.Md,
        (4, 0): sys.B, (4, 5): -I,
        (6, 1): sys.B,
    })
    n = sum(sizes)
    offs = np.cumsum([0] + sizes)
    load = (_embed(data.G, offs[0], n) + _embed(data.Fdot.scaled(lambda v: -ratio * v), offs[2], n)
            + _embed(data.F, offs[3], n) + _embed(data.H, offs[4], n) + _embed(data.Hdot, offs[5], n))
    return E, A, load, offs


def _run_coupled(sys, data, p0_init, grid, tab, name, stride=1, backend=None):
    data = _prepare(sys, data)
    p0_init = np.asarray(p0_init, dtype=np.float64)
    _check_dirichlet(sys, data, p0_init)
    E, A, load, offs = _coupled_system(sys, data)
    m0, pdot, lam, mu = _parabolic_initial(sys, data, p0_init)
    ratio = sys.M1.diagonal() / sys.Md.diagonal()
    m1 = ratio * (sys.K @ pdot - data.Fdot(0.0)) / sys.Md.diagonal()
    _, lam1 = _initial_multiplier(sys, sys.K.T @ m1, np.zeros(sys.n_b))
    y0 = np.concatenate((p0_init, np.zeros(sys.n_p), m0, m1, lam, mu, lam1))
    t, Y, F = _march(E, A, load, y0, grid, tab, stride, backend)
    names = ["p0", "p1", "m0", "m1", "lam", "mu", "lam1"]
    fields = {nm: Y[:, offs[i]:offs[i + 1]] for i, nm in enumerate(names)}
    traj = Trajectory(name, grid, t, fields, stride, meta={"rcond": F.rcond(), "fill": F.fill})
    _parabolic_residuals(sys, data, traj, tab)
    traj.residuals["p1_constraint"] = float(np.abs(traj.p1[1:] @ sys.B.to_dense().T).max(initial=0.0))
    return traj


def solve_coupled_euler(sys, data, p0_init, grid, stride=1, backend=None):
    """Implicit Euler for the parabolic limit coupled to its first-order correction."""
    return _run_coupled(sys, data, p0_init, grid, None, "coupled-euler", stride, backend)


def solve_coupled_rk(sys, data, p0_init, grid, tab, stride=1, backend=None):
    """Stage version of the coupled scheme; the p0 stage derivative A^{-1} D_tau P0 drives m1."""
    tab = _resolve_tab(tab)
    return _run_coupled(sys, data, p0_init, grid, tab, f"coupled-{tab.name}", stride, backend)


# ------------------------------------------------------------------ hyperbolic reference

def _hyperbolic_system(sys, data, eps):
    np_, nm, nb = sys.n_p, sys.n_m, sys.n_b
    sizes = [np_, nm, nb]
    E = _block_matrix(sizes, sizes, {(0, 0): sys.M2, (1, 1): sys.M1.scale(eps)})
    A = _block_matrix(sizes, sizes, {
        (0, 0): sys.Ma, (0, 1): -sys.K.T, (0, 2): sys.B.T,
        (1, 0): sys.K, (1, 1): sys.Md,
        (2, 0): sys.B,
    })
    n = sum(sizes)
    offs = np.cumsum([0] + sizes)
    load = _embed(data.G, offs[0], n) + _embed(data.F, offs[1], n) + _embed(data.H, offs[2], n)
    return E, A, load, offs


def solve_hyperbolic_reference(sys, data, p_init, m_init, grid, tab="radau-iia-2", eps=1e-3, stride=1,
                               backend=None):
    """Stiffly accurate Runge-Kutta integration of the index-2 system with eps M1 m'."""
    if not eps > 0:
        raise ValueError("eps must be positive for the hyperbolic system")
    tab = _resolve_tab(tab)
    data = _prepare(sys, data)
    p_init = np.asarray(p_init, dtype=np.float64)
    m_init = np.asarray(m_init, dtype=np.float64)
    _check_dirichlet(sys, data, p_init)
    E, A, load, offs = _hyperbolic_system(sys, data, eps)
    _, lam = _initial_multiplier(sys, data.G(0.0) - sys.Ma @ p_init + sys.K.T @ m_init, data.Hdot(0.0))
    y0 = np.concatenate((p_init, m_init, lam))
    t, Y, F = _march(E, A, load, y0, grid, tab, stride, backend)
    fields = {"p": Y[:, offs[0]:offs[1]], "m": Y[:, offs[1]:offs[2]], "lam": Y[:, offs[2]:offs[3]]}
    name = f"hyperbolic-{tab.name if tab else 'euler'}"
    traj = Trajectory(name, grid, t, fields, stride, meta={"eps": eps, "rcond": F.rcond(), "fill": F.fill})
    h_q = _node_quadrature(data.H, grid, t[1:], tab)
    traj.residuals["constraint"] = float(np.abs(traj.p[1:] @ sys.B.to_dense().T - h_q).max(initial=0.0))
    return traj
