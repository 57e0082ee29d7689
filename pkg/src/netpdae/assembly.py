"""Mixed finite element semi-discretization on a network.

Potentials are continuous piecewise linear (P1), fluxes piecewise constant
(P0, one indicator function per element). Potential dofs are numbered
vertices first, then the interior nodes edge by edge; flux dofs element by
element along each edge.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P

from .sparse import CSRMatrix, factorize, row_rank


@dataclass(frozen=True)
class MeshParams:
    """Elements per edge, either one count for all edges or one per edge."""

    elements: object = 10

    def counts(self, n_edges):
        if np.isscalar(self.elements):
            c = [int(self.elements)] * n_edges
        else:
            c = [int(x) for x in self.elements]
        if len(c) != n_edges:
            raise ValueError("need one element count per edge")
        if min(c) < 1:
            raise ValueError("every edge needs at least one element")
        return c


@dataclass(frozen=True, eq=False)
class AssembledSystem:
    network: object
    mesh: MeshParams
    M1: CSRMatrix
    M2: CSRMatrix
    Md: CSRMatrix
    Ma: CSRMatrix
    K: CSRMatrix
    B: CSRMatrix
    C: CSRMatrix
    edge_nodes: tuple
    edge_elems: tuple
    edge_x: tuple

    @property
    def n_p(self):
        return self.M2.shape[0]

    @property
    def n_m(self):
        return self.M1.shape[0]

    @property
    def n_b(self):
        return self.B.shape[0]

    @property
    def n_c(self):
        return self.C.shape[0]

    @property
    def h(self):
        """Mesh size per edge."""
        return tuple(float(x[1] - x[0]) for x in self.edge_x)


def assemble(net, mesh=MeshParams()):
    if not isinstance(mesh, MeshParams):
        mesh = MeshParams(mesh)
    counts = mesh.counts(len(net.edges))
    nv = len(net.vertices)
    edge_nodes, edge_elems, edge_x = [], [], []
    next_p, next_m = nv, 0
    for e, ne in zip(net.edges, counts):
        interior = np.arange(next_p, next_p + ne - 1)
        next_p += ne - 1
        edge_nodes.append(np.concatenate(([e.tail], interior, [e.head])).astype(np.int64))
        edge_elems.append(np.arange(next_m, next_m + ne, dtype=np.int64))
        next_m += ne
        edge_x.append(np.linspace(0.0, e.length, ne + 1))
    n_p, n_m = next_p, next_m

    m2 = ([], [], [])
    ma = ([], [], [])
    m1, md, kk = ([], []), ([], []), ([], [], [])
    for e, nodes, elems, x in zip(net.edges, edge_nodes, edge_elems, edge_x):
        for i in range(len(elems)):
            xl, xr = x[i], x[i + 1]
            hh = xr - xl
            basis = (np.array([xr / hh, -1.0 / hh]), np.array([-xl / hh, 1.0 / hh]))
            loc = nodes[i:i + 2]
            for a in range(2):
                for b in range(2):
                    m2[0].append(loc[a])
                    m2[1].append(loc[b])
                    m2[2].append(hh / 3.0 if a == b else hh / 6.0)
                    if not e.a.is_zero():
                        ma[0].append(loc[a])
                        ma[1].append(loc[b])
                        ma[2].append(e.a.integrate(xl, xr, P.polymul(basis[a], basis[b])))
            r = elems[i]
            m1[0].append(r)
            m1[1].append(hh)
            md[0].append(r)
            md[1].append(e.d.integrate(xl, xr))
            kk[0].extend((r, r))
            kk[1].extend((loc[0], loc[1]))
            kk[2].extend((-1.0, 1.0))
    M2 = CSRMatrix.from_triplets((n_p, n_p), *m2)
    Ma = CSRMatrix.from_triplets((n_p, n_p), *ma) if ma[0] else CSRMatrix.zeros((n_p, n_p))
    M1 = CSRMatrix.from_triplets((n_m, n_m), m1[0], m1[0], m1[1])
    Md = CSRMatrix.from_triplets((n_m, n_m), md[0], md[0], md[1])
    K = CSRMatrix.from_triplets((n_m, n_p), *kk)
    dir_v, flux_v = net.dirichlet, net.flux
    B = CSRMatrix.from_triplets((len(dir_v), n_p), np.arange(len(dir_v)), dir_v, np.ones(len(dir_v)))
    C = CSRMatrix.from_triplets((len(flux_v), n_p), np.arange(len(flux_v)), flux_v, np.ones(len(flux_v)))
    return AssembledSystem(net, mesh, M1, M2, Md, Ma, K, B, C,
                           tuple(edge_nodes), tuple(edge_elems), tuple(edge_x))


# ---------------------------------------------------------------- load vectors

class LoadTerms:
    """Time-dependent vector sum_i signal_i(t) * vec_i."""

    def __init__(self, size, terms=()):
        self.size = int(size)
        self.terms = [(s, np.asarray(v, dtype=np.float64)) for s, v in terms]

    def __call__(self, t):
        out = np.zeros(self.size)
        for s, v in self.terms:
            out += float(s(t)) * v
        return out

    def at(self, times):
        """Values at an array of times, shape (len(times), size)."""
        times = np.asarray(times, dtype=np.float64)
        out = np.zeros((times.size, self.size))
        for s, v in self.terms:
            out += np.outer(np.broadcast_to(s(times), times.shape), v)
        return out

    def derivative(self):
        return LoadTerms(self.size, [(s.derivative(), v) for s, v in self.terms])

    def scaled(self, M):
        """Apply a matrix (or callable) to every vector."""
        f = M if callable(M) else (lambda v: M @ v)
        terms = [(s, f(v)) for s, v in self.terms]
        size = terms[0][1].size if terms else (M.shape[0] if hasattr(M, "shape") else self.size)
        return LoadTerms(size, terms)

    def __add__(self, other):
        return LoadTerms(self.size, self.terms + other.terms)

    def is_zero(self):
        return all(s.is_zero() or not np.any(v) for s, v in self.terms)


def flux_load(sys, terms_by_edge):
    """(f, w) for the indicator basis w of each element."""
    out = []
    for k, terms in terms_by_edge.items():
        x, elems = sys.edge_x[k], sys.edge_elems[k]
        for term in terms:
            v = np.zeros(sys.n_m)
            v[elems] = [term.profile.integrate(x[i], x[i + 1]) for i in range(len(elems))]
            out.append((term.signal, v))
    return LoadTerms(sys.n_m, out)


def potential_load(sys, terms_by_edge):
    """(g, q) for the hat functions q."""
    out = []
    for k, terms in terms_by_edge.items():
        x, nodes = sys.edge_x[k], sys.edge_nodes[k]
        for term in terms:
            v = np.zeros(sys.n_p)
            for i in range(len(x) - 1):
                xl, xr = x[i], x[i + 1]
                hh = xr - xl
                v[nodes[i]] += term.profile.integrate(xl, xr, [xr / hh, -1.0 / hh])
                v[nodes[i + 1]] += term.profile.integrate(xl, xr, [-xl / hh, 1.0 / hh])
            out.append((term.signal, v))
    return LoadTerms(sys.n_p, out)


@dataclass
class DiscreteData:
    """Assembled right-hand sides.

    ``F`` lives in the flux space, ``G`` in the potential space and already
    contains the coupling load -C^T r; ``H`` holds the dirichlet values.
    Derivatives are exact derivatives of the signals.
    """

    F: LoadTerms
    G: LoadTerms
    H: LoadTerms
    R: LoadTerms = None
    Fdot: LoadTerms = field(init=False)
    Hdot: LoadTerms = field(init=False)

    def __post_init__(self):
        self.Fdot = self.F.derivative()
        self.Hdot = self.H.derivative()


def discretize_data(sys, data):
    net = sys.network
    F = flux_load(sys, data.f)
    G = potential_load(sys, data.g)
    flux_v = net.flux
    rterms = []
    gr = []
    for k, sig in data.r.items():
        row = flux_v.index(k)
        v = np.zeros(sys.n_c)
        v[row] = 1.0
        rterms.append((sig, v))
        w = np.zeros(sys.n_p)
        w[k] = -1.0
        gr.append((sig, w))
    dir_v = net.dirichlet
    hterms = []
    for k, sig in data.h.items():
        v = np.zeros(sys.n_b)
        v[dir_v.index(k)] = 1.0
        hterms.append((sig, v))
    return DiscreteData(F, G + LoadTerms(sys.n_p, gr), LoadTerms(sys.n_b, hterms), LoadTerms(sys.n_c, rterms))


# ---------------------------------------------------------------- initial data

def interpolate_potential(sys, profiles, tol=1e-10):
    """Nodal interpolation of per-edge profiles (dict edge index -> PiecewisePoly).

    Edges without a profile are zero. Values at shared vertices must agree.
    """
    p = np.zeros(sys.n_p)
    seen = {}
    for k in range(len(sys.edge_nodes)):
        prof = profiles.get(k)
        vals = prof(sys.edge_x[k]) if prof is not None else np.zeros(sys.edge_x[k].size)
        nodes = sys.edge_nodes[k]
        p[nodes] = vals
        for end in (0, -1):
            v = int(nodes[end])
            if v in seen and abs(seen[v] - vals[end]) > tol:
                vid = sys.network.vertices[v].id
                raise ValueError(f"initial potential is discontinuous at vertex {vid}")
            seen[v] = vals[end]
    return p


def project_flux(sys, profiles):
    """Element averages (L2 projection onto P0) of per-edge profiles."""
    m = np.zeros(sys.n_m)
    for k, prof in profiles.items():
        x = sys.edge_x[k]
        m[sys.edge_elems[k]] = [prof.integrate(x[i], x[i + 1]) / (x[i + 1] - x[i]) for i in range(len(x) - 1)]
    return m


def consistent_initial_flux(sys, p_vec, f_vec):
    """Flux m solving M_d m = f - K p."""
    dd = sys.Md.diagonal()
    assert np.all(dd > 0), "M_d must be positive definite"
    return (np.asarray(f_vec) - sys.K @ np.asarray(p_vec)) / dd


def kirchhoff_residual(sys, m_vec, r_vec):
    """Sum over incident edges of n^e(v) m^e(v) minus r(v), per flux vertex.

    The flux value at a vertex is the one of the adjacent element.
    """
    net = sys.network
    out = -np.asarray(r_vec, dtype=np.float64).copy()
    for row, v in enumerate(net.flux):
        for k, sign in net.incident(v):
            elems = sys.edge_elems[k]
            out[row] += sign * m_vec[elems[-1] if sign > 0 else elems[0]]
    return out


def check_consistency(sys, p_vec, m_vec, f_vec, r_vec, h_vec=None, tol=1e-12):
    """Residuals of the initial data against the parabolic-limit relations."""
    res = sys.K @ p_vec + sys.Md @ m_vec - f_vec
    scale = max(1.0, float(np.abs(f_vec).max(initial=0.0)), float(np.abs(sys.K @ p_vec).max(initial=0.0)))
    rep = {
        "flux_residual": float(np.linalg.norm(res)),
        "kirchhoff_residual": float(np.linalg.norm(kirchhoff_residual(sys, m_vec, r_vec))),
    }
    rep["m_matches_m0"] = rep["flux_residual"] <= tol * scale
    if h_vec is not None:
        rep["dirichlet_residual"] = float(np.linalg.norm(sys.B @ p_vec - h_vec))
    return rep


def verify_index2(sys, eps):
    """Structural checks behind the index-2 property of the semi-discrete systems.

    Failures are reported, not raised.
    """
    rep = {}
    Bd = sys.B.to_dense()
    rank = row_rank(sys.B)
    rep["B_rank"] = rank
    rep["B_rows"] = sys.n_b
    rep["B_rank_deficiency"] = sys.n_b - rank
    sv = np.linalg.svd(Bd, compute_uv=False) if Bd.size else np.zeros(0)
    rep["B_sigma_min"] = float(sv.min()) if sv.size and rank == sys.n_b else 0.0
    F2 = factorize(sys.M2)
    S = Bd @ F2.solve(Bd.T) if sys.n_b else np.zeros((0, 0))
    ev = np.linalg.eigvalsh(0.5 * (S + S.T)) if S.size else np.zeros(1)
    rep["BM2B_eig_min"] = float(ev.min())
    rep["BM2B_sigma_min"] = float(np.linalg.svd(S, compute_uv=False).min()) if S.size else 0.0
    tol = 1e-12 * max(1.0, float(np.abs(ev).max()))
    schur_ok = rank == sys.n_b and rep["BM2B_sigma_min"] > tol
    rep["schur_nonsingular"] = bool(schur_ok)
    if eps > 0:
        dm = sys.Md.diagonal()
        dmm = dm * dm / sys.M1.diagonal()
        rep["MdM1Md_eig_min"] = float(dmm.min())
        rep["coupled_ok"] = bool(schur_ok and rep["BM2B_eig_min"] > tol and dmm.min() > 0)
        rep["passed"] = bool(schur_ok and rep["coupled_ok"])
    else:
        rep["passed"] = bool(schur_ok)
    return rep


def hamiltonian(sys, p_vec, m_vec, eps):
    """Energy 1/2 eps m^T M1 m + 1/2 p^T M2 p."""
    p_vec = np.asarray(p_vec)
    m_vec = np.asarray(m_vec)
    return 0.5 * eps * float(m_vec @ (sys.M1 @ m_vec)) + 0.5 * float(p_vec @ (sys.M2 @ p_vec))
