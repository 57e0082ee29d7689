"""Batch drivers for the convergence studies.

* ``run_convergence_tau``: time-step convergence of the Euler and Radau IIA
  schemes (p0 and p0 + eps p1) against a fine hyperbolic reference.
* ``run_convergence_eps``: eps-sweep on a single pipe with inconsistent
  initial flux, solved exactly in time by the modal solver, and the fitted
  exponent of ||p - p0|| per mesh.
* ``run_eps_order_study``: eps-order of p0 and p0 + eps p1 at fine tau.
"""

import csv
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .assembly import MeshParams, assemble, discretize_data, interpolate_potential, project_flux
from .modal import ModalSolver
from .network import Scenario, load_scenario, scenario_from_dict
from .norms import fit_power_law, norm_C_L2
from .oracle import series_flux_cell_averages
from .reconstruction import PW_LINEAR, TimeFunction, eps_combination, reconstruct
from .signals import profile_from_json
from .steppers import TimeGrid, solve_coupled_euler, solve_coupled_rk, solve_hyperbolic_reference

FIG3_MESHES = (6, 11, 21, 41, 81, 161, 321, 641, 1281)
TAU_HEADER = ["tau", "err_p0_euler", "err_phat_euler", "err_p0_radau", "err_phat_radau"]
EPS_HEADER = ["h", "N", "alpha", "C", "fit_residual"]
EPS_DETAIL_HEADER = ["N", "eps", "err"]
ORDER_HEADER = ["eps", "err_p0", "err_phat", "err_p0_half_tau", "err_phat_half_tau"]


class ReferenceError(RuntimeError):
    pass


def fig3_eps_grid(count=16):
    """eps_i = 1 / (8 sqrt(2^i)), i = 1..count."""
    i = np.arange(1, count + 1, dtype=np.float64)
    return 1.0 / (8.0 * np.sqrt(2.0 ** i))


@dataclass
class ReferencePolicy:
    """Hyperbolic reference: tableau, tau_ref = tau_min / refine, stored every ``stride`` steps.

    The Richardson check compares against a run with 2 tau_ref and requires
    the self-difference to stay below ``rel`` times the smallest measured
    error or below ``floor``, whichever is larger.
    """

    tableau: str = "radau-iia-2"
    refine: int = 32
    stride: int = 16
    richardson: bool = True
    rel: float = 0.01
    floor: float = 1e-10


@dataclass
class ExperimentConfig:
    scenario: object = "fig1-network"
    T: float = 1.0
    eps: float = 1e-3
    eps_list: tuple = ()
    taus: tuple = ()
    elements: int = 10
    meshes: tuple = FIG3_MESHES
    tableau: str = "radau-iia-2"
    reference: ReferencePolicy = field(default_factory=ReferencePolicy)
    alpha: float = 0.55
    series_terms: int = 12810
    out: str = None

    @classmethod
    def fig2(cls, **kw):
        return cls(taus=tuple(0.2 * 2.0 ** -k for k in range(14)), **kw)

    @classmethod
    def fig3(cls, **kw):
        kw.setdefault("scenario", "single-pipe")
        return cls(eps_list=tuple(fig3_eps_grid()), **kw)

    @classmethod
    def eps_order(cls, **kw):
        kw.setdefault("taus", (1e-3,))
        return cls(eps_list=(1e-2, 1e-3, 1e-4), **kw)

    def validate(self):
        for name in ("T", "eps", "elements"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for seq in (self.taus, self.eps_list, self.meshes):
            if any(not v > 0 for v in seq):
                raise ValueError("all tau, eps and mesh values must be positive")


# ---------------------------------------------------------------- setup helpers

def get_scenario(s):
    if isinstance(s, Scenario):
        return s
    if isinstance(s, dict):
        return scenario_from_dict(s)
    return load_scenario(s)


def initial_vectors(sys, scn):
    """Potential and flux dof vectors of the scenario's initial values."""
    net = sys.network
    init = scn.initial
    p_spec = init.get("p") or {}
    if isinstance(p_spec, dict):
        pp = {net.edge_index(k): profile_from_json(v, net.edges[net.edge_index(k)].length)
              for k, v in p_spec.items()}
    else:
        pp = {k: profile_from_json(p_spec, e.length) for k, e in enumerate(net.edges)}
    p = interpolate_potential(sys, pp)
    m_spec = init.get("m")
    if isinstance(m_spec, dict) and m_spec.get("kind") == "cosine-series":
        m = np.zeros(sys.n_m)
        for k, e in enumerate(net.edges):
            m[sys.edge_elems[k]] = series_flux_cell_averages(sys.edge_x[k] / e.length, m_spec["alpha"],
                                                             int(m_spec.get("terms", 1000)))
    elif isinstance(m_spec, dict):
        m = project_flux(sys, {net.edge_index(k): profile_from_json(v, net.edges[net.edge_index(k)].length)
                               for k, v in m_spec.items()})
    elif isinstance(m_spec, (int, float)):
        m = project_flux(sys, {k: profile_from_json(m_spec, e.length) for k, e in enumerate(net.edges)})
    else:
        m = None
    return p, m


def prepare(scenario, elements):
    scn = get_scenario(scenario)
    sys = assemble(scn.network, MeshParams(elements))
    data = discretize_data(sys, scn.data)
    p, m = initial_vectors(sys, scn)
    if m is None:
        from .assembly import consistent_initial_flux
        m = consistent_initial_flux(sys, p, data.F(0.0))
    return scn, sys, data, p, m


def compute_reference(sys, data, p, m, T, eps, tau_min, policy=ReferencePolicy(), backend=None):
    """Fine hyperbolic run; returns (trajectory, Richardson self-difference or None).

    tau_ref = tau_min / refine lands all grid nodes and midpoints of every
    tau in the study on stored reference nodes when refine / stride = 2.
    """
    tau_ref = tau_min / policy.refine
    grid = TimeGrid.from_tau(T, tau_ref)
    ref = solve_hyperbolic_reference(sys, data, p, m, grid, policy.tableau, eps, stride=policy.stride,
                                     backend=backend)
    diff = None
    if policy.richardson:
        half = policy.stride // 2
        coarse = solve_hyperbolic_reference(sys, data, p, m, TimeGrid(T, grid.n // 2), policy.tableau, eps,
                                            stride=half, backend=backend)
        d = ref.p - coarse.p
        M2 = sys.M2
        diff = float(np.sqrt(np.max(np.einsum("ij,ij->i", d, (M2 @ d.T).T))))
    return ref, diff


def check_reference(diff, errors, policy):
    if diff is None:
        return
    positive = [e for e in errors if e > 0]
    bound = max(policy.rel * min(positive) if positive else 0.0, policy.floor)
    if diff > bound:
        raise ReferenceError(f"reference self-difference {diff:.3e} exceeds {bound:.3e}")


def phat(traj, eps, deg0=1, deg1=1):
    return eps_combination(reconstruct(traj, "p0", degree=deg0), reconstruct(traj, "p1", degree=deg1), eps)


# ---------------------------------------------------------------- tau convergence

@dataclass
class TauStudy:
    rows: list
    reference_diff: float
    tau_ref: float
    timings: dict

    def column(self, name):
        return np.array([r[TAU_HEADER.index(name)] for r in self.rows])


def run_convergence_tau(cfg=None, backend=None, progress=None):
    """Errors of p0 and p0 + eps p1 in C(0, T; M2) for Euler and Radau IIA over ``cfg.taus``."""
    cfg = cfg or ExperimentConfig.fig2()
    cfg.validate()
    scn, sys, data, p, m = prepare(cfg.scenario, cfg.elements)
    eps = cfg.eps
    timings = {}
    t0 = time.perf_counter()
    ref, diff = compute_reference(sys, data, p, m, cfg.T, eps, min(cfg.taus), cfg.reference, backend)
    timings["reference"] = time.perf_counter() - t0
    ref_p = TimeFunction(ref.t, ref.p, PW_LINEAR)
    from .butcher import tableau as get_tableau
    tab = get_tableau(cfg.tableau)
    q = tab.q
    rows = []
    M2 = sys.M2
    for tau in cfg.taus:
        grid = TimeGrid.from_tau(cfg.T, tau)
        eu = solve_coupled_euler(sys, data, p, grid, backend=backend)
        rk = solve_coupled_rk(sys, data, p, grid, tab, backend=backend)
        errs = [
            norm_C_L2(reconstruct(eu, "p0", degree=1) - ref_p, M2),
            norm_C_L2(phat(eu, eps) - ref_p, M2),
            norm_C_L2(reconstruct(rk, "p0", degree=min(q, grid.n)) - ref_p, M2),
            norm_C_L2(phat(rk, eps, min(q, grid.n), min(q - 1, grid.n)) - ref_p, M2),
        ]
        rows.append([tau] + errs)
        if progress:
            progress(tau, errs)
    timings["total"] = time.perf_counter() - t0
    check_reference(diff, [e for r in rows for e in r[1:]], cfg.reference)
    study = TauStudy(rows, diff, min(cfg.taus) / cfg.reference.refine, timings)
    if cfg.out:
        write_csv(cfg.out, TAU_HEADER, rows)
    return study


# ---------------------------------------------------------------- eps convergence

def sweep_times(eps, T, uniform=2001, geometric=3000):
    """Uniform nodes, eps 2^k points (k >= -2) and a dense geometric set from eps/100."""
    k = np.arange(-2, int(math.ceil(math.log2(T / eps))) + 1)
    pts = eps * 2.0 ** k
    return np.unique(np.concatenate((np.linspace(0.0, T, uniform), pts[pts <= T],
                                     np.geomspace(eps / 100.0, T, geometric))))


@dataclass
class EpsStudy:
    rows: list
    errors: dict
    eps: np.ndarray

    @property
    def alphas(self):
        return np.array([r[2] for r in self.rows])


def eps_errors(N, eps_list, alpha=0.55, terms=12810, T=1.0, scenario="single-pipe"):
    """err(eps) = max_t ||p_h(t; eps) - p_{0,h}(t)||_{M2} on a mesh with N elements."""
    scn = get_scenario(scenario)
    sys = assemble(scn.network, MeshParams(N))
    m = np.zeros(sys.n_m)
    for k, e in enumerate(scn.network.edges):
        m[sys.edge_elems[k]] = series_flux_cell_averages(sys.edge_x[k] / e.length, alpha, terms)
    p = np.zeros(sys.n_p)
    ms = ModalSolver(sys)
    return np.array([ms.error_C(eps, p, m, sweep_times(eps, T)) for eps in eps_list])


def run_convergence_eps(cfg=None, progress=None):
    """Fitted exponent of err(eps) per mesh."""
    cfg = cfg or ExperimentConfig.fig3()
    cfg.validate()
    eps = np.asarray(cfg.eps_list, dtype=np.float64)
    rows, errors = [], {}
    for N in cfg.meshes:
        err = eps_errors(int(N), eps, cfg.alpha, cfg.series_terms, cfg.T, cfg.scenario)
        fit = fit_power_law(eps, err)
        rows.append([1.0 / N, int(N), fit.exponent, fit.prefactor, fit.residual])
        errors[int(N)] = err
        if progress:
            progress(N, fit)
    if cfg.out:
        write_csv(cfg.out, EPS_HEADER, rows)
        detail = [[N, e, v] for N, errs in errors.items() for e, v in zip(eps, errs)]
        write_csv(_sibling(cfg.out, "_detail"), EPS_DETAIL_HEADER, detail)
    return EpsStudy(rows, errors, eps)


# ---------------------------------------------------------------- eps order

@dataclass
class OrderStudy:
    rows: list
    slope_p0: float
    slope_phat: float
    reference_diffs: list

    def column(self, name):
        return np.array([r[ORDER_HEADER.index(name)] for r in self.rows])


def _safe_slope(x, y):
    try:
        return fit_power_law(x, y).exponent
    except ValueError:
        return float("nan")


def run_eps_order_study(cfg=None, backend=None, progress=None):
    """C(0, T; M2) errors of p0 and p0 + eps p1 against the reference for each eps, at tau and tau/2."""
    cfg = cfg or ExperimentConfig.eps_order()
    cfg.validate()
    scn, sys, data, p, m = prepare(cfg.scenario, cfg.elements)
    from .butcher import tableau as get_tableau
    tab = get_tableau(cfg.tableau)
    tau = min(cfg.taus)
    M2 = sys.M2
    rows, diffs = [], []
    for eps in cfg.eps_list:
        policy = cfg.reference
        ref, diff = compute_reference(sys, data, p, m, cfg.T, eps, tau / 2, policy, backend)
        ref_p = TimeFunction(ref.t, ref.p, PW_LINEAR)
        row = [eps]
        pair = []
        for tt in (tau, tau / 2):
            rk = solve_coupled_rk(sys, data, p, TimeGrid.from_tau(cfg.T, tt), tab, backend=backend)
            e0 = norm_C_L2(reconstruct(rk, "p0", degree=tab.q) - ref_p, M2, log_eps=eps)
            e1 = norm_C_L2(phat(rk, eps, tab.q, tab.q - 1) - ref_p, M2, log_eps=eps)
            pair.append((e0, e1))
        row += [pair[0][0], pair[0][1], pair[1][0], pair[1][1]]
        rows.append(row)
        diffs.append(diff)
        if progress:
            progress(eps, row)
    eps_arr = np.array([r[0] for r in rows])
    study = OrderStudy(rows, _safe_slope(eps_arr, [r[1] for r in rows]),
                       _safe_slope(eps_arr, [r[2] for r in rows]), diffs)
    if cfg.out:
        write_csv(cfg.out, ORDER_HEADER, rows)
    return study


# ---------------------------------------------------------------- output

def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([repr(int(v)) if isinstance(v, (int, np.integer)) else repr(float(v)) for v in r])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], [[float(v) for v in r] for r in rows[1:]]


def _sibling(path, suffix):
    stem, dot, ext = str(path).rpartition(".")
    return f"{stem}{suffix}.{ext}" if dot else f"{path}{suffix}"


PLOT_TEMPLATE = '''"""Plot the CSV output of the convergence drivers (needs matplotlib)."""
import csv
import sys

import matplotlib.pyplot as plt


def load(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], [[float(v) for v in r] for r in rows[1:]]
    return {{h: [r[i] for r in body] for i, h in enumerate(head)}}


kind = {kind!r}
data = load(sys.argv[1] if len(sys.argv) > 1 else {path!r})
fig, ax = plt.subplots()
if kind == "tau":
    for name in ("err_p0_euler", "err_phat_euler", "err_p0_radau", "err_phat_radau"):
        ax.loglog(data["tau"], data[name], "o-", label=name)
    ax.set_xlabel("tau")
elif kind == "eps":
    ax.semilogx(data["h"], data["alpha"], "o-", label="fitted exponent")
    ax.set_xlabel("h")
else:
    ax.loglog(data["eps"], data["err_p0"], "o-", label="p0")
    ax.loglog(data["eps"], data["err_phat"], "s-", label="p0 + eps p1")
    ax.set_xlabel("eps")
ax.legend()
fig.savefig({png!r}, dpi=150)
'''


def write_plot_script(path, csv_path, kind):
    """Write a standalone matplotlib script for a CSV of kind 'tau', 'eps' or 'order'."""
    png = _sibling(csv_path, "").rpartition(".")[0] + ".png" if "." in str(csv_path) else f"{csv_path}.png"
    with open(path, "w") as fh:
        fh.write(PLOT_TEMPLATE.format(kind=kind, path=str(csv_path), png=png))
