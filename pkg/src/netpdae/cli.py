"""Command line interface ``netpdae``."""

import csv
import json
import os
import sys

import click
import numpy as np

from . import experiments as ex
from .assembly import MeshParams, assemble, discretize_data, verify_index2
from .butcher import ALIASES, tableau
from .oracle import OracleError, integer_split_index, series_flux_cell_averages, series_solution_hyperbolic
from .sparse import set_backend, write_mm
from .steppers import (StepMatrixError, TimeGrid, solve_coupled_euler, solve_coupled_rk, solve_hyperbolic_reference,
                       solve_parabolic_euler, solve_parabolic_rk)

SCHEMES = tuple(ALIASES)


def _mesh_elements(scn, override):
    return override or int(scn.solver.get("elements_per_edge", 10))


@click.group()
@click.option("--backend", type=click.Choice(["cython", "python"]), default=None,
              help="Sparse kernel backend (default: compiled if available).")
def main(backend):
    """Damped linear wave systems on networks: assembly, solvers and convergence studies."""
    if backend:
        set_backend(backend)


@main.command()
@click.option("--config", required=True, help="Scenario JSON file or built-in name.")
@click.option("--elements-per-edge", type=int, default=None)
@click.option("--dump-matrices", type=click.Path(file_okay=False), default=None)
@click.option("--eps", type=float, default=None, help="eps for the index check (default from config).")
def assemble_cmd(config, elements_per_edge, dump_matrices, eps):
    """Assemble the semi-discrete matrices and report dimensions and index checks."""
    scn = ex.get_scenario(config)
    sysm = assemble(scn.network, MeshParams(_mesh_elements(scn, elements_per_edge)))
    eps = eps if eps is not None else float(scn.solver.get("eps", 1e-3))
    rep = verify_index2(sysm, eps)
    click.echo(f"potential dofs {sysm.n_p}, flux dofs {sysm.n_m}, dirichlet {sysm.n_b}, coupling {sysm.n_c}")
    click.echo(json.dumps(rep, indent=2))
    if dump_matrices:
        os.makedirs(dump_matrices, exist_ok=True)
        for name in ("M1", "M2", "Md", "Ma", "K", "B", "C"):
            write_mm(os.path.join(dump_matrices, f"{name}.mtx"), getattr(sysm, name), comment=name)
        click.echo(f"matrices written to {dump_matrices}")


main.add_command(assemble_cmd, name="assemble")


@main.command()
@click.option("--config", required=True)
@click.option("--scheme", type=click.Choice(SCHEMES), default="euler")
@click.option("--order", type=click.Choice(["1", "2", "hyperbolic"]), default="1")
@click.option("--tau", type=float, required=True)
@click.option("--eps", type=float, default=None)
@click.option("--T", "T", type=float, default=None)
@click.option("--elements-per-edge", type=int, default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def solve(config, scheme, order, tau, eps, T, elements_per_edge, out):
    """Integrate one scenario and write the node values as CSV (t, dofs, multipliers)."""
    scn = ex.get_scenario(config)
    _, sysm, data, p, m = ex.prepare(scn, _mesh_elements(scn, elements_per_edge))
    T = T if T is not None else float(scn.solver.get("T", 1.0))
    eps = eps if eps is not None else float(scn.solver.get("eps", 1e-3))
    grid = TimeGrid.from_tau(T, tau)
    tab = tableau(scheme)
    try:
        if order == "hyperbolic":
            traj = solve_hyperbolic_reference(sysm, data, p, m, grid, tab, eps)
        elif order == "1":
            traj = (solve_parabolic_euler(sysm, data, p, grid) if scheme == "euler"
                    else solve_parabolic_rk(sysm, data, p, grid, tab))
        else:
            traj = (solve_coupled_euler(sysm, data, p, grid) if scheme == "euler"
                    else solve_coupled_rk(sysm, data, p, grid, tab))
    except (StepMatrixError, ValueError) as exc:
        raise click.ClickException(str(exc))
    traj.write_csv(out)
    click.echo(f"{traj.scheme}: {grid.n} steps, residuals {json.dumps(traj.residuals)}")


def _plot(plot_script, out, kind):
    if plot_script:
        ex.write_plot_script(plot_script, out, kind)
        click.echo(f"plot script written to {plot_script}")


@main.command("conv-tau")
@click.option("--config", default="fig1-network")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--eps", type=float, default=1e-3)
@click.option("--halvings", type=int, default=14, help="Number of step sizes 0.2 * 2^-k.")
@click.option("--elements-per-edge", type=int, default=10)
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None)
def conv_tau(config, out, eps, halvings, elements_per_edge, plot_script):
    """Step-size convergence of Euler and Radau IIA (p0 and p0 + eps p1)."""
    cfg = ex.ExperimentConfig(scenario=config, eps=eps, elements=elements_per_edge, out=out,
                              taus=tuple(0.2 * 2.0 ** -k for k in range(halvings)))
    study = ex.run_convergence_tau(cfg, progress=lambda tau, e: click.echo(
        f"tau={tau:.4e}  " + "  ".join(f"{v:.4e}" for v in e)))
    click.echo(f"reference self-difference {study.reference_diff:.3e}")
    _plot(plot_script, out, "tau")


@main.command("conv-eps")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--meshes", default=",".join(map(str, ex.FIG3_MESHES)), help="Comma-separated element counts.")
@click.option("--alpha", type=float, default=0.55)
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None)
def conv_eps(out, meshes, alpha, plot_script):
    """Fitted eps-exponent of ||p - p0|| per mesh for inconsistent initial flux."""
    Ns = tuple(int(v) for v in meshes.split(","))
    cfg = ex.ExperimentConfig.fig3(meshes=Ns, alpha=alpha, out=out, series_terms=10 * max(max(Ns), 1281))
    ex.run_convergence_eps(cfg, progress=lambda N, fit: click.echo(f"N={N:5d}  alpha={fit.exponent:.6f}"))
    _plot(plot_script, out, "eps")


@main.command("eps-order")
@click.option("--config", default="fig1-network")
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--tau", type=float, default=1e-4)
@click.option("--eps-list", default="1e-2,1e-3,1e-4")
@click.option("--plot-script", type=click.Path(dir_okay=False), default=None)
def eps_order(config, out, tau, eps_list, plot_script):
    """eps-order of p0 and p0 + eps p1 against the hyperbolic reference."""
    cfg = ex.ExperimentConfig.eps_order(scenario=config, taus=(tau,), out=out,
                                        reference=ex.ReferencePolicy(refine=50, stride=25, richardson=False))
    cfg.eps_list = tuple(float(v) for v in eps_list.split(","))
    study = ex.run_eps_order_study(cfg, progress=lambda e, row: click.echo(
        f"eps={e:.1e}  " + "  ".join(f"{v:.4e}" for v in row[1:])))
    click.echo(f"slope p0 {study.slope_p0:.4f}, slope p0 + eps p1 {study.slope_phat:.4f}")
    _plot(plot_script, out, "order")


@main.command("oracle-check")
@click.option("--eps", type=float, required=True, help="Must give an integer 1/(2 pi sqrt(eps)).")
@click.option("--alpha", type=float, default=0.55)
@click.option("--kmax", type=int, default=8)
@click.option("--elements", type=int, default=80)
@click.option("--tau", type=float, default=1e-4)
@click.option("--T", "T", type=float, default=0.05)
@click.option("--samples", type=int, default=11, help="Number of output times.")
@click.option("--out", type=click.Path(dir_okay=False), default="-")
def oracle_check(eps, alpha, kmax, elements, tau, T, samples, out):
    """Compare the truncated series solution with the discrete hyperbolic solver on one pipe."""
    try:
        integer_split_index(eps)
    except OracleError as exc:
        raise click.ClickException(str(exc))
    if kmax <= integer_split_index(eps):
        raise click.ClickException("kmax must exceed K(eps)")
    scn = ex.get_scenario("single-pipe")
    sysm = assemble(scn.network, MeshParams(elements))
    data = discretize_data(sysm, scn.data)
    m0 = series_flux_cell_averages(sysm.edge_x[0], alpha, kmax)
    grid = TimeGrid.from_tau(T, tau)
    stride = max(1, grid.n // (samples - 1)) if samples > 1 else grid.n
    while grid.n % stride:
        stride -= 1
    traj = solve_hyperbolic_reference(sysm, data, np.zeros(sysm.n_p), m0, grid, "radau-iia-2", eps, stride=stride)
    x = sysm.edge_x[0]
    nodes = sysm.edge_nodes[0]
    p_ser, _ = series_solution_hyperbolic(x, traj.t, eps, alpha, kmax)
    fh = sys.stdout if out == "-" else open(out, "w", newline="")
    try:
        w = csv.writer(fh)
        w.writerow(["t", "x", "p_series", "p_solver", "abs_err"])
        for j, tj in enumerate(traj.t):
            for i, xi in enumerate(x):
                ps, pn = p_ser[j, i], traj.p[j, nodes[i]]
                w.writerow([repr(float(v)) for v in (tj, xi, ps, pn, abs(ps - pn))])
    finally:
        if fh is not sys.stdout:
            fh.close()
    err = np.abs(p_ser - traj.p[:, nodes]).max()
    click.echo(f"max nodal difference {err:.3e}", err=True)


if __name__ == "__main__":  # pragma: no cover
    main()
