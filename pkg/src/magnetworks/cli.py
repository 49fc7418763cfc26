"""Batch driver: load a scenario, march it in time, solve each snapshot,
write field dumps plus a run summary.

Exit codes are part of the interface: 0 success, 1 configuration or
validation problem, 2 solver non-convergence (a partial summary and a
`run.failed` marker are still written), 3 output I/O failure. All output
files are deterministic for a given scenario and kernel backend: no
timestamps, fixed key order, floats at full precision.
"""
from __future__ import annotations

import argparse
import dataclasses
import math
import os
import sys

import numpy as np

from . import _kernels
from .diffusion import DiffusionParams, stable_dt, step_fokker_planck
from .fields import GridSpec, ScalarField, _fmt, write_scalar_csv, write_vector_csv
from .flow import RunSummary, snapshot_from_potential, summarize
from .pipeline1d import snapshot_1d, solve_1d
from .poisson import solve_neumann
from .scenario import (
    BrownianMobility, DeterministicMobility, GaussianBlob, Scenario,
    ScenarioParseError, ScenarioValidationError, StaticMobility,
    balance, parse_scenario, sample_split_density, sample_velocity,
)
from .transport import TransportState, advance, cfl_dt

__all__ = ["main", "run_scenario", "describe_scenario", "SolverFailure"]

ENV_OUT = "MAGNETWORKS_OUT"


class SolverFailure(RuntimeError):
    """A snapshot solve did not converge; partial outputs were written."""


# ---------------------------------------------------------------------------
# evolution between snapshots
# ---------------------------------------------------------------------------

def _advance_diffusion(field: ScalarField, sigma: float, drift, t0: float,
                       t1: float) -> ScalarField:
    """March one sign's density from t0 to t1 with uniform stable steps."""
    g = field.grid
    span = t1 - t0
    bounds = []
    diff_bound = stable_dt(g, sigma)
    if math.isfinite(diff_bound):
        # leave headroom for the drift part of the combined update
        bounds.append((0.5 if drift is not None else 0.9) * diff_bound)
    if drift is not None:
        if g.dim == 1:
            fac = 0.45 if sigma > 0.0 else 0.9
        else:
            fac = 0.25 if sigma > 0.0 else 0.45
        bounds.append(cfl_dt(drift, cfl=fac, window=span))
    if not bounds:
        return field
    dt_max = min(bounds)
    n = max(1, int(math.ceil(span / dt_max - 1e-12)))
    params = DiffusionParams(sigma, sigma, span / n, drift_plus=drift)
    for _ in range(n):
        field = step_fokker_planck(field, params, "+")
    return field


def _evolve(scn: Scenario, plus: ScalarField, minus: ScalarField,
            t0: float, t1: float, vel, drift_p, drift_m):
    mob = scn.mobility
    if isinstance(mob, StaticMobility):
        return plus, minus
    if isinstance(mob, DeterministicMobility):
        cfl = 0.9 if scn.grid.dim == 1 else 0.45
        plus = advance(TransportState(t0, plus, vel), t1, cfl=cfl).rho
        minus = advance(TransportState(t0, minus, vel), t1, cfl=cfl).rho
        return plus, minus
    plus = _advance_diffusion(plus, mob.sigma_plus, drift_p, t0, t1)
    minus = _advance_diffusion(minus, mob.sigma_minus, drift_m, t0, t1)
    return plus, minus


# ---------------------------------------------------------------------------
# the run
# ---------------------------------------------------------------------------

def _solve_snapshot(scn: Scenario, t: float, rho_balanced: ScalarField):
    if scn.grid.dim == 1:
        return snapshot_1d(t, rho_balanced, solve_1d(rho_balanced, scn.alpha))
    sol = solve_neumann(rho_balanced, scn.poisson_tol)
    if not sol.converged:
        raise SolverFailure(
            f"potential solve at t={t:g} stopped at relative residual "
            f"{sol.residual_norm:.3e} after {sol.iterations} iterations"
        )
    return snapshot_from_potential(t, rho_balanced, sol, scn.alpha)


def _dump_fields(out_dir: str, index: int, plus, minus, snap) -> None:
    base = os.path.join(out_dir, f"snapshot_{index:04d}_")
    write_scalar_csv(plus, base + "rho_plus.csv")
    write_scalar_csv(minus, base + "rho_minus.csv")
    write_scalar_csv(snap.rho, base + "rho.csv")
    write_scalar_csv(snap.phi, base + "phi.csv")
    if snap.rho.grid.dim == 1:
        write_vector_csv(snap.T, base + "T_u.csv")
    else:
        write_vector_csv(snap.T, base + "T_u.csv", base + "T_v.csv")
    write_scalar_csv(snap.eta, base + "eta.csv")


def _summary_rows(snapshots) -> list[str]:
    rows = ["t,node_count,div_residual,curl_max,flux_residual,iterations"]
    for s in snapshots:
        rows.append(",".join([
            _fmt(s.t), _fmt(s.node_count), _fmt(s.div_residual),
            _fmt(s.curl_max), _fmt(s.flux_residual), str(s.iterations),
        ]))
    return rows


def _write_lines(path: str, lines) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line + "\n")


def _term_line(term) -> str:
    if isinstance(term, GaussianBlob):
        if np.ndim(term.center) == 0:
            center = _fmt(float(term.center))
        else:
            center = ",".join(_fmt(c) for c in term.center)
        return (f"gaussian weight={_fmt(term.weight)} center={center} "
                f"width={_fmt(term.width)} normalized={str(term.normalized).lower()}")
    ext = ",".join(_fmt(e) for e in term.extent)
    return f"uniform level={_fmt(term.level)} extent={ext}"


def _velocity_name(vel) -> str:
    return type(vel).__name__ if vel is not None else "none"


def _meta_lines(scn: Scenario, scenario_path: str, out_dir: str, stride: int) -> list[str]:
    g = scn.grid
    lines = [
        "format = magnetworks-run-meta 1",
        f"scenario = {os.path.basename(scenario_path)}",
        f"kernel_backend = {_kernels.BACKEND}",
        f"grid.dim = {g.dim}",
        f"grid.nx = {g.nx}",
        f"grid.dx = {_fmt(g.dx)}",
        f"grid.x0 = {_fmt(g.x0)}",
        f"grid.x_max = {_fmt(g.x_max)}",
    ]
    if g.dim == 2:
        lines += [
            f"grid.ny = {g.ny}",
            f"grid.dy = {_fmt(g.dy)}",
            f"grid.y0 = {_fmt(g.y0)}",
            f"grid.y_max = {_fmt(g.y_max)}",
        ]
    for i, term in enumerate(scn.density.terms, start=1):
        lines.append(f"density.{i} = {_term_line(term)}")
    mob = scn.mobility
    if isinstance(mob, StaticMobility):
        lines.append("mobility.model = static")
    elif isinstance(mob, DeterministicMobility):
        lines.append("mobility.model = deterministic")
        lines.append(f"mobility.velocity = {_velocity_name(mob.velocity)}")
    else:
        lines.append("mobility.model = brownian")
        lines.append(f"mobility.sigma_plus = {_fmt(mob.sigma_plus)}")
        lines.append(f"mobility.sigma_minus = {_fmt(mob.sigma_minus)}")
        lines.append(f"mobility.drift_plus = {_velocity_name(mob.drift_plus)}")
        lines.append(f"mobility.drift_minus = {_velocity_name(mob.drift_minus)}")
    lines += [
        f"solver.alpha = {_fmt(scn.alpha)}",
        f"solver.t_start = {_fmt(scn.t_start)}",
        f"solver.t_end = {_fmt(scn.t_end)}",
        f"solver.n_steps = {scn.n_steps}",
        f"solver.poisson_tol = {_fmt(scn.poisson_tol)}",
        f"solver.balance_tol = {_fmt(scn.balance_tol)}",
        f"run.stride = {stride}",
        f"run.snapshots = {len(scn.snapshot_times)}",
        f"run.output_dir = {out_dir}",
    ]
    return lines


def run_scenario(scn: Scenario, out_dir: str, stride: int = 1,
                 scenario_path: str = "<inline>") -> RunSummary:
    """Execute the evolve / balance / solve / derive loop and write all
    output files. Raises SolverFailure after writing partial outputs if a
    snapshot solve does not converge."""
    if stride < 1:
        raise ScenarioValidationError("stride must be >= 1")
    os.makedirs(out_dir, exist_ok=True)
    grid = scn.grid
    plus, minus = sample_split_density(scn.density, grid)

    vel = drift_p = drift_m = None
    mob = scn.mobility
    if isinstance(mob, DeterministicMobility):
        vel = sample_velocity(mob.velocity, grid)
    elif isinstance(mob, BrownianMobility):
        if mob.drift_plus is not None:
            drift_p = sample_velocity(mob.drift_plus, grid)
        if mob.drift_minus is not None:
            drift_m = sample_velocity(mob.drift_minus, grid)

    times = scn.snapshot_times
    last = len(times) - 1
    snapshots = []
    try:
        for k, t in enumerate(times):
            if k > 0:
                plus, minus = _evolve(scn, plus, minus, times[k - 1], t,
                                      vel, drift_p, drift_m)
            signed = ScalarField(grid, plus.values - minus.values)
            balanced = balance(signed, scn.balance_tol)
            snap = _solve_snapshot(scn, t, balanced)
            snapshots.append(snap)
            if k % stride == 0 or k == last:
                _dump_fields(out_dir, k, plus, minus, snap)
    except SolverFailure as fail:
        _write_lines(os.path.join(out_dir, "summary.csv"), _summary_rows(snapshots))
        _write_lines(os.path.join(out_dir, "run.failed"), [str(fail)])
        raise

    _write_lines(os.path.join(out_dir, "summary.csv"), _summary_rows(snapshots))
    _write_lines(os.path.join(out_dir, "run.meta"),
                 _meta_lines(scn, scenario_path, out_dir, stride))
    return summarize(snapshots)


# ---------------------------------------------------------------------------
# describe (dry run)
# ---------------------------------------------------------------------------

def _step_estimate(scn: Scenario, vel, drift_p, drift_m) -> list[str]:
    times = scn.snapshot_times
    if len(times) < 2:
        return ["time loop: static, single snapshot"]
    span = times[1] - times[0]
    mob = scn.mobility
    if isinstance(mob, DeterministicMobility):
        cfl = 0.9 if scn.grid.dim == 1 else 0.45
        dt = cfl_dt(vel, cfl=cfl, window=span)
        n = max(1, int(math.ceil(span / dt - 1e-12)))
        return [
            f"transport dt <= {dt:.6g} (cfl {cfl})",
            f"steps per interval: {n}; intervals: {len(times) - 1}; "
            f"total steps: {n * (len(times) - 1)} per sign",
        ]
    lines = []
    for name, sigma, drift in (("plus", mob.sigma_plus, drift_p),
                               ("minus", mob.sigma_minus, drift_m)):
        bounds = []
        diff_bound = stable_dt(scn.grid, sigma)
        if math.isfinite(diff_bound):
            bounds.append((0.5 if drift is not None else 0.9) * diff_bound)
        if drift is not None:
            fac = (0.45 if sigma > 0 else 0.9) if scn.grid.dim == 1 \
                else (0.25 if sigma > 0 else 0.45)
            bounds.append(cfl_dt(drift, cfl=fac, window=span))
        if not bounds:
            lines.append(f"{name}: static (sigma 0, no drift)")
            continue
        dt = min(bounds)
        n = max(1, int(math.ceil(span / dt - 1e-12)))
        lines.append(f"{name}: dt <= {dt:.6g}, {n} steps per interval")
    return lines


def describe_scenario(scn: Scenario, out_dir: str) -> list[str]:
    """Resolved-configuration report: grid, stepping, memory; no writes."""
    g = scn.grid
    vel = drift_p = drift_m = None
    mob = scn.mobility
    if isinstance(mob, DeterministicMobility):
        vel = sample_velocity(mob.velocity, g)
    elif isinstance(mob, BrownianMobility):
        if mob.drift_plus is not None:
            drift_p = sample_velocity(mob.drift_plus, g)
        if mob.drift_minus is not None:
            drift_m = sample_velocity(mob.drift_minus, g)
    if g.dim == 1:
        grid_line = f"grid: 1D, nx={g.nx}, dx={g.dx:g}, x in [{g.x0:g}, {g.x_max:g}]"
        nfaces = g.nx + 1
    else:
        grid_line = (f"grid: 2D, nx={g.nx}, ny={g.ny}, dx={g.dx:g}, dy={g.dy:g}, "
                     f"x in [{g.x0:g}, {g.x_max:g}], y in [{g.y0:g}, {g.y_max:g}]")
        nfaces = (g.nx + 1) * g.ny + g.nx * (g.ny + 1)
    mem_mb = (g.ncells * 8 + nfaces) * 8 / 1e6
    times = scn.snapshot_times
    lines = [
        grid_line,
        f"cells: {g.ncells}",
        f"mobility: {type(mob).__name__}",
        "snapshot times: " + ", ".join(f"{t:g}" for t in times),
    ]
    lines += _step_estimate(scn, vel, drift_p, drift_m)
    lines += [
        f"solver: alpha={scn.alpha:g}, poisson_tol={scn.poisson_tol:g}, "
        f"balance_tol={scn.balance_tol:g}",
        f"memory estimate: {mem_mb:.2f} MB",
        f"kernel backend: {_kernels.BACKEND}",
        f"output dir (resolved): {out_dir}",
    ]
    return lines


# ---------------------------------------------------------------------------
# argument handling
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    # config errors must exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="magnetworks",
        description="Relay placement for dense mobile sensor networks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, text in (("run", "run a scenario and write outputs"),
                       ("describe", "print the resolved configuration, no writes")):
        p = sub.add_parser(name, help=text, description=text)
        p.add_argument("scenario", help="path to a scenario .ini file")
        p.add_argument("--out", help="output directory (overrides scenario and "
                                     f"the {ENV_OUT} environment variable)")
        p.add_argument("--nx", type=int,
                       help="override x resolution, keeping the domain extent")
        p.add_argument("--tol", type=float, help="override the potential solve tolerance")
        if name == "run":
            p.add_argument("--stride", type=int, default=1,
                           help="dump fields every k-th snapshot (default 1; "
                                "the final snapshot is always dumped)")
    return parser


def _apply_overrides(scn: Scenario, args) -> Scenario:
    if args.nx is not None:
        g = scn.grid
        extent = g.nx * g.dx
        if args.nx < 1:
            raise ScenarioValidationError("grid: nx override must be >= 1")
        new_dx = extent / args.nx
        if g.dim == 1:
            grid = GridSpec(1, args.nx, new_dx, g.x0)
        else:
            grid = GridSpec(2, args.nx, new_dx, g.x0, g.ny, g.dy, g.y0)
        scn = dataclasses.replace(scn, grid=grid)
    if args.tol is not None:
        scn = dataclasses.replace(scn, poisson_tol=args.tol)
    return scn


def _resolve_out(scn: Scenario, args) -> str:
    if args.out:
        return args.out
    if scn.output_dir:
        return scn.output_dir
    return os.environ.get(ENV_OUT) or "out"


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        scn = parse_scenario(args.scenario)
        scn = _apply_overrides(scn, args)
        if args.command == "run" and args.stride < 1:
            raise ScenarioValidationError("stride must be >= 1")
    except (ScenarioParseError, ScenarioValidationError, ValueError) as exc:
        print(f"magnetworks: error: {exc}", file=sys.stderr)
        return 1
    out_dir = _resolve_out(scn, args)

    if args.command == "describe":
        for line in describe_scenario(scn, out_dir):
            print(line)
        return 0

    try:
        summary = run_scenario(scn, out_dir, args.stride, args.scenario)
    except SolverFailure as exc:
        print(f"magnetworks: solver failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"magnetworks: i/o error: {exc}", file=sys.stderr)
        return 3
    except (ScenarioValidationError, ValueError) as exc:
        print(f"magnetworks: error: {exc}", file=sys.stderr)
        return 1
    last = summary.node_counts[-1]
    print(f"wrote {len(summary.times)} snapshot(s) to {out_dir}; "
          f"final node count {last:.17g}; "
          f"time-integrated count {summary.time_integrated_count:.17g}")
    return 0
