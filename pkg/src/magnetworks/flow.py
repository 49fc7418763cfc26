"""From potential to placement: flow, relay density, node counts.

Once the potential is known, the optimal traffic flow is its negative
gradient: irrotational, zero-flux at walls, and divergence-matching the
source density. The relay density needed to carry that flow scales as
|T|^alpha, and integrating it gives the node count for the snapshot;
integrating those over time gives the figure of merit for a whole run.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import (
    ScalarField, VectorField, boundary_flux, curl, divergence, gradient,
    integrate,
)
from .poisson import PoissonSolution

__all__ = [
    "SolveSnapshot", "RunSummary", "CapacityReport",
    "traffic_flow", "relay_density", "node_count", "capacity_check",
    "time_integrated_count", "snapshot_from_potential", "summarize",
]


@dataclass(frozen=True)
class SolveSnapshot:
    """Everything derived at one snapshot time, plus the diagnostics that
    certify it: div_residual (max |div T - rho|), curl_max (exactly tiny,
    T is a discrete gradient) and flux_residual (net boundary flow)."""

    t: float
    rho: ScalarField
    phi: ScalarField
    T: VectorField
    eta: ScalarField
    node_count: float
    div_residual: float
    curl_max: float
    flux_residual: float
    iterations: int


@dataclass(frozen=True)
class RunSummary:
    times: tuple
    node_counts: tuple
    time_integrated_count: float

    def __post_init__(self):
        object.__setattr__(self, "times", tuple(self.times))
        object.__setattr__(self, "node_counts", tuple(self.node_counts))
        if len(self.times) != len(self.node_counts):
            raise ValueError("summary: times and node_counts differ in length")
        if self.time_integrated_count < 0.0:
            raise ValueError("summary: time-integrated count cannot be negative")


@dataclass(frozen=True)
class CapacityReport:
    passed: bool
    max_violation: float


def traffic_flow(phi: ScalarField) -> VectorField:
    """T = -gradient(phi); inherits the structural zero-flux boundary."""
    g = gradient(phi)
    if phi.grid.dim == 1:
        return VectorField(phi.grid, -g.u)
    return VectorField(phi.grid, -g.u, -g.v)


def _cell_magnitude_sq(T: VectorField) -> np.ndarray:
    # face components averaged onto cells (arithmetic mean of opposing faces)
    if T.grid.dim == 1:
        ax = 0.5 * (T.u[:-1] + T.u[1:])
        return ax * ax
    ax = 0.5 * (T.u[:-1, :] + T.u[1:, :])
    ay = 0.5 * (T.v[:, :-1] + T.v[:, 1:])
    return ax * ax + ay * ay


def relay_density(T: VectorField, alpha: float = 2.0) -> ScalarField:
    """Cell-centered |T|^alpha, the relay density that carries the flow."""
    if not (alpha > 0.0):
        raise ValueError("relay_density: alpha must be positive")
    return ScalarField(T.grid, _cell_magnitude_sq(T) ** (0.5 * alpha))


def node_count(eta: ScalarField) -> float:
    """Total nodes: the integral of the relay density."""
    if float(eta.values.min()) < 0.0:
        raise ValueError("node_count: relay density must be non-negative")
    return integrate(eta)


def capacity_check(T: VectorField, eta: ScalarField, K: float = 1.0) -> CapacityReport:
    """Per-cell throughput bound: |T| <= K sqrt(eta) everywhere.

    With eta = relay_density(T, 2) and K = 1 the bound holds with equality
    (violation exactly 0): nodes are placed to just reach local capacity.
    """
    if not (K > 0.0):
        raise ValueError("capacity_check: K must be positive")
    if T.grid != eta.grid:
        raise ValueError("capacity_check: grids differ")
    mag = np.sqrt(_cell_magnitude_sq(T))
    worst = float(np.max(mag - K * np.sqrt(eta.values)))
    return CapacityReport(passed=worst <= 1e-12, max_violation=max(worst, 0.0))


def time_integrated_count(points) -> float:
    """Trapezoidal integral of recorded (t, N) pairs; exact for linear N."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("time_integrated_count: need at least 2 points")
    total = 0.0
    for (t0, n0), (t1, n1) in zip(pts[:-1], pts[1:]):
        if not t1 > t0:
            raise ValueError("time_integrated_count: times must strictly increase")
        if n0 < 0.0 or n1 < 0.0:
            raise ValueError("time_integrated_count: counts must be non-negative")
        total += 0.5 * (n0 + n1) * (t1 - t0)
    return total


def snapshot_from_potential(t: float, rho: ScalarField, sol: PoissonSolution,
                            alpha: float = 2.0) -> SolveSnapshot:
    """Derive flow, relay density and diagnostics from a potential solve."""
    T = traffic_flow(sol.phi)
    eta = relay_density(T, alpha)
    div_res = float(np.max(np.abs(divergence(T).values - rho.values)))
    curl_max = 0.0
    if rho.grid.dim == 2:
        curl_max = float(np.max(np.abs(curl(T))))
    return SolveSnapshot(
        t=t, rho=rho, phi=sol.phi, T=T, eta=eta,
        node_count=node_count(eta),
        div_residual=div_res,
        curl_max=curl_max,
        flux_residual=abs(boundary_flux(T)),
        iterations=sol.iterations,
    )


def summarize(snapshots) -> RunSummary:
    """Collapse a snapshot sequence to the run-level figures. A single
    snapshot (static scenario) has no time extent: its integral is 0."""
    snaps = list(snapshots)
    if not snaps:
        raise ValueError("summarize: no snapshots")
    times = tuple(s.t for s in snaps)
    counts = tuple(s.node_count for s in snaps)
    tic = 0.0
    if len(snaps) >= 2:
        tic = time_integrated_count(zip(times, counts))
    return RunSummary(times, counts, tic)
