"""Brownian density evolution: explicit Fokker-Planck stepping.

Each sign of the density spreads under its own variance rate sigma
(position variance grows by sigma per unit time, so the diffusion
coefficient in front of the Laplacian is sigma/2) plus an optional drift.
Drift moves mass with the donor-cell fluxes of the transport scheme;
diffusion uses centered second differences with zero-flux walls, so mass
is conserved to round-off and positivity survives inside the stability
bound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fields import ScalarField, VectorField
from .scenario import VelocitySpec, sample_velocity
from .transport import cfl_dt

__all__ = [
    "DiffusionParams", "step_fokker_planck", "heat_kernel",
    "static_destination_density", "stable_dt",
]


@dataclass(frozen=True)
class DiffusionParams:
    """Per-sign variance rates and optional drifts, plus the step size."""

    sigma_plus: float
    sigma_minus: float
    dt: float
    drift_plus: VectorField | VelocitySpec | None = None
    drift_minus: VectorField | VelocitySpec | None = None

    def __post_init__(self):
        if self.sigma_plus < 0.0 or self.sigma_minus < 0.0:
            raise ValueError("diffusion: sigma values must be >= 0")
        if not (self.dt > 0.0):
            raise ValueError("diffusion: dt must be positive")

    def pick(self, sign: str):
        if sign == "+":
            return self.sigma_plus, self.drift_plus
        if sign == "-":
            return self.sigma_minus, self.drift_minus
        raise ValueError("diffusion: sign must be '+' or '-'")


def stable_dt(grid, sigma: float) -> float:
    """Largest dt the explicit diffusion update accepts: 0.5 dx^2 / sigma
    in 1D, the harmonic combination of both spacings in 2D. Infinite when
    sigma = 0 (no diffusion, no diffusive limit)."""
    if sigma == 0.0:
        return math.inf
    inv = 1.0 / grid.dx**2
    if grid.dim == 2:
        inv += 1.0 / grid.dy**2
    return 0.5 / (sigma * inv)


def step_fokker_planck(p: ScalarField, params: DiffusionParams, sign: str) -> ScalarField:
    """One explicit step for the chosen sign's density.

    dt must sit inside both the diffusion bound (stable_dt) and, when a
    drift is present, the drift CFL limit; either violation is an error
    rather than a silent blowup.
    """
    g = p.grid
    sigma, drift = params.pick(sign)
    dt = params.dt
    if dt > stable_dt(g, sigma) * (1.0 + 1e-12):
        raise ValueError(
            f"diffusion: dt={dt:g} exceeds the stability bound "
            f"{stable_dt(g, sigma):g} for sigma={sigma:g}"
        )
    if drift is not None:
        v = sample_velocity(drift, g)
        if dt > cfl_dt(v, cfl=1.0, window=math.inf) * (1.0 + 1e-12):
            raise ValueError("diffusion: dt exceeds the drift CFL limit")
    else:
        v = None
    half = 0.5 * sigma * dt
    if g.dim == 1:
        u = v.u if v is not None else np.zeros(g.nx + 1)
        out = _kernels.fpe_step_1d(p.values, u, dt / g.dx, half / g.dx**2)
    else:
        u = v.u if v is not None else np.zeros((g.nx + 1, g.ny))
        w = v.v if v is not None else np.zeros((g.nx, g.ny + 1))
        out = _kernels.fpe_step_2d(p.values, u, w, dt / g.dx, dt / g.dy,
                                   half / g.dx**2, half / g.dy**2)
    return ScalarField(g, out)


def heat_kernel(x, t: float, sigma: float):
    """Point-source solution e^{-x^2/(2 t sigma)} / sqrt(2 pi t sigma):
    unit mass for all t, variance t * sigma."""
    if not (t > 0.0):
        raise ValueError("heat_kernel: t must be positive")
    if not (sigma > 0.0):
        raise ValueError("heat_kernel: sigma must be positive")
    x = np.asarray(x, dtype=float)
    var = t * sigma
    out = np.exp(-(x * x) / (2.0 * var)) / math.sqrt(2.0 * math.pi * var)
    return float(out) if out.ndim == 0 else out


def static_destination_density(rho_minus_0: ScalarField):
    """Time-constant destination field: the sigma = 0, no-drift limit.
    Returns a callable mapping any query time to the initial field."""

    def at(t: float) -> ScalarField:
        return rho_minus_0

    return at
