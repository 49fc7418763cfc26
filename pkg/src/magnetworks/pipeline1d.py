"""The 1D fast path: direct integration instead of a potential solve.

On a line there is nothing to minimize: zero-flux closure pins the flow
to the cumulative integral of the density, T(x) = integral of rho up to
x. This module also carries the closed-form flow for Gaussian densities
advected by v(x) = x, and its node count by quadrature, which together
act as the oracle for the full numeric pipeline; the stock two-blob
"highway" configuration (sources at 3, sinks at 10) exercises it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fields import GridSpec, ScalarField, VectorField, boundary_flux, divergence
from .flow import SolveSnapshot, node_count, relay_density
from .scenario import DensitySpec, GaussianBlob, erfc, gaussian_amplitude

__all__ = [
    "Flow1D", "solve_1d", "snapshot_1d",
    "advected_flow", "advected_node_count",
    "highway_density", "highway_flow", "highway_node_count",
]

_SQRT_PI = math.sqrt(math.pi)
_CLOSURE_REL = 1e-6


@dataclass(frozen=True)
class Flow1D:
    """Flow, relay density and node count on a line; T[0] is exactly 0
    and |T[last]| stays below the closure tolerance for balanced input."""

    grid: GridSpec
    T: VectorField
    eta: ScalarField
    N: float


def solve_1d(rho: ScalarField, alpha: float = 2.0) -> Flow1D:
    """Integrate the density into the unique zero-flux flow.

    T at face k is the mass in cells 0..k-1; the final face must come back
    to (numerically) zero, otherwise the input was not balanced and the
    defect is reported instead of silently carried.
    """
    g = rho.grid
    if g.dim != 1:
        raise ValueError("solve_1d: needs a 1D grid")
    u = np.concatenate(([0.0], np.cumsum(rho.values) * g.dx))
    t_scale = float(np.max(np.abs(u)))
    defect = abs(float(u[-1]))
    if defect > _CLOSURE_REL * t_scale:
        raise ValueError(
            f"solve_1d: flow does not close, |T(end)| = {defect:.3e} vs "
            f"max |T| = {t_scale:.3e} (balance the density first)"
        )
    T = VectorField(g, u)
    eta = relay_density(T, alpha)
    return Flow1D(g, T, eta, node_count(eta))


def snapshot_1d(t: float, rho: ScalarField, flow: Flow1D,
                iterations: int = 0) -> SolveSnapshot:
    """Package a 1D solve with the same diagnostics as the 2D path.

    The potential is reconstructed from the flow (phi' = -T), mean-zero;
    there is no curl on a line, and the flux residual is the closure
    defect at the right boundary.
    """
    g = flow.grid
    u = flow.T.u
    phi_vals = np.concatenate(([0.0], np.cumsum(-u[1:-1]) * g.dx))
    phi_vals -= phi_vals.mean()
    phi = ScalarField(g, phi_vals)
    div_res = float(np.max(np.abs(divergence(flow.T).values - rho.values)))
    return SolveSnapshot(
        t=t, rho=rho, phi=phi, T=flow.T, eta=flow.eta,
        node_count=flow.N,
        div_residual=div_res,
        curl_max=0.0,
        flux_residual=abs(boundary_flux(flow.T)),
        iterations=iterations,
    )


def _erf(z: float) -> float:
    return 1.0 - erfc(z)


def advected_flow(spec: DensitySpec, t: float, x):
    """Closed-form cumulative flow of Gaussian terms advected by v(x) = x.

    Each term contributes A w (sqrt(pi)/2) (erf((x e^{-t} - c)/w) + erf(c/w)):
    the advected amplitude decay e^{-t} cancels the stretched integration
    variable's Jacobian e^{t}, so only the argument rescales with time.
    """
    xs = np.asarray(x, dtype=float)
    decay = math.exp(-t)
    total = np.zeros_like(xs)
    for term in spec.terms:
        if not isinstance(term, GaussianBlob):
            raise TypeError("advected_flow: closed form needs gaussian terms")
        amp = gaussian_amplitude(term, 1)
        c = float(term.center)
        w = term.width
        head = _erf(c / w)
        z = (xs * decay - c) / w
        vec = np.vectorize(_erf, otypes=[float])
        total += amp * w * (_SQRT_PI / 2.0) * (vec(z) + head)
    return float(total) if total.ndim == 0 else total


def advected_node_count(spec: DensitySpec, t: float) -> float:
    """Node count for the advected closed-form flow: composite Simpson
    quadrature of T^2 on [0, x_max], with x_max pushed 8 widths past the
    last advected center so the discarded tail is below 1e-8 relative."""
    cmax = max(abs(float(term.center)) for term in spec.terms)
    wmax = max(term.width for term in spec.terms)
    x_max = math.exp(t) * (cmax + 8.0 * wmax)
    n = 4096
    xs = np.linspace(0.0, x_max, n + 1)
    fx = np.asarray(advected_flow(spec, t, xs)) ** 2
    h = x_max / n
    return float(h / 3.0 * (fx[0] + fx[-1] + 4.0 * fx[1:-1:2].sum() + 2.0 * fx[2:-2:2].sum()))


def highway_density() -> DensitySpec:
    """Unit traffic entering around x = 3 and leaving around x = 10, both
    Gaussian with unit width and unit half-line mass."""
    return DensitySpec((
        GaussianBlob(weight=1.0, center=3.0, width=1.0, normalized=True),
        GaussianBlob(weight=-1.0, center=10.0, width=1.0, normalized=True),
    ))


def highway_flow(t: float, x):
    return advected_flow(highway_density(), t, x)


def highway_node_count(t: float) -> float:
    return advected_node_count(highway_density(), t)
