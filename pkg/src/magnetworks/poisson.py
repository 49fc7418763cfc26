"""Zero-flux potential solve: -laplacian(phi) = rho with grad(phi).n = 0.

The discrete operator is the composition -divergence(gradient(.)), which
is symmetric positive semidefinite with the constants as nullspace. A
matrix-free conjugate-gradient iteration with per-iteration mean
subtraction picks out the mean-zero representative. The right-hand side
must be (numerically) balanced: with zero-flux walls, sources must equal
sinks or no steady flow exists.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .fields import ScalarField

__all__ = [
    "PoissonSolution", "CompatibilityReport",
    "compatibility_check", "apply_operator", "solve_neumann",
]


@dataclass(frozen=True)
class PoissonSolution:
    phi: ScalarField
    residual_norm: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class CompatibilityReport:
    """Measured imbalance ratio |integral(rho)| / integral(|rho|)."""

    passed: bool
    imbalance: float


def compatibility_check(rho: ScalarField, tol: float = 1e-9) -> CompatibilityReport:
    """A solvable right-hand side must integrate to (numerically) zero.

    Failure is data, not an exception: the pipeline balances and re-checks.
    """
    vals = rho.values
    total = float(abs(vals.sum()))
    scale = float(np.abs(vals).sum())
    ratio = 0.0 if scale == 0.0 else total / scale
    return CompatibilityReport(passed=ratio <= tol, imbalance=ratio)


def _apply(grid, vals: np.ndarray) -> np.ndarray:
    if grid.dim == 1:
        return _kernels.neg_div_grad_1d(vals, grid.dx)
    return _kernels.neg_div_grad_2d(vals, grid.dx, grid.dy)


def apply_operator(phi: ScalarField) -> ScalarField:
    """-divergence(gradient(phi)): one definition shared by the solver and
    every test that probes it (symmetry, semidefiniteness, residuals)."""
    return ScalarField(phi.grid, _apply(phi.grid, phi.values))


def solve_neumann(rho: ScalarField, tol: float = 1e-8,
                  max_iter: int = 10000) -> PoissonSolution:
    """Conjugate gradients on the zero-flux operator.

    Returns once the recomputed (not recurrence) relative residual
    ||A(phi) - rho||_2 / ||rho||_2 drops to tol. At max_iter the best
    iterate comes back with converged = False rather than an exception,
    so callers can inspect the partial result.
    """
    if not (tol > 0.0):
        raise ValueError("solve_neumann: tol must be positive")
    if max_iter < 1:
        raise ValueError("solve_neumann: max_iter must be >= 1")
    report = compatibility_check(rho, tol)
    if not report.passed:
        raise ValueError(
            f"solve_neumann: incompatible right-hand side, imbalance ratio "
            f"{report.imbalance:.3e} exceeds tol {tol:g} (balance it first)"
        )
    grid = rho.grid
    b = rho.values - rho.values.mean()
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        zero = ScalarField(grid, np.zeros(grid.shape))
        return PoissonSolution(zero, 0.0, 0, True)

    x = np.zeros(grid.shape)
    r = b.copy()
    p = r.copy()
    rs = float((r * r).sum())
    check_at = 0.25 * tol * b_norm
    iterations = 0
    for iterations in range(1, max_iter + 1):
        ap = _apply(grid, p)
        denom = float((p * ap).sum())
        if denom <= 0.0:
            break
        alpha = rs / denom
        x += alpha * p
        x -= x.mean()
        r -= alpha * ap
        rs_new = float((r * r).sum())
        if rs_new**0.5 <= check_at:
            true_r = b - _apply(grid, x)
            true_norm = float(np.linalg.norm(true_r))
            if true_norm <= tol * b_norm:
                return PoissonSolution(
                    ScalarField(grid, x), true_norm / b_norm, iterations, True
                )
            # recurrence residual drifted from the true one: restart
            r = true_r
            rs_new = float((r * r).sum())
            p = r.copy()
            rs = rs_new
            continue
        p = r + (rs_new / rs) * p
        rs = rs_new

    x -= x.mean()
    final = float(np.linalg.norm(b - _apply(grid, x))) / b_norm
    return PoissonSolution(ScalarField(grid, x), final, iterations, final <= tol)
