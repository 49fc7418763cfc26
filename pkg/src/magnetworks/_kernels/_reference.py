"""NumPy reference implementations of the hot stencil kernels.

Every function here has a compiled twin in ``_core.pyx``. The two backends
must stay bit-identical: each output element is an independent IEEE-754
expression evaluated in the same order in both, and no reductions happen
inside kernels (sums and dot products belong to the shared driver code).

Array conventions: float64, C-contiguous. 2D scalar fields have shape
(nx, ny); x-normal face arrays (nx+1, ny); y-normal face arrays (nx, ny+1).
Boundary faces of gradients are structurally zero, which encodes the
zero-flux condition grad(phi) . n = 0.
"""
import numpy as np


def gradient_faces_1d(phi, dx):
    nx = phi.shape[0]
    u = np.zeros(nx + 1)
    u[1:-1] = (phi[1:] - phi[:-1]) / dx
    return u


def gradient_faces_2d(phi, dx, dy):
    nx, ny = phi.shape
    u = np.zeros((nx + 1, ny))
    v = np.zeros((nx, ny + 1))
    u[1:-1, :] = (phi[1:, :] - phi[:-1, :]) / dx
    v[:, 1:-1] = (phi[:, 1:] - phi[:, :-1]) / dy
    return u, v


def divergence_1d(u, dx):
    return (u[1:] - u[:-1]) / dx


def divergence_2d(u, v, dx, dy):
    return (u[1:, :] - u[:-1, :]) / dx + (v[:, 1:] - v[:, :-1]) / dy


def neg_div_grad_1d(phi, dx):
    # fused -div(grad(phi)); identical arithmetic to composing the two ops
    u = gradient_faces_1d(phi, dx)
    return -((u[1:] - u[:-1]) / dx)


def neg_div_grad_2d(phi, dx, dy):
    u, v = gradient_faces_2d(phi, dx, dy)
    return -((u[1:, :] - u[:-1, :]) / dx + (v[:, 1:] - v[:, :-1]) / dy)


def upwind_fluxes_1d(rho, vf):
    # donor-cell flux with zero ghost cells: inflow carries nothing,
    # outflow carries the boundary cell value
    nx = rho.shape[0]
    pad = np.zeros(nx + 2)
    pad[1:-1] = rho
    return np.where(vf >= 0.0, pad[:-1], pad[1:]) * vf


def upwind_fluxes_2d(rho, uf, vf):
    nx, ny = rho.shape
    padx = np.zeros((nx + 2, ny))
    padx[1:-1, :] = rho
    fx = np.where(uf >= 0.0, padx[:-1, :], padx[1:, :]) * uf
    pady = np.zeros((nx, ny + 2))
    pady[:, 1:-1] = rho
    fy = np.where(vf >= 0.0, pady[:, :-1], pady[:, 1:]) * vf
    return fx, fy


def _second_difference_1d(p):
    # zero-flux form: missing boundary gradients are structural zeros
    n = p.shape[0]
    dd = np.empty(n)
    dd[1:-1] = (p[2:] - p[1:-1]) - (p[1:-1] - p[:-2])
    dd[0] = p[1] - p[0]
    dd[-1] = p[-2] - p[-1]
    return dd


def fpe_step_1d(p, vf, r, lam):
    """One explicit step: upwind drift (r = dt/dx) plus centered diffusion
    (lam = sigma dt / (2 dx^2)), zero-flux diffusion boundaries."""
    f = upwind_fluxes_1d(p, vf)
    return (p - r * (f[1:] - f[:-1])) + lam * _second_difference_1d(p)


def fpe_step_2d(p, uf, vf, rx, ry, lamx, lamy):
    nx, ny = p.shape
    fx, fy = upwind_fluxes_2d(p, uf, vf)
    ddx = np.empty((nx, ny))
    ddx[1:-1, :] = (p[2:, :] - p[1:-1, :]) - (p[1:-1, :] - p[:-2, :])
    ddx[0, :] = p[1, :] - p[0, :]
    ddx[-1, :] = p[-2, :] - p[-1, :]
    ddy = np.empty((nx, ny))
    ddy[:, 1:-1] = (p[:, 2:] - p[:, 1:-1]) - (p[:, 1:-1] - p[:, :-2])
    ddy[:, 0] = p[:, 1] - p[:, 0]
    ddy[:, -1] = p[:, -2] - p[:, -1]
    return p - rx * (fx[1:, :] - fx[:-1, :]) - ry * (fy[:, 1:] - fy[:, :-1]) \
        + lamx * ddx + lamy * ddy
