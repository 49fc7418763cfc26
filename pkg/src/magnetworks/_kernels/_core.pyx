# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled twins of the reference kernels.

Arithmetic must match _reference.py bit for bit: same per-element expression,
same evaluation order, no fused multiply-add (built without -ffast-math or
-march flags), no reductions.
"""
import numpy as np

cimport numpy as cnp

cnp.import_array()


def gradient_faces_1d(const double[::1] phi, double dx):
    cdef Py_ssize_t nx = phi.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.zeros(nx + 1)
    cdef double[::1] u = out
    cdef Py_ssize_t i
    for i in range(1, nx):
        u[i] = (phi[i] - phi[i - 1]) / dx
    return out


def gradient_faces_2d(const double[:, ::1] phi, double dx, double dy):
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1]
    cdef cnp.ndarray[double, ndim=2] uo = np.zeros((nx + 1, ny))
    cdef cnp.ndarray[double, ndim=2] vo = np.zeros((nx, ny + 1))
    cdef double[:, ::1] u = uo
    cdef double[:, ::1] v = vo
    cdef Py_ssize_t i, j
    for i in range(1, nx):
        for j in range(ny):
            u[i, j] = (phi[i, j] - phi[i - 1, j]) / dx
    for i in range(nx):
        for j in range(1, ny):
            v[i, j] = (phi[i, j] - phi[i, j - 1]) / dy
    return uo, vo


def divergence_1d(const double[::1] u, double dx):
    cdef Py_ssize_t nx = u.shape[0] - 1
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nx)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(nx):
        o[i] = (u[i + 1] - u[i]) / dx
    return out


def divergence_2d(const double[:, ::1] u, const double[:, ::1] v, double dx, double dy):
    cdef Py_ssize_t nx = v.shape[0], ny = u.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double tx, ty
    for i in range(nx):
        for j in range(ny):
            tx = (u[i + 1, j] - u[i, j]) / dx
            ty = (v[i, j + 1] - v[i, j]) / dy
            o[i, j] = tx + ty
    return out


def neg_div_grad_1d(const double[::1] phi, double dx):
    cdef Py_ssize_t nx = phi.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nx)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double gl, gr
    for i in range(nx):
        gl = 0.0 if i == 0 else (phi[i] - phi[i - 1]) / dx
        gr = 0.0 if i == nx - 1 else (phi[i + 1] - phi[i]) / dx
        o[i] = -((gr - gl) / dx)
    return out


def neg_div_grad_2d(const double[:, ::1] phi, double dx, double dy):
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1]
    cdef cnp.ndarray[double, ndim=2] out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double gxl, gxr, gyl, gyr, tx, ty
    for i in range(nx):
        for j in range(ny):
            gxl = 0.0 if i == 0 else (phi[i, j] - phi[i - 1, j]) / dx
            gxr = 0.0 if i == nx - 1 else (phi[i + 1, j] - phi[i, j]) / dx
            gyl = 0.0 if j == 0 else (phi[i, j] - phi[i, j - 1]) / dy
            gyr = 0.0 if j == ny - 1 else (phi[i, j + 1] - phi[i, j]) / dy
            tx = (gxr - gxl) / dx
            ty = (gyr - gyl) / dy
            o[i, j] = -(tx + ty)
    return out


cdef inline double _donor(double vf, double left, double right) nogil:
    return (left if vf >= 0.0 else right) * vf


def upwind_fluxes_1d(const double[::1] rho, const double[::1] vf):
    cdef Py_ssize_t nx = rho.shape[0]
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nx + 1)
    cdef double[::1] f = out
    cdef Py_ssize_t k
    cdef double left, right
    for k in range(nx + 1):
        left = 0.0 if k == 0 else rho[k - 1]
        right = 0.0 if k == nx else rho[k]
        f[k] = _donor(vf[k], left, right)
    return out


def upwind_fluxes_2d(const double[:, ::1] rho, const double[:, ::1] uf, const double[:, ::1] vf):
    cdef Py_ssize_t nx = rho.shape[0], ny = rho.shape[1]
    cdef cnp.ndarray[double, ndim=2] fxo = np.empty((nx + 1, ny))
    cdef cnp.ndarray[double, ndim=2] fyo = np.empty((nx, ny + 1))
    cdef double[:, ::1] fx = fxo
    cdef double[:, ::1] fy = fyo
    cdef Py_ssize_t i, j
    cdef double left, right
    for i in range(nx + 1):
        for j in range(ny):
            left = 0.0 if i == 0 else rho[i - 1, j]
            right = 0.0 if i == nx else rho[i, j]
            fx[i, j] = _donor(uf[i, j], left, right)
    for i in range(nx):
        for j in range(ny + 1):
            left = 0.0 if j == 0 else rho[i, j - 1]
            right = 0.0 if j == ny else rho[i, j]
            fy[i, j] = _donor(vf[i, j], left, right)
    return fxo, fyo


def fpe_step_1d(const double[::1] p, const double[::1] vf, double r, double lam):
    cdef Py_ssize_t nx = p.shape[0]
    cdef cnp.ndarray[double, ndim=1] fo = upwind_fluxes_1d(p, vf)
    cdef double[::1] f = fo
    cdef cnp.ndarray[double, ndim=1] out = np.empty(nx)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    cdef double dd
    for i in range(nx):
        if i == 0:
            dd = p[1] - p[0]
        elif i == nx - 1:
            dd = p[nx - 2] - p[nx - 1]
        else:
            dd = (p[i + 1] - p[i]) - (p[i] - p[i - 1])
        o[i] = (p[i] - r * (f[i + 1] - f[i])) + lam * dd
    return out


def fpe_step_2d(const double[:, ::1] p, const double[:, ::1] uf, const double[:, ::1] vf,
                double rx, double ry, double lamx, double lamy):
    cdef Py_ssize_t nx = p.shape[0], ny = p.shape[1]
    fxo, fyo = upwind_fluxes_2d(p, uf, vf)
    cdef double[:, ::1] fx = fxo
    cdef double[:, ::1] fy = fyo
    cdef cnp.ndarray[double, ndim=2] out = np.empty((nx, ny))
    cdef double[:, ::1] o = out
    cdef Py_ssize_t i, j
    cdef double ddx, ddy
    for i in range(nx):
        for j in range(ny):
            if i == 0:
                ddx = p[1, j] - p[0, j]
            elif i == nx - 1:
                ddx = p[nx - 2, j] - p[nx - 1, j]
            else:
                ddx = (p[i + 1, j] - p[i, j]) - (p[i, j] - p[i - 1, j])
            if j == 0:
                ddy = p[i, 1] - p[i, 0]
            elif j == ny - 1:
                ddy = p[i, ny - 2] - p[i, ny - 1]
            else:
                ddy = (p[i, j + 1] - p[i, j]) - (p[i, j] - p[i, j - 1])
            o[i, j] = p[i, j] - rx * (fx[i + 1, j] - fx[i, j]) \
                - ry * (fy[i, j + 1] - fy[i, j]) + lamx * ddx + lamy * ddy
    return out
