"""Upwind advection: CFL limits, conservation, and the moving-peak closed form."""
import math

import numpy as np
import pytest

from magnetworks.fields import GridSpec, ScalarField, VectorField, integrate
from magnetworks.scenario import (
    ConstantVelocity, DensitySpec, GaussianBlob, LinearRadialVelocity,
    ZeroVelocity, sample_density, sample_velocity,
)
from magnetworks.transport import (
    TransportState, advance, cfl_dt, characteristics_density,
    continuity_residual, node_current, step_upwind,
)


def _gaussian_1d(grid, center, width, weight=1.0):
    spec = DensitySpec((GaussianBlob(weight, center, width),), unbalanced_ok=True)
    return sample_density(spec, grid)


# --- cfl_dt -------------------------------------------------------------------

def test_cfl_dt_constant():
    g = GridSpec(1, 10, 0.1)
    assert cfl_dt(ConstantVelocity(2.0), g, cfl=0.9) == pytest.approx(0.045)


def test_cfl_dt_linear_radial():
    g = GridSpec(1, 2000, 0.01)  # domain [0, 20], fastest face at x = 20
    assert cfl_dt(LinearRadialVelocity(), g, cfl=0.9) == pytest.approx(4.5e-4)


def test_cfl_dt_zero_velocity_uses_window():
    g = GridSpec(1, 10, 0.1)
    assert cfl_dt(ZeroVelocity(), g, window=2.5) == 2.5
    with pytest.raises(ValueError):
        cfl_dt(ZeroVelocity(), g)


def test_cfl_dt_bad_cfl():
    g = GridSpec(1, 10, 0.1)
    with pytest.raises(ValueError):
        cfl_dt(ConstantVelocity(1.0), g, cfl=0.0)
    with pytest.raises(ValueError):
        cfl_dt(ConstantVelocity(1.0), g, cfl=1.5)


# --- step_upwind ---------------------------------------------------------------

def test_step_zero_velocity_is_identity():
    g = GridSpec(1, 64, 0.1)
    st = TransportState(0.0, _gaussian_1d(g, 3.0, 0.5), ZeroVelocity())
    out = step_upwind(st, 0.05)
    assert out.t == 0.05
    assert np.array_equal(out.rho.values, st.rho.values)


def test_step_translates_peak():
    # one step at CFL 1 with constant v shifts the profile one cell downstream
    g = GridSpec(1, 100, 0.1)
    st = TransportState(0.0, _gaussian_1d(g, 4.0, 0.6), ConstantVelocity(1.0))
    out = step_upwind(st, 0.1)
    assert out.rho.values[1:] == pytest.approx(st.rho.values[:-1])


def test_step_rejects_cfl_violation():
    g = GridSpec(1, 10, 0.1)
    st = TransportState(0.0, _gaussian_1d(g, 0.5, 0.2), ConstantVelocity(2.0))
    with pytest.raises(ValueError, match="CFL"):
        step_upwind(st, 0.06)
    with pytest.raises(ValueError):
        step_upwind(st, 0.0)


def test_mass_conserved_interior_1000_steps():
    # profile stays far from both walls over the whole run
    g = GridSpec(1, 400, 0.1)  # [0, 40]
    st = TransportState(0.0, _gaussian_1d(g, 5.0, 0.5), ConstantVelocity(0.2))
    m0 = integrate(st.rho)
    for _ in range(1000):
        st = step_upwind(st, 0.09)
    assert integrate(st.rho) == pytest.approx(m0, rel=1e-10)
    assert np.all(st.rho.values >= 0.0)


def test_advance_hits_target_exactly():
    g = GridSpec(1, 200, 0.1)  # [0, 20]
    rho = _gaussian_1d(g, 3.0, 0.5)
    st = TransportState(0.0, rho, LinearRadialVelocity())
    out = advance(st, 0.3)
    assert out.t == pytest.approx(0.3, abs=1e-12)
    assert integrate(out.rho) <= integrate(rho) + 1e-12


def test_advance_requires_forward_target():
    g = GridSpec(1, 20, 0.1)
    st = TransportState(1.0, _gaussian_1d(g, 1.0, 0.3), ZeroVelocity())
    with pytest.raises(ValueError):
        advance(st, 0.5)
    same = advance(st, 1.0)
    assert same.t == 1.0 and np.array_equal(same.rho.values, st.rho.values)


# --- characteristics closed form ------------------------------------------------

def test_characteristics_identity_at_t0():
    spec = DensitySpec((GaussianBlob(1.0, 3.0, 1.0, normalized=True),),
                       unbalanced_ok=True)
    x = np.linspace(0.0, 10.0, 101)
    vals = characteristics_density(spec, 0.0, x)
    amp = 2.0 / (math.sqrt(math.pi) * math.erfc(-3.0))
    assert vals == pytest.approx(amp * np.exp(-((x - 3.0) ** 2)), rel=1e-12)


def test_characteristics_conserves_halfline_mass():
    spec = DensitySpec((GaussianBlob(1.0, 3.0, 1.0, normalized=True),),
                       unbalanced_ok=True)
    for t in (0.0, 0.7, 1.5):
        hi = math.exp(t) * (3.0 + 10.0)
        x = np.linspace(0.0, hi, 400001)
        mass = np.trapezoid(characteristics_density(spec, t, x), x)
        assert mass == pytest.approx(1.0, rel=1e-8)


def test_characteristics_peak_value():
    # initial peak k1 at x=3 decays to k1/e and rides out to x = 3e at t = 1
    spec = DensitySpec((GaussianBlob(1.0, 3.0, 1.0, normalized=True),),
                       unbalanced_ok=True)
    peak = characteristics_density(spec, 1.0, np.array([3.0 * math.e]))[0]
    assert peak == pytest.approx(0.20755604121835017, rel=1e-13)


def test_characteristics_satisfies_continuity_pde():
    # d rho/dt + d(x rho)/dx = 0, checked by central differences
    spec = DensitySpec((GaussianBlob(0.8, 2.0, 0.7),), unbalanced_ok=True)
    x = np.linspace(0.5, 12.0, 2301)
    t, dt, dx = 0.6, 1e-6, x[1] - x[0]
    rho_p = characteristics_density(spec, t + dt, x)
    rho_m = characteristics_density(spec, t - dt, x)
    rho_0 = characteristics_density(spec, t, x)
    ddt = (rho_p - rho_m) / (2 * dt)
    flux = x * rho_0
    ddx = (flux[2:] - flux[:-2]) / (2 * dx)
    resid = ddt[1:-1] + ddx
    assert np.max(np.abs(resid)) <= 1e-4 * np.max(np.abs(rho_0))


def test_characteristics_rejects_unsupported():
    from magnetworks.scenario import UniformPatch
    spec = DensitySpec((UniformPatch(1.0, (0.0, 1.0)),), unbalanced_ok=True)
    with pytest.raises(TypeError):
        characteristics_density(spec, 1.0, np.array([0.5]))
    gspec = DensitySpec((GaussianBlob(1.0, 3.0, 1.0),), unbalanced_ok=True)
    with pytest.raises(TypeError):
        characteristics_density(gspec, 1.0, np.array([0.5]),
                                velocity=ConstantVelocity(1.0))


# --- convergence to the exact profile -------------------------------------------

def _l1_error_at_t1(nx):
    g = GridSpec(1, nx, 20.0 / nx)
    spec = DensitySpec((GaussianBlob(1.0, 3.0, 1.0, normalized=True),),
                       unbalanced_ok=True)
    st = TransportState(0.0, sample_density(spec, g), LinearRadialVelocity())
    out = advance(st, 1.0, cfl=0.9)
    exact = characteristics_density(spec, 1.0, g.cell_centers_x())
    return float(np.sum(np.abs(out.rho.values - exact)) * g.dx)


def test_first_order_convergence():
    e250 = _l1_error_at_t1(250)
    e500 = _l1_error_at_t1(500)
    assert e500 < e250
    assert 0.4 <= e500 / e250 <= 0.6  # measured 0.5277


# --- node_current ----------------------------------------------------------------

def test_node_current_zero_velocity():
    g = GridSpec(1, 8, 0.5)
    rho = _gaussian_1d(g, 2.0, 0.8)
    u = node_current(rho, sample_velocity(ZeroVelocity(), g))
    assert np.all(u.u == 0.0)


def test_node_current_constant_density():
    g = GridSpec(1, 6, 0.25)
    rho = ScalarField(g, np.ones(6))
    u = node_current(rho, sample_velocity(ConstantVelocity(3.0), g))
    assert u.u == pytest.approx(np.full(7, 3.0))


def test_node_current_linear_velocity():
    # rho = 2, v(x) = x gives current 2x sampled at faces
    g = GridSpec(1, 10, 0.2)
    rho = ScalarField(g, np.full(10, 2.0))
    u = node_current(rho, sample_velocity(LinearRadialVelocity(), g))
    faces = g.face_positions_x()
    assert u.u[1:-1] == pytest.approx(2.0 * faces[1:-1], rel=1e-12)


# --- continuity_residual -----------------------------------------------------------

def test_continuity_residual_of_upwind_step():
    g = GridSpec(1, 120, 0.1)
    before = TransportState(0.0, _gaussian_1d(g, 5.0, 0.7), ConstantVelocity(0.8))
    dt = 0.05
    after = step_upwind(before, dt)
    assert continuity_residual(before, after, dt) <= 1e-10
    # a perturbed state is not a valid update
    bad = TransportState(dt, ScalarField(g, after.rho.values + 1e-3), before.v)
    assert continuity_residual(before, bad, dt) > 1e-4


def test_continuity_residual_static():
    g = GridSpec(1, 30, 0.1)
    st = TransportState(0.0, _gaussian_1d(g, 1.5, 0.4), ZeroVelocity())
    assert continuity_residual(st, st, 0.1) == 0.0
