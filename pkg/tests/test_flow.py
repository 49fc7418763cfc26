"""Traffic flow, relay placement, capacity, and run summaries."""
import math

import numpy as np
import pytest

from magnetworks.fields import (
    GridSpec, ScalarField, VectorField, boundary_flux, curl, divergence,
    gradient, integrate,
)
from magnetworks.flow import (
    capacity_check, node_count, relay_density, snapshot_from_potential,
    summarize, time_integrated_count, traffic_flow,
)
from magnetworks.poisson import solve_neumann


def _grid2(nx, ny=None):
    ny = ny or nx
    return GridSpec(2, nx, 1.0 / nx, 0.0, ny, 1.0 / ny, 0.0)


def _blob_pair(grid):
    x, y = np.meshgrid(grid.cell_centers_x(), grid.cell_centers_y(), indexing="ij")
    vals = (np.exp(-((x - 0.3) ** 2 + (y - 0.5) ** 2) / 0.02)
            - np.exp(-((x - 0.7) ** 2 + (y - 0.5) ** 2) / 0.02))
    vals -= vals.mean()
    return ScalarField(grid, vals)


# --- traffic_flow ---------------------------------------------------------------

def test_traffic_flow_constant_potential():
    g = _grid2(8)
    T = traffic_flow(ScalarField(g, np.full((8, 8), 2.5)))
    assert np.all(T.u == 0.0) and np.all(T.v == 0.0)


def test_traffic_flow_is_negative_gradient():
    g = _grid2(12)
    rng = np.random.default_rng(3)
    phi = ScalarField(g, rng.standard_normal((12, 12)))
    T = traffic_flow(phi)
    G = gradient(phi)
    assert np.array_equal(T.u, -G.u)
    assert np.array_equal(T.v, -G.v)
    # zero-flux structure at the walls
    assert np.all(T.u[0, :] == 0.0) and np.all(T.u[-1, :] == 0.0)
    assert np.all(T.v[:, 0] == 0.0) and np.all(T.v[:, -1] == 0.0)


def test_solved_flow_is_curl_free():
    g = _grid2(16)
    sol = solve_neumann(_blob_pair(g), tol=1e-11)
    T = traffic_flow(sol.phi)
    assert float(np.max(np.abs(curl(T)))) <= 1e-12


# --- relay_density ----------------------------------------------------------------

def test_relay_density_zero_flow():
    g = _grid2(6)
    T = VectorField(g, np.zeros((7, 6)), np.zeros((6, 7)))
    eta = relay_density(T)
    assert np.all(eta.values == 0.0)


def test_relay_density_alpha_identity():
    g = _grid2(10)
    sol = solve_neumann(_blob_pair(g), tol=1e-10)
    T = traffic_flow(sol.phi)
    sq = relay_density(T, alpha=2.0)
    lin = relay_density(T, alpha=1.0)
    assert sq.values == pytest.approx(lin.values**2, rel=1e-12, abs=1e-300)


def test_relay_density_rejects_bad_alpha():
    g = _grid2(4)
    T = VectorField(g, np.zeros((5, 4)), np.zeros((4, 5)))
    with pytest.raises(ValueError):
        relay_density(T, alpha=0.0)
    with pytest.raises(ValueError):
        relay_density(T, alpha=-1.0)


def test_relay_density_1d_two_blocks():
    # uniform +1 on the left half, -1 on the right: T(x) rises linearly to
    # x = 1/2 then falls, so eta = T^2 and N = integral = 1/12 - dx^2/12
    nx = 50
    g = GridSpec(1, nx, 1.0 / nx)
    x = g.cell_centers_x()
    rho = ScalarField(g, np.where(x < 0.5, 1.0, -1.0))
    sol = solve_neumann(rho, tol=1e-12)
    eta = relay_density(traffic_flow(sol.phi), 2.0)
    n = node_count(eta)
    assert n == pytest.approx(1.0 / 12.0 - g.dx**2 / 12.0, rel=1e-10)


# --- node_count ---------------------------------------------------------------------

def test_node_count_refines_to_continuum():
    vals = []
    for nx in (50, 100, 200):
        g = GridSpec(1, nx, 1.0 / nx)
        x = g.cell_centers_x()
        rho = ScalarField(g, np.where(x < 0.5, 1.0, -1.0))
        sol = solve_neumann(rho, tol=1e-12)
        vals.append(node_count(relay_density(traffic_flow(sol.phi), 2.0)))
    errs = [abs(v - 1.0 / 12.0) for v in vals]
    assert errs[0] > errs[1] > errs[2]


def test_node_count_zero_and_negative():
    g = _grid2(4)
    assert node_count(ScalarField(g, np.zeros((4, 4)))) == 0.0
    with pytest.raises(ValueError):
        node_count(ScalarField(g, -np.ones((4, 4))))


# --- capacity_check -----------------------------------------------------------------

def test_capacity_equality_at_alpha_two():
    g = _grid2(16)
    sol = solve_neumann(_blob_pair(g), tol=1e-10)
    T = traffic_flow(sol.phi)
    eta = relay_density(T, 2.0)
    rep = capacity_check(T, eta, K=1.0)
    assert rep.passed
    assert rep.max_violation == 0.0  # |T| == sqrt(eta) bitwise


def test_capacity_fails_with_thin_relays():
    g = _grid2(16)
    sol = solve_neumann(_blob_pair(g), tol=1e-10)
    T = traffic_flow(sol.phi)
    eta = relay_density(T, 2.0)
    starved = ScalarField(g, 0.25 * eta.values)
    rep = capacity_check(T, starved, K=1.0)
    assert not rep.passed
    assert rep.max_violation > 0.0


def test_capacity_slack_with_larger_k():
    g = _grid2(16)
    sol = solve_neumann(_blob_pair(g), tol=1e-10)
    T = traffic_flow(sol.phi)
    eta = relay_density(T, 2.0)
    rep = capacity_check(T, eta, K=2.0)
    assert rep.passed and rep.max_violation == 0.0
    with pytest.raises(ValueError):
        capacity_check(T, eta, K=0.0)


# --- time_integrated_count ------------------------------------------------------------

def test_time_integrated_count_exact_for_linear():
    pts = [(0.0, 0.0), (0.5, 0.5), (1.0, 1.0)]
    assert time_integrated_count(pts) == pytest.approx(0.5)
    assert time_integrated_count([(0.0, 2.0), (3.0, 2.0)]) == pytest.approx(6.0)


def test_time_integrated_count_validation():
    with pytest.raises(ValueError):
        time_integrated_count([(0.0, 1.0)])
    with pytest.raises(ValueError):
        time_integrated_count([(0.0, 1.0), (0.0, 2.0)])
    with pytest.raises(ValueError):
        time_integrated_count([(1.0, 1.0), (0.5, 2.0)])
    with pytest.raises(ValueError):
        time_integrated_count([(0.0, 1.0), (1.0, -2.0)])


# --- scaling law ------------------------------------------------------------------------

def test_density_scaling_law():
    # rho -> c rho gives T -> c T, eta -> c^2 eta, N -> c^2 N (alpha = 2)
    g = _grid2(16)
    rho = _blob_pair(g)
    c = 3.0
    scaled = ScalarField(g, c * rho.values)
    base = solve_neumann(rho, tol=1e-12)
    big = solve_neumann(scaled, tol=1e-12)
    T0, T1 = traffic_flow(base.phi), traffic_flow(big.phi)
    assert T1.u == pytest.approx(c * T0.u, rel=1e-9, abs=1e-13)
    assert T1.v == pytest.approx(c * T0.v, rel=1e-9, abs=1e-13)
    e0, e1 = relay_density(T0, 2.0), relay_density(T1, 2.0)
    assert e1.values == pytest.approx(c**2 * e0.values, rel=1e-8, abs=1e-15)
    assert node_count(e1) == pytest.approx(c**2 * node_count(e0), rel=1e-9)


# --- snapshots and summaries ------------------------------------------------------------

def test_snapshot_diagnostics():
    g = _grid2(24)
    rho = _blob_pair(g)
    sol = solve_neumann(rho, tol=1e-11)
    snap = snapshot_from_potential(0.75, rho, sol, alpha=2.0)
    assert snap.t == 0.75
    assert snap.iterations == sol.iterations
    assert snap.curl_max <= 1e-12
    assert snap.flux_residual <= 1e-13
    assert snap.div_residual <= 10 * 1e-11 * float(np.max(np.abs(rho.values)))
    assert snap.node_count == pytest.approx(node_count(snap.eta))


def test_snapshot_1d_has_zero_curl_field():
    nx = 32
    g = GridSpec(1, nx, 1.0 / nx)
    x = g.cell_centers_x()
    rho = ScalarField(g, np.where(x < 0.5, 1.0, -1.0))
    sol = solve_neumann(rho, tol=1e-12)
    snap = snapshot_from_potential(0.0, rho, sol)
    assert snap.curl_max == 0.0
    assert snap.flux_residual <= 1e-12


def test_summarize_single_snapshot():
    g = _grid2(12)
    rho = _blob_pair(g)
    sol = solve_neumann(rho, tol=1e-10)
    snap = snapshot_from_potential(0.0, rho, sol)
    summary = summarize([snap])
    assert summary.times == (0.0,)
    assert summary.time_integrated_count == 0.0
    with pytest.raises(ValueError):
        summarize([])


def test_summarize_sequence():
    g = _grid2(12)
    rho = _blob_pair(g)
    sol = solve_neumann(rho, tol=1e-10)
    snaps = [snapshot_from_potential(t, rho, sol) for t in (0.0, 1.0, 2.0)]
    summary = summarize(snaps)
    n = snaps[0].node_count
    assert summary.node_counts == (n, n, n)
    assert summary.time_integrated_count == pytest.approx(2.0 * n)


# --- minimality of the gradient flow ------------------------------------------------------

def test_gradient_flow_minimizes_node_count():
    # any divergence-free correction w added to T = -grad(phi) raises the
    # quadratic node count: N(T + w) - N(T) = integral |w|^2 >= 0
    rng = np.random.default_rng(7)
    g = _grid2(16)
    rho = _blob_pair(g)
    sol = solve_neumann(rho, tol=1e-10)
    T = traffic_flow(sol.phi)
    n_base = node_count(relay_density(T, 2.0))
    t_scale = math.sqrt(float(np.max(T.u**2)) + float(np.max(T.v**2)))
    for _ in range(50):
        psi = rng.standard_normal((g.nx - 1, g.ny - 1))
        wu = np.zeros((g.nx + 1, g.ny))
        wv = np.zeros((g.nx, g.ny + 1))
        pad = np.zeros((g.nx + 1, g.ny + 1))
        pad[1:-1, 1:-1] = psi
        wu[:, :] = (pad[:, 1:] - pad[:, :-1]) / g.dy
        wv[:, :] = -(pad[1:, :] - pad[:-1, :]) / g.dx
        w = VectorField(g, wu, wv)
        assert float(np.max(np.abs(divergence(w).values))) <= 1e-10
        w_scale = math.sqrt(float(np.max(wu**2)) + float(np.max(wv**2)))
        s = 0.5 * t_scale / w_scale
        bent = VectorField(g, T.u + s * wu, T.v + s * wv)
        n_bent = node_count(relay_density(bent, 2.0))
        assert n_bent >= n_base
