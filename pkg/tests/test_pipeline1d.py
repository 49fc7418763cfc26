"""Line-network solves and the advected closed-form oracle."""
import math

import numpy as np
import pytest

from magnetworks.fields import GridSpec, ScalarField, divergence, gradient
from magnetworks.pipeline1d import (
    advected_flow, advected_node_count, highway_density, highway_flow,
    highway_node_count, snapshot_1d, solve_1d,
)
from magnetworks.scenario import DensitySpec, GaussianBlob, UniformPatch, sample_density


def _two_blocks(nx):
    g = GridSpec(1, nx, 1.0 / nx)
    x = g.cell_centers_x()
    return g, ScalarField(g, np.where(x < 0.5, 1.0, -1.0))


# --- solve_1d -------------------------------------------------------------------

def test_two_blocks_node_count_closed_form():
    # discrete sum telescopes: N = 1/12 - dx^2/12 exactly
    for nx in (10, 50, 128):
        g, rho = _two_blocks(nx)
        flow = solve_1d(rho)
        assert flow.N == pytest.approx(1.0 / 12.0 - g.dx**2 / 12.0, rel=1e-13)


def test_two_blocks_flow_profile():
    g, rho = _two_blocks(64)
    flow = solve_1d(rho)
    x_faces = g.face_positions_x()
    tent = np.where(x_faces < 0.5, x_faces, 1.0 - x_faces)
    assert flow.T.u == pytest.approx(tent, abs=1e-12)
    assert flow.T.u[0] == 0.0
    assert abs(flow.T.u[-1]) <= 1e-12


def test_zero_density():
    g = GridSpec(1, 30, 0.1)
    flow = solve_1d(ScalarField(g, np.zeros(30)))
    assert np.all(flow.T.u == 0.0)
    assert flow.N == 0.0


def test_mirrored_density_mirrors_flow():
    # rho_m(x) = -rho(L - x) carries the same flow read right-to-left:
    # T_m(y) = T(L - y) when the original closes
    g, rho = _two_blocks(80)
    flow = solve_1d(rho)
    mirrored = ScalarField(g, -rho.values[::-1].copy())
    back = solve_1d(mirrored)
    assert back.N == pytest.approx(flow.N, rel=1e-12)
    assert back.T.u == pytest.approx(flow.T.u[::-1], abs=1e-13)


def test_unclosed_flow_raises():
    g = GridSpec(1, 20, 0.05)
    rho = ScalarField(g, np.ones(20))  # pure source, nothing absorbs it
    with pytest.raises(ValueError, match="does not close"):
        solve_1d(rho)


def test_rejects_2d_grid():
    g = GridSpec(2, 4, 0.25, 0.0, 4, 0.25, 0.0)
    with pytest.raises(ValueError):
        solve_1d(ScalarField(g, np.zeros((4, 4))))


def test_flow_inverts_divergence():
    rng = np.random.default_rng(21)
    g = GridSpec(1, 100, 0.01)
    vals = rng.standard_normal(100)
    vals -= vals.mean()
    rho = ScalarField(g, vals)
    flow = solve_1d(rho)
    assert divergence(flow.T).values == pytest.approx(rho.values, abs=1e-12)


def test_alpha_shapes_relay_density():
    g, rho = _two_blocks(40)
    quad = solve_1d(rho, alpha=2.0)
    lin = solve_1d(rho, alpha=1.0)
    assert quad.eta.values == pytest.approx(lin.eta.values**2, rel=1e-12)


# --- snapshot_1d -----------------------------------------------------------------

def test_snapshot_consistency():
    g, rho = _two_blocks(64)
    flow = solve_1d(rho)
    snap = snapshot_1d(1.5, rho, flow)
    assert snap.t == 1.5
    assert snap.curl_max == 0.0
    assert snap.node_count == pytest.approx(flow.N)
    assert snap.flux_residual == abs(float(flow.T.u[-1]))
    # the reconstructed potential drives the same flow on interior faces
    back = -gradient(snap.phi).u
    assert back[1:-1] == pytest.approx(flow.T.u[1:-1], abs=1e-12)
    assert abs(float(np.mean(snap.phi.values))) <= 1e-13
    assert snap.div_residual <= 1e-12


# --- advected closed form ----------------------------------------------------------

def _source_spec():
    return DensitySpec((GaussianBlob(1.0, 3.0, 1.0, normalized=True),),
                       unbalanced_ok=True)


def test_advected_flow_pinned_value():
    # frozen: source at 3 contributes (erf(3) + erf(3)) / (1 + erf(3)), the
    # sink at 10 pulls back (erf(-4) + erf(10)) / (1 + erf(10))
    assert highway_flow(0.0, np.array([6.0]))[0] == pytest.approx(
        0.99998894692087292, rel=1e-13)


def test_advected_flow_boundary_values():
    spec = _source_spec()
    for t in (0.0, 0.5, 2.0):
        # a one-ulp erf cancellation wiggle is the only thing left at x = 0
        assert abs(advected_flow(spec, t, np.array([0.0]))[0]) <= 1e-15
        far = math.exp(t) * 40.0
        # beyond the source all of its mass has been counted: T saturates
        assert abs(advected_flow(spec, t, np.array([far]))[0]
                   - advected_flow(spec, t, np.array([2 * far]))[0]) <= 1e-12


def test_advected_flow_monotone_from_source():
    # all mass originates at the source blob: the cumulative flow rises
    spec = _source_spec()
    x = np.linspace(0.0, 20.0, 400)
    for t in (0.0, 1.0, 2.0):
        f = advected_flow(spec, t, x * math.exp(t))
        assert np.all(np.diff(f) >= -1e-12)
        assert np.all(f >= -1e-12)


def test_advected_flow_two_signs():
    spec = DensitySpec((
        GaussianBlob(1.0, 3.0, 1.0, normalized=True),
        GaussianBlob(-1.0, 10.0, 1.0, normalized=True),
    ))
    for t in (0.0, 1.0):
        x = np.linspace(8.0, 13.0, 200) * math.exp(t)
        f = advected_flow(spec, t, x)
        assert np.all(np.diff(f) <= 1e-12)  # flow falls across the sink
        tail = advected_flow(spec, t, np.array([40.0 * math.exp(t)]))[0]
        assert abs(tail) <= 1e-10  # balanced: the flow closes far out


def test_advected_node_count_pinned_values():
    spec = DensitySpec((
        GaussianBlob(1.0, 3.0, 1.0, normalized=True),
        GaussianBlob(-1.0, 10.0, 1.0, normalized=True),
    ))
    assert advected_node_count(spec, 0.0) == pytest.approx(6.2021066266118288, rel=1e-12)
    assert advected_node_count(spec, 1.0) == pytest.approx(16.859073741284362, rel=1e-12)
    assert advected_node_count(spec, 2.0) == pytest.approx(45.827713795584323, rel=1e-12)


def test_advected_node_count_growth_law():
    # under v(x) = x every length stretches by e^t while the flow through
    # corresponding points is conserved, so N(t) cannot shrink
    spec = DensitySpec((
        GaussianBlob(1.0, 3.0, 1.0, normalized=True),
        GaussianBlob(-1.0, 10.0, 1.0, normalized=True),
    ))
    n0 = advected_node_count(spec, 0.0)
    n1 = advected_node_count(spec, 1.0)
    n2 = advected_node_count(spec, 2.0)
    assert n0 < n1 < n2


# --- highway configuration -----------------------------------------------------------

def test_highway_density_structure():
    spec = highway_density()
    assert len(spec.terms) == 2
    src, snk = spec.terms
    assert isinstance(src, GaussianBlob) and isinstance(snk, GaussianBlob)
    assert src.weight > 0 > snk.weight
    assert src.center == 3.0 and snk.center == 10.0
    assert src.normalized and snk.normalized


def test_highway_wrappers_delegate():
    x = np.linspace(0.0, 30.0, 50)
    assert highway_flow(1.0, x) == pytest.approx(
        advected_flow(highway_density(), 1.0, x))
    assert highway_node_count(1.0) == pytest.approx(
        advected_node_count(highway_density(), 1.0), rel=1e-14)


def test_advected_flow_rejects_patches():
    spec = DensitySpec((UniformPatch(1.0, (0.0, 1.0)),), unbalanced_ok=True)
    with pytest.raises(TypeError):
        advected_flow(spec, 0.0, np.array([0.5]))
