"""Relay placement for massively dense mobile sensor networks.

The workflow mirrors an electrostatics problem: source and destination
densities evolve in time (deterministic drift or Brownian motion), each
snapshot's net density drives a zero-flux potential solve, the negative
potential gradient is the optimal traffic flow, and |flow|^alpha is the
relay density whose integral counts the nodes needed.
"""
from ._kernels import BACKEND as kernel_backend
from .diffusion import (
    DiffusionParams, heat_kernel, stable_dt, static_destination_density,
    step_fokker_planck,
)
from .fields import (
    GridSpec, ScalarField, VectorField, boundary_flux, curl, divergence,
    gradient, integrate, read_scalar_csv, read_vector_csv, write_scalar_csv,
    write_vector_csv,
)
from .flow import (
    CapacityReport, RunSummary, SolveSnapshot, capacity_check, node_count,
    relay_density, snapshot_from_potential, summarize, time_integrated_count,
    traffic_flow,
)
from .pipeline1d import (
    Flow1D, advected_flow, advected_node_count, highway_density, highway_flow,
    highway_node_count, snapshot_1d, solve_1d,
)
from .poisson import (
    CompatibilityReport, PoissonSolution, apply_operator, compatibility_check,
    solve_neumann,
)
from .scenario import (
    BrownianMobility, ConstantVelocity, DensitySpec, DeterministicMobility,
    GaussianBlob, GridSampledVelocity, LinearRadialVelocity, Scenario,
    ScenarioParseError, ScenarioValidationError, StaticMobility, UniformPatch,
    ZeroVelocity, balance, erfc, gaussian_amplitude, normalization_constant,
    parse_scenario, sample_density, sample_split_density, sample_velocity,
)
from .transport import (
    TransportState, advance, cfl_dt, characteristics_density,
    continuity_residual, node_current, step_upwind,
)

__version__ = "0.1.0"

__all__ = [
    "kernel_backend", "__version__",
    # fields
    "GridSpec", "ScalarField", "VectorField", "divergence", "gradient",
    "curl", "integrate", "boundary_flux", "write_scalar_csv",
    "write_vector_csv", "read_scalar_csv", "read_vector_csv",
    # scenario
    "GaussianBlob", "UniformPatch", "DensitySpec", "ZeroVelocity",
    "ConstantVelocity", "LinearRadialVelocity", "GridSampledVelocity",
    "StaticMobility", "DeterministicMobility", "BrownianMobility",
    "Scenario", "ScenarioParseError", "ScenarioValidationError", "erfc",
    "normalization_constant", "gaussian_amplitude", "sample_density",
    "sample_split_density", "sample_velocity", "balance", "parse_scenario",
    # transport
    "TransportState", "cfl_dt", "step_upwind", "advance",
    "characteristics_density", "node_current", "continuity_residual",
    # diffusion
    "DiffusionParams", "step_fokker_planck", "heat_kernel", "stable_dt",
    "static_destination_density",
    # poisson
    "PoissonSolution", "CompatibilityReport", "compatibility_check",
    "apply_operator", "solve_neumann",
    # flow
    "SolveSnapshot", "RunSummary", "CapacityReport", "traffic_flow",
    "relay_density", "node_count", "capacity_check", "time_integrated_count",
    "snapshot_from_potential", "summarize",
    # pipeline1d
    "Flow1D", "solve_1d", "snapshot_1d", "advected_flow",
    "advected_node_count", "highway_density", "highway_flow",
    "highway_node_count",
]
