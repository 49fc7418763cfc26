"""Scenario configuration: what densities exist, how nodes move, how to run.

A scenario file is INI-style text with sections [grid], [density.N]
(one per density term), [mobility], and optional [solver] and [output].
Keys are strict: anything unrecognized is an error, so typos cannot
silently fall back to defaults.

Sign conventions: positive density terms are traffic sources (bps per unit
volume), negative terms are sinks. A solvable configuration needs both,
and `balance` rescales the negative side so the net integral is zero,
which is what the zero-flux solve requires.
"""
from __future__ import annotations

import configparser
import math
import os
from dataclasses import dataclass

import numpy as np

from .fields import GridSpec, ScalarField, VectorField, integrate

__all__ = [
    "GaussianBlob", "UniformPatch", "DensitySpec",
    "ZeroVelocity", "ConstantVelocity", "LinearRadialVelocity",
    "GridSampledVelocity", "VelocitySpec",
    "StaticMobility", "DeterministicMobility", "BrownianMobility",
    "MobilityModel", "Scenario",
    "ScenarioParseError", "ScenarioValidationError",
    "erfc", "normalization_constant", "gaussian_amplitude",
    "sample_density", "sample_split_density", "sample_velocity",
    "balance", "parse_scenario",
]


class ScenarioParseError(ValueError):
    """The scenario file is not well-formed (syntax level)."""


class ScenarioValidationError(ValueError):
    """The scenario parsed but violates an invariant; the message names it."""


# ---------------------------------------------------------------------------
# complementary error function
# ---------------------------------------------------------------------------

_SQRT_PI = math.sqrt(math.pi)
_ERFC_SWITCH = 2.5


def erfc(x: float) -> float:
    """Complementary error function.

    Power series of erf for |x| < 2.5 (largest term there is ~17, so the
    alternating-sum round-off stays near 1e-14); Lentz continued fraction
    for the tail. Absolute error is below 1e-12 for |x| <= 10, verified
    against quadrature of the defining integral.
    """
    x = float(x)
    if x != x:
        raise ValueError("erfc: nan input")
    ax = abs(x)
    if ax < _ERFC_SWITCH:
        return 1.0 - _erf_series(x)
    tail = _erfc_cf(ax)
    return tail if x > 0.0 else 2.0 - tail


def _erf_series(x: float) -> float:
    # erf(x) = (2/sqrt(pi)) sum (-1)^n x^(2n+1) / (n! (2n+1))
    x2 = x * x
    term = x          # x^(2n+1)/n! for n = 0
    total = x
    for n in range(1, 200):
        term *= -x2 / n
        inc = term / (2 * n + 1)
        total += inc
        if abs(inc) < 1e-18 * abs(total):
            break
    return (2.0 / _SQRT_PI) * total


def _erfc_cf(x: float) -> float:
    # erfc(x) = e^{-x^2}/sqrt(pi) / (x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    # evaluated with the modified Lentz algorithm; x >= 2.5 here
    tiny = 1e-300
    f = x
    c = f
    d = 0.0
    for n in range(1, 300):
        a = 0.5 * n
        d = x + a * d
        if d == 0.0:
            d = tiny
        c = x + a / c
        if c == 0.0:
            c = tiny
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-17:
            break
    return math.exp(-x * x) / _SQRT_PI / f


def normalization_constant(center: float, width: float = 1.0) -> float:
    """Amplitude that gives a Gaussian of the given center and width unit
    integral over the half-line [0, inf): 2 / (sqrt(pi) w erfc(-c/w))."""
    if not (width > 0.0):
        raise ValueError("normalization_constant: width must be positive")
    return 2.0 / (_SQRT_PI * width * erfc(-center / width))


# ---------------------------------------------------------------------------
# density terms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GaussianBlob:
    """weight * exp(-|x - center|^2 / width^2); `normalized` rescales the
    amplitude so the half-line integral is `weight` (1D only)."""

    weight: float
    center: float | tuple[float, float]
    width: float
    normalized: bool = False

    def __post_init__(self):
        if self.weight == 0.0:
            raise ScenarioValidationError("density: gaussian weight must be nonzero")
        if not (self.width > 0.0):
            raise ScenarioValidationError("density: gaussian width must be positive")


@dataclass(frozen=True)
class UniformPatch:
    """Constant level on an interval (1D) or axis-aligned rectangle (2D)."""

    level: float
    extent: tuple

    def __post_init__(self):
        ext = tuple(float(e) for e in self.extent)
        object.__setattr__(self, "extent", ext)
        if self.level == 0.0:
            raise ScenarioValidationError("density: uniform level must be nonzero")
        if len(ext) == 2:
            lo, hi = ext
            if not lo < hi:
                raise ScenarioValidationError("density: uniform extent must have lo < hi")
        elif len(ext) == 4:
            if not (ext[0] < ext[1] and ext[2] < ext[3]):
                raise ScenarioValidationError(
                    "density: uniform extent must satisfy xlo < xhi and ylo < yhi"
                )
        else:
            raise ScenarioValidationError(
                "density: uniform extent needs 2 numbers (1D) or 4 (2D)"
            )

    @property
    def sign(self) -> float:
        return math.copysign(1.0, self.level)


DensityTerm = GaussianBlob | UniformPatch


def _term_sign(term: DensityTerm) -> float:
    return math.copysign(1.0, term.weight if isinstance(term, GaussianBlob) else term.level)


@dataclass(frozen=True)
class DensitySpec:
    """Sum of signed terms. Unless `unbalanced_ok` (component tests only),
    at least one positive and one negative term are required: a network
    needs both sources and sinks."""

    terms: tuple
    unbalanced_ok: bool = False

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if not self.terms:
            raise ScenarioValidationError("density: missing (no terms given)")
        for t in self.terms:
            if not isinstance(t, (GaussianBlob, UniformPatch)):
                raise ScenarioValidationError(f"density: unknown term type {type(t).__name__}")
        if not self.unbalanced_ok:
            signs = {_term_sign(t) for t in self.terms}
            if 1.0 not in signs or -1.0 not in signs:
                raise ScenarioValidationError(
                    "density: needs at least one positive and one negative term"
                )


def gaussian_amplitude(term: GaussianBlob, dim: int) -> float:
    """Resolved prefactor: the raw weight, times the half-line
    normalization when the term is flagged normalized (1D only)."""
    if not term.normalized:
        return term.weight
    if dim != 1:
        raise ScenarioValidationError(
            "density: normalized gaussian terms are defined on 1D grids only"
        )
    return term.weight * normalization_constant(float(term.center), term.width)


def _sample_term(term: DensityTerm, grid: GridSpec) -> np.ndarray:
    if isinstance(term, GaussianBlob):
        amp = gaussian_amplitude(term, grid.dim)
        if grid.dim == 1:
            c = float(term.center)
            x = grid.cell_centers_x()
            return amp * np.exp(-(((x - c) / term.width) ** 2))
        if np.ndim(term.center) == 0 or len(term.center) != 2:
            raise ScenarioValidationError("density: 2D gaussian center needs two numbers")
        cx, cy = term.center
        X, Y = np.meshgrid(grid.cell_centers_x(), grid.cell_centers_y(), indexing="ij")
        return amp * np.exp(-(((X - cx) ** 2 + (Y - cy) ** 2) / term.width**2))
    # uniform patch: cells whose center lies inside the extent
    if grid.dim == 1:
        if len(term.extent) != 2:
            raise ScenarioValidationError("density: 1D uniform extent needs 2 numbers")
        lo, hi = term.extent
        x = grid.cell_centers_x()
        return np.where((x >= lo) & (x < hi), term.level, 0.0)
    if len(term.extent) != 4:
        raise ScenarioValidationError("density: 2D uniform extent needs 4 numbers")
    xlo, xhi, ylo, yhi = term.extent
    X, Y = np.meshgrid(grid.cell_centers_x(), grid.cell_centers_y(), indexing="ij")
    return np.where((X >= xlo) & (X < xhi) & (Y >= ylo) & (Y < yhi), term.level, 0.0)


def sample_density(spec: DensitySpec, grid: GridSpec) -> ScalarField:
    """Signed density at cell centers: the sum of all terms."""
    total = np.zeros(grid.shape)
    for term in spec.terms:
        total += _sample_term(term, grid)
    return ScalarField(grid, total)


def sample_split_density(spec: DensitySpec, grid: GridSpec) -> tuple[ScalarField, ScalarField]:
    """Source and sink parts sampled separately, both non-negative.

    The sink part is returned as a magnitude (its sign flipped), which is
    the representation the per-sign evolution code works with.
    """
    pos = np.zeros(grid.shape)
    neg = np.zeros(grid.shape)
    for term in spec.terms:
        arr = _sample_term(term, grid)
        if _term_sign(term) > 0:
            pos += arr
        else:
            neg -= arr
    return ScalarField(grid, pos), ScalarField(grid, neg)


# ---------------------------------------------------------------------------
# velocity and mobility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroVelocity:
    pass


@dataclass(frozen=True)
class ConstantVelocity:
    vx: float
    vy: float = 0.0


@dataclass(frozen=True)
class LinearRadialVelocity:
    """v(x) = x per axis: each coordinate grows at its own value."""


@dataclass(frozen=True)
class GridSampledVelocity:
    field: VectorField


VelocitySpec = ZeroVelocity | ConstantVelocity | LinearRadialVelocity | GridSampledVelocity


def sample_velocity(spec: VelocitySpec | VectorField, grid: GridSpec) -> VectorField:
    """Evaluate a velocity at the face centers of `grid`.

    A VectorField passes through (after a grid check) so callers that
    presample once per run can hand the samples straight back in.
    """
    if isinstance(spec, VectorField):
        if spec.grid != grid:
            raise ValueError("velocity: sampled field lives on a different grid")
        return spec
    if isinstance(spec, GridSampledVelocity):
        return sample_velocity(spec.field, grid)
    if grid.dim == 1:
        if isinstance(spec, ZeroVelocity):
            u = np.zeros(grid.nx + 1)
        elif isinstance(spec, ConstantVelocity):
            if spec.vy != 0.0:
                raise ScenarioValidationError("velocity: vy must be 0 on a 1D grid")
            u = np.full(grid.nx + 1, spec.vx)
        elif isinstance(spec, LinearRadialVelocity):
            u = grid.face_positions_x()
        else:
            raise TypeError(f"velocity: unknown spec {type(spec).__name__}")
        return VectorField(grid, u)
    ushape = (grid.nx + 1, grid.ny)
    vshape = (grid.nx, grid.ny + 1)
    if isinstance(spec, ZeroVelocity):
        u, v = np.zeros(ushape), np.zeros(vshape)
    elif isinstance(spec, ConstantVelocity):
        u, v = np.full(ushape, spec.vx), np.full(vshape, spec.vy)
    elif isinstance(spec, LinearRadialVelocity):
        u = np.broadcast_to(grid.face_positions_x()[:, None], ushape)
        v = np.broadcast_to(grid.face_positions_y()[None, :], vshape)
    else:
        raise TypeError(f"velocity: unknown spec {type(spec).__name__}")
    return VectorField(grid, u, v)


@dataclass(frozen=True)
class StaticMobility:
    pass


@dataclass(frozen=True)
class DeterministicMobility:
    velocity: VelocitySpec


@dataclass(frozen=True)
class BrownianMobility:
    """Independent Brownian motion per sign; sigma values are variance
    rates (position variance grows by sigma per unit time). sigma_minus = 0
    with no drift means the destinations stay put."""

    sigma_plus: float
    sigma_minus: float
    drift_plus: VelocitySpec | None = None
    drift_minus: VelocitySpec | None = None

    def __post_init__(self):
        if self.sigma_plus < 0.0 or self.sigma_minus < 0.0:
            raise ScenarioValidationError("mobility: sigma values must be >= 0")


MobilityModel = StaticMobility | DeterministicMobility | BrownianMobility


# ---------------------------------------------------------------------------
# scenario
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    grid: GridSpec
    density: DensitySpec
    mobility: MobilityModel
    alpha: float = 2.0
    t_start: float = 0.0
    t_end: float = 0.0
    n_steps: int = 0
    poisson_tol: float = 1e-8
    balance_tol: float = 1e-9
    output_dir: str | None = None

    def __post_init__(self):
        if not (self.alpha > 0.0):
            raise ScenarioValidationError("solver: alpha must be positive")
        for name, tol in (("poisson_tol", self.poisson_tol),
                          ("balance_tol", self.balance_tol)):
            if not (0.0 < tol <= 1e-2):
                raise ScenarioValidationError(f"solver: {name} must lie in (0, 1e-2]")
        if isinstance(self.mobility, StaticMobility):
            if self.t_end < self.t_start:
                raise ScenarioValidationError("solver: t_end must be >= t_start")
        else:
            if not (self.t_end > self.t_start):
                raise ScenarioValidationError(
                    "solver: t_end must exceed t_start for a non-static mobility"
                )
            if self.n_steps < 1:
                raise ScenarioValidationError(
                    "solver: n_steps must be >= 1 for a non-static mobility"
                )

    @property
    def snapshot_times(self) -> list[float]:
        if isinstance(self.mobility, StaticMobility):
            return [self.t_start]
        span = self.t_end - self.t_start
        return [self.t_start + span * k / self.n_steps for k in range(self.n_steps + 1)]


def balance(rho: ScalarField, tol: float = 1e-9) -> ScalarField:
    """Rescale the negative part so the field integrates to zero.

    Only the negative side moves (sink capacity adapts to offered traffic).
    A field already balanced to |integral| <= tol * integral(|rho|) passes
    through unchanged. Returns the balanced field; the applied factor is
    recoverable as the ratio of negative masses.
    """
    vals = rho.values
    pos = np.where(vals > 0.0, vals, 0.0)
    neg = np.where(vals < 0.0, -vals, 0.0)
    vol = rho.grid.cell_volume
    p = float(pos.sum() * vol)
    n = float(neg.sum() * vol)
    if abs(p - n) <= tol * (p + n):
        return rho
    if n == 0.0:
        raise ValueError(
            "balance: negative part is identically zero but the positive part is not"
        )
    if p == 0.0:
        raise ValueError(
            "balance: positive part is identically zero but the negative part is not"
        )
    return ScalarField(rho.grid, pos - (p / n) * neg)


# ---------------------------------------------------------------------------
# file parsing
# ---------------------------------------------------------------------------

_GRID_KEYS_1D = {"dim", "nx", "dx", "x0"}
_GRID_KEYS_2D = _GRID_KEYS_1D | {"ny", "dy", "y0"}
_DENSITY_KEYS = {
    "gaussian": {"kind", "weight", "center", "width", "normalized"},
    "uniform": {"kind", "level", "extent"},
}
_SOLVER_KEYS = {"alpha", "t_start", "t_end", "n_steps", "poisson_tol", "balance_tol"}
_OUTPUT_KEYS = {"directory"}
_VELOCITY_KINDS = {"zero", "constant", "linear_radial", "grid_sampled"}


def _check_keys(section: str, present, allowed) -> None:
    unknown = sorted(set(present) - set(allowed))
    if unknown:
        raise ScenarioValidationError(
            f"[{section}]: unknown key(s) {', '.join(unknown)} (strict mode)"
        )


def _need(cfg, section: str, key: str) -> str:
    if not cfg.has_option(section, key):
        raise ScenarioValidationError(f"[{section}]: missing required key '{key}'")
    return cfg.get(section, key)


def _as_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ScenarioValidationError(
            f"[{section}]: key '{key}' must be a number, got {raw!r}"
        ) from None


def _as_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ScenarioValidationError(
            f"[{section}]: key '{key}' must be an integer, got {raw!r}"
        ) from None


def _as_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low == "true":
        return True
    if low == "false":
        return False
    raise ScenarioValidationError(
        f"[{section}]: key '{key}' must be true or false, got {raw!r}"
    )


def _as_floats(section: str, key: str, raw: str) -> tuple[float, ...]:
    return tuple(_as_float(section, key, part) for part in raw.split(","))


def _parse_grid(cfg) -> GridSpec:
    sec = "grid"
    dim = _as_int(sec, "dim", _need(cfg, sec, "dim"))
    allowed = _GRID_KEYS_1D if dim == 1 else _GRID_KEYS_2D
    _check_keys(sec, cfg.options(sec), allowed)
    nx = _as_int(sec, "nx", _need(cfg, sec, "nx"))
    dx = _as_float(sec, "dx", _need(cfg, sec, "dx"))
    x0 = _as_float(sec, "x0", cfg.get(sec, "x0", fallback="0"))
    if dim == 1:
        return GridSpec(1, nx, dx, x0)
    ny = _as_int(sec, "ny", _need(cfg, sec, "ny"))
    dy = _as_float(sec, "dy", _need(cfg, sec, "dy"))
    y0 = _as_float(sec, "y0", cfg.get(sec, "y0", fallback="0"))
    return GridSpec(2, nx, dx, x0, ny, dy, y0)


def _parse_density_term(cfg, sec: str, dim: int) -> DensityTerm:
    kind = _need(cfg, sec, "kind").strip().lower()
    if kind not in _DENSITY_KEYS:
        raise ScenarioValidationError(
            f"[{sec}]: kind must be gaussian or uniform, got {kind!r}"
        )
    _check_keys(sec, cfg.options(sec), _DENSITY_KEYS[kind])
    if kind == "gaussian":
        center = _as_floats(sec, "center", _need(cfg, sec, "center"))
        if len(center) != dim:
            raise ScenarioValidationError(
                f"[{sec}]: center needs {dim} number(s) on a {dim}D grid"
            )
        return GaussianBlob(
            weight=_as_float(sec, "weight", _need(cfg, sec, "weight")),
            center=center[0] if dim == 1 else center,
            width=_as_float(sec, "width", _need(cfg, sec, "width")),
            normalized=_as_bool(sec, "normalized", cfg.get(sec, "normalized", fallback="false")),
        )
    extent = _as_floats(sec, "extent", _need(cfg, sec, "extent"))
    if len(extent) != 2 * dim:
        raise ScenarioValidationError(
            f"[{sec}]: extent needs {2 * dim} numbers on a {dim}D grid"
        )
    return UniformPatch(level=_as_float(sec, "level", _need(cfg, sec, "level")), extent=extent)


def _parse_velocity(cfg, sec: str, dim: int, base_dir: str, grid: GridSpec,
                    prefix: str = "velocity") -> tuple[VelocitySpec, set[str]]:
    kind = _need(cfg, sec, prefix).strip().lower()
    if kind not in _VELOCITY_KINDS:
        raise ScenarioValidationError(
            f"[{sec}]: {prefix} must be one of {sorted(_VELOCITY_KINDS)}, got {kind!r}"
        )
    extra: set[str] = set()
    if kind == "zero":
        vel: VelocitySpec = ZeroVelocity()
    elif kind == "linear_radial":
        vel = LinearRadialVelocity()
    elif kind == "constant":
        extra = {f"{prefix}_vx"} | ({f"{prefix}_vy"} if dim == 2 else set())
        vx = _as_float(sec, f"{prefix}_vx", _need(cfg, sec, f"{prefix}_vx"))
        vy = _as_float(sec, f"{prefix}_vy", cfg.get(sec, f"{prefix}_vy", fallback="0")) \
            if dim == 2 else 0.0
        vel = ConstantVelocity(vx, vy)
    else:
        from .fields import read_vector_csv
        extra = {f"{prefix}_u"} | ({f"{prefix}_v"} if dim == 2 else set())
        u_path = os.path.join(base_dir, _need(cfg, sec, f"{prefix}_u"))
        v_path = os.path.join(base_dir, _need(cfg, sec, f"{prefix}_v")) if dim == 2 else None
        try:
            vel = GridSampledVelocity(read_vector_csv(grid, u_path, v_path))
        except OSError as exc:
            raise ScenarioValidationError(f"[{sec}]: cannot read velocity file: {exc}") from exc
    return vel, extra


def _parse_mobility(cfg, dim: int, base_dir: str, grid: GridSpec) -> MobilityModel:
    sec = "mobility"
    model = _need(cfg, sec, "model").strip().lower()
    if model == "static":
        _check_keys(sec, cfg.options(sec), {"model"})
        return StaticMobility()
    if model == "deterministic":
        vel, extra = _parse_velocity(cfg, sec, dim, base_dir, grid)
        _check_keys(sec, cfg.options(sec), {"model", "velocity"} | extra)
        return DeterministicMobility(vel)
    if model == "brownian":
        allowed = {"model", "sigma_plus", "sigma_minus"}
        drifts = {}
        for side in ("plus", "minus"):
            key = f"drift_{side}"
            if cfg.has_option(sec, key):
                vel, extra = _parse_velocity(cfg, sec, dim, base_dir, grid, prefix=key)
                drifts[side] = vel
                allowed |= {key} | extra
        _check_keys(sec, cfg.options(sec), allowed)
        return BrownianMobility(
            sigma_plus=_as_float(sec, "sigma_plus", _need(cfg, sec, "sigma_plus")),
            sigma_minus=_as_float(sec, "sigma_minus", _need(cfg, sec, "sigma_minus")),
            drift_plus=drifts.get("plus"),
            drift_minus=drifts.get("minus"),
        )
    raise ScenarioValidationError(
        f"[mobility]: model must be static, deterministic or brownian, got {model!r}"
    )


def parse_scenario(path) -> Scenario:
    """Read and validate a scenario file. Raises ScenarioParseError for
    malformed syntax (with line info) and ScenarioValidationError for a
    well-formed file that breaks an invariant."""
    cfg = configparser.ConfigParser(
        interpolation=None, inline_comment_prefixes=("#",), strict=True
    )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg.read_file(fh, source=str(path))
    except OSError as exc:
        raise ScenarioParseError(f"cannot read scenario file: {exc}") from exc
    except (configparser.Error, UnicodeDecodeError) as exc:
        raise ScenarioParseError(f"scenario syntax error: {exc}") from exc

    sections = cfg.sections()
    known = {"grid", "mobility", "solver", "output"}
    density_secs = sorted(
        (s for s in sections if s.startswith("density.")),
        key=lambda s: s.split(".", 1)[1],
    )
    unknown = [s for s in sections if s not in known and s not in density_secs]
    if unknown:
        raise ScenarioValidationError(f"unknown section(s): {', '.join(unknown)}")
    if "grid" not in sections:
        raise ScenarioValidationError("grid: missing ([grid] section required)")
    if not density_secs:
        raise ScenarioValidationError("density: missing (no [density.N] sections)")
    if "mobility" not in sections:
        raise ScenarioValidationError("mobility: missing ([mobility] section required)")

    grid = _parse_grid(cfg)
    terms = tuple(_parse_density_term(cfg, s, grid.dim) for s in density_secs)
    base_dir = os.path.dirname(os.path.abspath(path))
    mobility = _parse_mobility(cfg, grid.dim, base_dir, grid)

    solver_kwargs = {}
    if cfg.has_section("solver"):
        _check_keys("solver", cfg.options("solver"), _SOLVER_KEYS)
        for key in ("alpha", "t_start", "t_end", "poisson_tol", "balance_tol"):
            if cfg.has_option("solver", key):
                solver_kwargs[key] = _as_float("solver", key, cfg.get("solver", key))
        if cfg.has_option("solver", "n_steps"):
            solver_kwargs["n_steps"] = _as_int("solver", "n_steps", cfg.get("solver", "n_steps"))

    output_dir = None
    if cfg.has_section("output"):
        _check_keys("output", cfg.options("output"), _OUTPUT_KEYS)
        if cfg.has_option("output", "directory"):
            output_dir = cfg.get("output", "directory").strip()

    return Scenario(
        grid=grid,
        density=DensitySpec(terms),
        mobility=mobility,
        output_dir=output_dir,
        **solver_kwargs,
    )
