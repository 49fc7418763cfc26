"""Staggered-grid fields and the discrete vector-calculus operators.

Scalar quantities (node density, potential, relay density) live at cell
centers; vector quantities (traffic flow, node current) live as normal
components on cell faces. This arrangement makes the divergence theorem,
curl(grad) = 0 and the zero-flux boundary condition exact discrete
statements rather than approximations.

Layout conventions
------------------
1D: cell values have shape (nx,), face values shape (nx + 1,).
2D: cell values have shape (nx, ny); x-normal faces (nx + 1, ny);
    y-normal faces (nx, ny + 1). Index i runs along x, j along y.
Cell (i, j) is centered at (x0 + (i + 1/2) dx, y0 + (j + 1/2) dy);
x-face (i, j) sits at (x0 + i dx, y0 + (j + 1/2) dy); nodes at
(x0 + i dx, y0 + j dy).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels

__all__ = [
    "GridSpec", "ScalarField", "VectorField",
    "divergence", "gradient", "curl", "integrate", "boundary_flux",
    "write_scalar_csv", "read_scalar_csv",
    "write_vector_csv", "read_vector_csv",
]


@dataclass(frozen=True)
class GridSpec:
    """Uniform rectangular grid, 1D or 2D.

    Parameters
    ----------
    dim : int
        1 or 2.
    nx : int
        Number of cells along x, at least 2.
    dx : float
        Cell width along x, positive.
    x0 : float
        Coordinate of the left domain edge.
    ny, dy, y0 :
        The y-axis counterparts; required when dim is 2 and must be
        omitted when dim is 1.
    """

    dim: int
    nx: int
    dx: float
    x0: float = 0.0
    ny: int | None = None
    dy: float | None = None
    y0: float | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"grid: dim must be 1 or 2, got {self.dim}")
        if self.nx < 2:
            raise ValueError(f"grid: nx must be >= 2, got {self.nx}")
        if not (self.dx > 0.0):
            raise ValueError(f"grid: dx must be positive, got {self.dx}")
        if self.dim == 1:
            if self.ny is not None or self.dy is not None or self.y0 is not None:
                raise ValueError("grid: ny/dy/y0 are not allowed when dim is 1")
        else:
            if self.ny is None or self.dy is None:
                raise ValueError("grid: ny and dy are required when dim is 2")
            if self.ny < 2:
                raise ValueError(f"grid: ny must be >= 2, got {self.ny}")
            if not (self.dy > 0.0):
                raise ValueError(f"grid: dy must be positive, got {self.dy}")
            if self.y0 is None:
                object.__setattr__(self, "y0", 0.0)

    @property
    def shape(self) -> tuple:
        return (self.nx,) if self.dim == 1 else (self.nx, self.ny)

    @property
    def ncells(self) -> int:
        return self.nx if self.dim == 1 else self.nx * self.ny

    @property
    def x_max(self) -> float:
        return self.x0 + self.nx * self.dx

    @property
    def y_max(self) -> float:
        if self.dim == 1:
            raise ValueError("grid: y_max is undefined for a 1D grid")
        return self.y0 + self.ny * self.dy

    @property
    def cell_volume(self) -> float:
        return self.dx if self.dim == 1 else self.dx * self.dy

    def cell_centers_x(self) -> np.ndarray:
        return self.x0 + (np.arange(self.nx) + 0.5) * self.dx

    def cell_centers_y(self) -> np.ndarray:
        if self.dim == 1:
            raise ValueError("grid: no y axis on a 1D grid")
        return self.y0 + (np.arange(self.ny) + 0.5) * self.dy

    def face_positions_x(self) -> np.ndarray:
        """x coordinates of the x-normal faces (length nx + 1)."""
        return self.x0 + np.arange(self.nx + 1) * self.dx

    def face_positions_y(self) -> np.ndarray:
        if self.dim == 1:
            raise ValueError("grid: no y axis on a 1D grid")
        return self.y0 + np.arange(self.ny + 1) * self.dy


def _frozen_array(values, shape, what: str) -> np.ndarray:
    arr = np.array(values, dtype=float, order="C", copy=True)
    if arr.shape != shape:
        raise ValueError(f"{what}: expected shape {shape}, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{what}: all entries must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Cell-centered scalar samples on a grid. Immutable: the value array
    is copied in and marked read-only, operations return new fields."""

    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "values", _frozen_array(self.values, self.grid.shape, "ScalarField")
        )


@dataclass(frozen=True, eq=False)
class VectorField:
    """Face-normal vector samples: u on x-faces, and v on y-faces in 2D."""

    grid: GridSpec
    u: np.ndarray
    v: np.ndarray | None = None

    def __post_init__(self):
        g = self.grid
        if g.dim == 1:
            object.__setattr__(self, "u", _frozen_array(self.u, (g.nx + 1,), "VectorField.u"))
            if self.v is not None:
                raise ValueError("VectorField: v is not allowed on a 1D grid")
        else:
            object.__setattr__(
                self, "u", _frozen_array(self.u, (g.nx + 1, g.ny), "VectorField.u")
            )
            if self.v is None:
                raise ValueError("VectorField: v is required on a 2D grid")
            object.__setattr__(
                self, "v", _frozen_array(self.v, (g.nx, g.ny + 1), "VectorField.v")
            )

    @property
    def zero_flux(self) -> bool:
        """True when every boundary face component is exactly zero."""
        if self.grid.dim == 1:
            return self.u[0] == 0.0 and self.u[-1] == 0.0
        return bool(
            np.all(self.u[0, :] == 0.0) and np.all(self.u[-1, :] == 0.0)
            and np.all(self.v[:, 0] == 0.0) and np.all(self.v[:, -1] == 0.0)
        )


def _check_same_grid(a: GridSpec, b: GridSpec, what: str) -> None:
    if a != b:
        raise ValueError(f"{what}: fields live on different grids")


def divergence(field: VectorField) -> ScalarField:
    """Net outflow per cell volume: (u_right - u_left)/dx (+ y term in 2D)."""
    g = field.grid
    if g.dim == 1:
        out = _kernels.divergence_1d(field.u, g.dx)
    else:
        out = _kernels.divergence_2d(field.u, field.v, g.dx, g.dy)
    return ScalarField(g, out)


def gradient(phi: ScalarField) -> VectorField:
    """Central difference to interior faces; boundary faces are structural
    zeros, which is the discrete form of grad(phi) . n = 0."""
    g = phi.grid
    if g.dim == 1:
        return VectorField(g, _kernels.gradient_faces_1d(phi.values, g.dx))
    u, v = _kernels.gradient_faces_2d(phi.values, g.dx, g.dy)
    return VectorField(g, u, v)


def curl(field: VectorField) -> np.ndarray:
    """Scalar curl dv/dx - du/dy at the (nx-1) x (ny-1) interior nodes.

    Computed as ((dv) dy - (du) dx) / (dx dy), algebraically identical to
    the plain form but better conditioned for smooth fields. 2D only.
    """
    g = field.grid
    if g.dim != 2:
        raise ValueError("curl: defined only on 2D grids")
    u, v = field.u, field.v
    num = (v[1:, 1:-1] - v[:-1, 1:-1]) * g.dy - (u[1:-1, 1:] - u[1:-1, :-1]) * g.dx
    return num / (g.dx * g.dy)


def integrate(field: ScalarField) -> float:
    """Midpoint-rule integral: sum of cell values times cell volume."""
    return float(field.values.sum() * field.grid.cell_volume)


def boundary_flux(field: VectorField) -> float:
    """Total outward flux through the domain boundary.

    Discrete divergence theorem: integrate(divergence(T)) equals this
    exactly up to round-off, because the cell sums telescope.
    """
    g = field.grid
    if g.dim == 1:
        return float(field.u[-1] - field.u[0])
    fx = (field.u[-1, :].sum() - field.u[0, :].sum()) * g.dy
    fy = (field.v[:, -1].sum() - field.v[:, 0].sum()) * g.dx
    return float(fx + fy)


# ---------------------------------------------------------------------------
# CSV serialization: header x,y,value; 17 significant digits; row-major
# (x varies slowest); LF line endings. 1D fields write y = 0.
# ---------------------------------------------------------------------------

def _fmt(x: float) -> str:
    return f"{x:.17g}"


def _write_rows(path, xs, ys, vals) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write("x,y,value\n")
        for x, y, v in zip(xs, ys, vals):
            fh.write(f"{_fmt(x)},{_fmt(y)},{_fmt(v)}\n")


def write_scalar_csv(field: ScalarField, path) -> None:
    g = field.grid
    if g.dim == 1:
        xs = g.cell_centers_x()
        ys = np.zeros(g.nx)
        vals = field.values
    else:
        X, Y = np.meshgrid(g.cell_centers_x(), g.cell_centers_y(), indexing="ij")
        xs, ys, vals = X.ravel(), Y.ravel(), field.values.ravel()
    _write_rows(path, xs, ys, vals)


def write_vector_csv(field: VectorField, u_path, v_path=None) -> None:
    """Each component goes to its own file with face-center coordinates."""
    g = field.grid
    if g.dim == 1:
        _write_rows(u_path, g.face_positions_x(), np.zeros(g.nx + 1), field.u)
        return
    if v_path is None:
        raise ValueError("write_vector_csv: v_path is required on a 2D grid")
    XU, YU = np.meshgrid(g.face_positions_x(), g.cell_centers_y(), indexing="ij")
    _write_rows(u_path, XU.ravel(), YU.ravel(), field.u.ravel())
    XV, YV = np.meshgrid(g.cell_centers_x(), g.face_positions_y(), indexing="ij")
    _write_rows(v_path, XV.ravel(), YV.ravel(), field.v.ravel())


def _read_values(path, count: int) -> np.ndarray:
    with open(path, "r", newline="") as fh:
        header = fh.readline().strip()
        if header != "x,y,value":
            raise ValueError(f"{path}: expected header 'x,y,value', got {header!r}")
        vals = []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 3:
                raise ValueError(f"{path}:{lineno}: expected 3 columns")
            vals.append(float(parts[2]))
    if len(vals) != count:
        raise ValueError(f"{path}: expected {count} rows, got {len(vals)}")
    return np.asarray(vals)


def read_scalar_csv(grid: GridSpec, path) -> ScalarField:
    vals = _read_values(path, grid.ncells)
    return ScalarField(grid, vals.reshape(grid.shape))


def read_vector_csv(grid: GridSpec, u_path, v_path=None) -> VectorField:
    if grid.dim == 1:
        return VectorField(grid, _read_values(u_path, grid.nx + 1))
    if v_path is None:
        raise ValueError("read_vector_csv: v_path is required on a 2D grid")
    u = _read_values(u_path, (grid.nx + 1) * grid.ny).reshape(grid.nx + 1, grid.ny)
    v = _read_values(v_path, grid.nx * (grid.ny + 1)).reshape(grid.nx, grid.ny + 1)
    return VectorField(grid, u, v)
