"""Uniform Cartesian grid, discrete fields, and shared stencil operators.

Layout: cell-centered scalars are stored as (ny, nx) arrays with row index j
along y. Velocities live on a staggered (MAC) arrangement: the u component on
vertical faces (ny, nx+1), the v component on horizontal faces (ny+1, nx).

Boundary handling uses one ghost layer per side. Ghost values follow the
field's boundary rule: "noflux" (mirror), "dirichlet:<value>", or
"periodic-x" (wrap in x, mirror in y).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .backend import kernels


@dataclass(frozen=True)
class Grid:
    nx: int
    ny: int
    dx: float
    dy: float
    origin: tuple[float, float] = (0.0, 0.0)
    periodic_x: bool = False

    def __post_init__(self):
        if self.nx < 4 or self.ny < 4:
            raise ValueError(f"grid must be at least 4x4, got {self.nx}x{self.ny}")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("cell sizes must be positive")

    @property
    def lx(self):
        return self.nx * self.dx

    @property
    def ly(self):
        return self.ny * self.dy

    @property
    def cell_area(self):
        return self.dx * self.dy

    def x_centers(self):
        return self.origin[0] + (np.arange(self.nx) + 0.5) * self.dx

    def y_centers(self):
        return self.origin[1] + (np.arange(self.ny) + 0.5) * self.dy

    def cell_mesh(self):
        """(X, Y) cell-center coordinate arrays of shape (ny, nx)."""
        return np.meshgrid(self.x_centers(), self.y_centers())

    def x_faces(self):
        return self.origin[0] + np.arange(self.nx + 1) * self.dx

    def y_faces(self):
        return self.origin[1] + np.arange(self.ny + 1) * self.dy


def parse_rule(rule: str):
    """Split a boundary rule string into (kind, value)."""
    if rule == "noflux" or rule == "periodic-x":
        return rule, 0.0
    if rule.startswith("dirichlet:"):
        return "dirichlet", float(rule.split(":", 1)[1])
    raise ValueError(f"unknown boundary rule {rule!r}")


def pad(values: np.ndarray, rule: str = "noflux") -> np.ndarray:
    """Ghost-pad a cell-centered array by one layer per side."""
    kind, val = parse_rule(rule)
    if kind == "noflux":
        return np.pad(values, 1, mode="edge")
    if kind == "periodic-x":
        out = np.pad(values, ((1, 1), (0, 0)), mode="edge")
        return np.pad(out, ((0, 0), (1, 1)), mode="wrap")
    # dirichlet: ghost = 2*value - interior
    out = np.pad(values, 1, mode="edge")
    out[:, 0] = 2.0 * val - out[:, 1]
    out[:, -1] = 2.0 * val - out[:, -2]
    out[0, :] = 2.0 * val - out[1, :]
    out[-1, :] = 2.0 * val - out[-2, :]
    return out


@dataclass
class ScalarField:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (self.grid.ny, self.grid.nx):
            raise ValueError(
                f"scalar field shape {self.values.shape} does not match grid "
                f"({self.grid.ny}, {self.grid.nx})"
            )

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.ny, grid.nx)))

    @classmethod
    def full(cls, grid, value):
        return cls(grid, np.full((grid.ny, grid.nx), float(value)))

    @classmethod
    def from_function(cls, grid, fn):
        x, y = grid.cell_mesh()
        return cls(grid, np.asarray(fn(x, y), dtype=np.float64))

    def copy(self):
        return ScalarField(self.grid, self.values.copy())


@dataclass
class VectorField:
    grid: Grid
    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=np.float64)
        self.v = np.asarray(self.v, dtype=np.float64)
        g = self.grid
        if self.u.shape != (g.ny, g.nx + 1) or self.v.shape != (g.ny + 1, g.nx):
            raise ValueError("vector field face arrays do not match grid")

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros((grid.ny, grid.nx + 1)), np.zeros((grid.ny + 1, grid.nx)))

    def copy(self):
        return VectorField(self.grid, self.u.copy(), self.v.copy())

    def max_abs(self):
        mu = float(np.max(np.abs(self.u))) if self.u.size else 0.0
        mv = float(np.max(np.abs(self.v))) if self.v.size else 0.0
        return max(mu, mv)


def laplacian(f: ScalarField, rule: str = "noflux") -> ScalarField:
    g = f.grid
    return ScalarField(g, kernels.laplacian(pad(f.values, rule), g.dx, g.dy))


def gradient(f: ScalarField, rule: str = "noflux") -> VectorField:
    """Central differences to faces; one-sided at closed domain boundaries."""
    g = f.grid
    gx, gy = kernels.face_gradients(pad(f.values, rule), g.dx, g.dy)
    gx = np.ascontiguousarray(gx)
    gy = np.ascontiguousarray(gy)
    if not g.periodic_x and rule == "noflux":
        gx[:, 0] = gx[:, 1]
        gx[:, -1] = gx[:, -2]
    if rule == "noflux" or rule == "periodic-x":
        gy[0, :] = gy[1, :]
        gy[-1, :] = gy[-2, :]
    return VectorField(g, gx, gy)


def divergence(v: VectorField) -> ScalarField:
    g = v.grid
    return ScalarField(g, kernels.div_faces(v.u, v.v, g.dx, g.dy))


def integrate(f: ScalarField) -> float:
    return kernels.ksum(f.values) * f.grid.cell_area


def norm_grad(f: ScalarField, rule: str = "noflux") -> ScalarField:
    g = f.grid
    return ScalarField(g, kernels.norm_grad(pad(f.values, rule), g.dx, g.dy))
