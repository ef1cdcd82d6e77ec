"""Truncated box grids with zero Dirichlet extension.

The computational domain is the box [-R, R]^dim with ``n`` nodes per axis and
spacing h = 2R/(n-1).  Scalar fields live on the interior lattice
(boundary values are implicitly zero, matching the zero extension of the
whole space); gradients live on the forward-difference cell lattice with
(n-1) cells per axis, each anchored at its lower-corner node.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np

from dphase import _kernels as kern

__all__ = ["Grid", "GridFunction", "gradient", "integrate", "cone_function"]


@dataclass(frozen=True)
class Grid:
    dim: int
    radius: float
    nodes_per_axis: int

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if self.nodes_per_axis < 3:
            raise ValueError("need at least 3 nodes per axis")

    @property
    def spacing(self) -> float:
        return 2.0 * self.radius / (self.nodes_per_axis - 1)

    @property
    def cell_volume(self) -> float:
        return self.spacing**self.dim

    @property
    def full_shape(self) -> tuple:
        return (self.nodes_per_axis,) * self.dim

    @property
    def interior_shape(self) -> tuple:
        return (self.nodes_per_axis - 2,) * self.dim

    @property
    def cell_shape(self) -> tuple:
        return (self.nodes_per_axis - 1,) * self.dim

    @property
    def n_interior(self) -> int:
        return (self.nodes_per_axis - 2) ** self.dim

    def axis_nodes(self) -> np.ndarray:
        """Node coordinates along one axis, length nodes_per_axis."""
        return -self.radius + self.spacing * np.arange(self.nodes_per_axis)

    def full_mesh(self) -> list[np.ndarray]:
        """Coordinate arrays of the full lattice, each shaped full_shape."""
        ax = self.axis_nodes()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def interior_mesh(self) -> list[np.ndarray]:
        ax = self.axis_nodes()[1:-1]
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def cell_mesh(self) -> list[np.ndarray]:
        """Coordinates of cell anchors (lower-corner nodes)."""
        ax = self.axis_nodes()[:-1]
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))


class GridFunction:
    """Nodal values of a field; zero on the boundary and outside the box.

    ``lattice``  "node": scalar values on the interior lattice.
    ``lattice``  "cell": values on the cell lattice; vector-valued fields
    (gradients) carry a trailing component axis of length ``grid.dim``.
    """

    __slots__ = ("grid", "values", "lattice")

    def __init__(self, grid: Grid, values, lattice: str = "node"):
        values = np.asarray(values, dtype=np.float64)
        if lattice == "node":
            expected = grid.interior_shape
        elif lattice == "cell":
            if values.shape == grid.cell_shape:
                expected = grid.cell_shape
            else:
                expected = grid.cell_shape + (grid.dim,)
        else:
            raise ValueError(f"unknown lattice {lattice!r}")
        if values.shape != expected:
            raise ValueError(f"values shape {values.shape} != expected {expected}")
        if not np.all(np.isfinite(values)):
            raise ValueError("grid function values must be finite")
        self.grid = grid
        self.values = values
        self.lattice = lattice

    # -- constructors ------------------------------------------------------

    @classmethod
    def zeros(cls, grid: Grid) -> "GridFunction":
        return cls(grid, np.zeros(grid.interior_shape))

    @classmethod
    def from_callable(cls, grid: Grid, fn) -> "GridFunction":
        return cls(grid, fn(*grid.interior_mesh()) * np.ones(grid.interior_shape))

    # -- basic queries -----------------------------------------------------

    @property
    def is_vector(self) -> bool:
        return self.values.ndim == self.grid.dim + 1

    def magnitude(self) -> "GridFunction":
        """Pointwise Euclidean magnitude of a vector field."""
        if not self.is_vector:
            raise ValueError("magnitude is defined for vector fields")
        mag = np.sqrt(np.sum(self.values**2, axis=-1))
        return GridFunction(self.grid, mag, lattice="cell")

    def same_layout(self, other: "GridFunction") -> bool:
        return (
            self.grid == other.grid
            and self.lattice == other.lattice
            and self.values.shape == other.values.shape
        )

    # -- arithmetic (scalar node functions and same-layout pairs) ----------

    def _check(self, other):
        if not isinstance(other, GridFunction) or not self.same_layout(other):
            raise ValueError("grid functions live on different lattices")

    def __add__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values + other.values, self.lattice)

    def __sub__(self, other):
        self._check(other)
        return GridFunction(self.grid, self.values - other.values, self.lattice)

    def __mul__(self, c):
        return GridFunction(self.grid, self.values * float(c), self.lattice)

    __rmul__ = __mul__

    def __neg__(self):
        return GridFunction(self.grid, -self.values, self.lattice)

    def copy(self):
        return GridFunction(self.grid, self.values.copy(), self.lattice)

    # -- serialization (scalar node functions) -----------------------------

    def to_csv(self) -> str:
        if self.lattice != "node" or self.is_vector:
            raise ValueError("only scalar node functions serialize")
        buf = io.StringIO()
        buf.write(f"dim,{self.grid.dim}\n")
        buf.write(f"radius,{float(self.grid.radius)!r}\n")
        buf.write(f"nodes_per_axis,{self.grid.nodes_per_axis}\n")
        buf.write("values\n")
        for v in self.values.ravel():
            buf.write(f"{float(v)!r}\n")
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "GridFunction":
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        header = {}
        i = 0
        while i < len(lines) and lines[i] != "values":
            key, _, val = lines[i].partition(",")
            header[key] = val
            i += 1
        if i == len(lines):
            raise ValueError("missing 'values' section")
        grid = Grid(int(header["dim"]), float(header["radius"]),
                    int(header["nodes_per_axis"]))
        vals = np.array([float(v) for v in lines[i + 1:]], dtype=np.float64)
        return cls(grid, vals.reshape(grid.interior_shape))

    def to_json_obj(self) -> dict:
        if self.lattice != "node" or self.is_vector:
            raise ValueError("only scalar node functions serialize")
        return {
            "dim": self.grid.dim,
            "radius": float(self.grid.radius),
            "nodes_per_axis": self.grid.nodes_per_axis,
            "values": [float(v) for v in self.values.ravel()],
        }

    @classmethod
    def from_json_obj(cls, obj: dict) -> "GridFunction":
        grid = Grid(int(obj["dim"]), float(obj["radius"]), int(obj["nodes_per_axis"]))
        vals = np.asarray(obj["values"], dtype=np.float64)
        return cls(grid, vals.reshape(grid.interior_shape))

    def to_json(self) -> str:
        return json.dumps(self.to_json_obj())


def pad_full(u: GridFunction) -> np.ndarray:
    """Interior values embedded in the full lattice with zero boundary."""
    if u.lattice != "node" or u.is_vector:
        raise ValueError("pad_full expects a scalar node function")
    full = np.zeros(u.grid.full_shape)
    full[(slice(1, -1),) * u.grid.dim] = u.values
    return full


def gradient(u: GridFunction) -> GridFunction:
    """Forward-difference gradient on the cell lattice.

    Component k at a cell anchored at node i is (u[i+e_k] - u[i]) / h with
    the zero boundary extension supplying the face values.  Linear in u.
    """
    if u.lattice != "node" or u.is_vector:
        raise ValueError("gradient expects a scalar node function")
    grid = u.grid
    full = pad_full(u)
    h = grid.spacing
    base = (slice(0, -1),) * grid.dim
    comps = []
    for k in range(grid.dim):
        up = tuple(slice(1, None) if j == k else slice(0, -1) for j in range(grid.dim))
        comps.append((full[up] - full[base]) / h)
    return GridFunction(grid, np.stack(comps, axis=-1), lattice="cell")


def integrate(f: GridFunction) -> float:
    """Rectangle rule: sum of nodal values times h^dim.

    Fixed lexicographic order with compensated accumulation, so the result
    is bit-reproducible.
    """
    if f.is_vector:
        raise ValueError("integrate expects a scalar field")
    return kern.comp_sum(f.values) * f.grid.cell_volume


def cone_function(center, eps0: float, grid: Grid) -> GridFunction:
    """The compact cone bump max(0, eps0 - |x - center|) sampled at nodes."""
    center = np.atleast_1d(np.asarray(center, dtype=np.float64))
    if center.shape != (grid.dim,):
        raise ValueError(f"center must have {grid.dim} components")
    if eps0 <= 0:
        raise ValueError("eps0 must be positive")
    if np.any(np.abs(center) + eps0 > grid.radius + 1e-12):
        raise ValueError("support ball escapes the box")
    mesh = grid.interior_mesh()
    d2 = sum((m - c) ** 2 for m, c in zip(mesh, center))
    vals = np.maximum(0.0, eps0 - np.sqrt(d2))
    return GridFunction(grid, vals)
