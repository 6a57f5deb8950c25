"""Uniform symmetric grids on [-a, a] with trapezoidal quadrature and a
three-point finite-difference Laplacian (Dirichlet boundary conditions).

The grid always has an odd number of nodes so that x = 0 is a node; the
mean-field potential is gauged to vanish there.  Nodes are built as signed
integer multiples of the spacing, which makes them exactly antisymmetric.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Grid",
    "GridFunction",
    "make_grid",
    "integrate",
    "inner",
    "kinetic_energy",
    "apply_laplacian",
]


@dataclass(frozen=True)
class Grid:
    """Uniform symmetric grid: nodes x_i = -a + i*h, h = 2a/(n-1), n odd."""

    half_width: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError(f"half_width must be positive, got {self.half_width}")
        if self.n < 3 or self.n % 2 == 0:
            raise ValueError(f"node count must be an odd integer >= 3, got {self.n}")
        m = (self.n - 1) // 2
        nodes = (np.arange(self.n) - m) * self.spacing
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / (self.n - 1)

    @property
    def center_index(self) -> int:
        return (self.n - 1) // 2

    def function(self, values) -> "GridFunction":
        """Wrap an array of nodal values as a function on this grid."""
        return GridFunction(self, values)

    def zeros(self) -> "GridFunction":
        return GridFunction(self, np.zeros(self.n))


def make_grid(half_width: float, n: int) -> Grid:
    """Build a symmetric uniform grid; rejects even node counts and a <= 0."""
    return Grid(half_width, n)


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Real nodal values on a :class:`Grid`.

    Supports pointwise arithmetic between functions on the same grid and
    scaling by scalars, which is all the solvers need.
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != (self.grid.n,):
            raise ValueError(
                f"values shape {values.shape} does not match grid with {self.grid.n} nodes"
            )
        object.__setattr__(self, "values", values)

    def _check_same_grid(self, other: "GridFunction") -> None:
        if self.grid != other.grid:
            raise ValueError("grid functions live on different grids")

    def __add__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        self._check_same_grid(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            self._check_same_grid(other)
            return GridFunction(self.grid, self.values * other.values)
        return GridFunction(self.grid, self.values * float(other))

    __rmul__ = __mul__

    def __neg__(self) -> "GridFunction":
        return GridFunction(self.grid, -self.values)

    def __abs__(self) -> "GridFunction":
        return GridFunction(self.grid, np.abs(self.values))


def integrate(f: GridFunction) -> float:
    """Trapezoidal quadrature over the box, exact for affine integrands."""
    v = f.values
    h = f.grid.spacing
    return h * (v.sum() - 0.5 * (v[0] + v[-1]))


def inner(f: GridFunction, g: GridFunction) -> float:
    """L2 pairing h * sum f_i g_i.

    This uniform-weight rule, not the trapezoidal one, is the inner product
    under which the discrete Dirichlet Laplacian is exactly symmetric, so it
    is the one used for orbital orthonormality.
    """
    f._check_same_grid(g)
    return f.grid.spacing * float(f.values @ g.values)


def kinetic_energy(phi: GridFunction) -> float:
    """(1/2) <phi, -Lap phi> as a forward-difference Dirichlet form.

    The sum of squared jumps includes the jumps to the zero ghost nodes just
    outside the box, so the identity with :func:`apply_laplacian` holds to
    round-off.  Meaningful when phi has decayed at the box ends.
    """
    v = phi.values
    h = phi.grid.spacing
    return 0.5 / h * (v[0] ** 2 + float((np.diff(v) ** 2).sum()) + v[-1] ** 2)


def apply_laplacian(phi: GridFunction) -> GridFunction:
    """Apply -Lap: (2 phi_i - phi_{i-1} - phi_{i+1}) / h^2, zero outside the box."""
    v = phi.values
    h = phi.grid.spacing
    out = 2.0 * v
    out[:-1] -= v[1:]
    out[1:] -= v[:-1]
    out /= h * h
    return GridFunction(phi.grid, out)
