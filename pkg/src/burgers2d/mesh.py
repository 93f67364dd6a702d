"""Periodic tensor-product meshes and the grid functions living on them.

A field stores one scalar unknown at the nodes (i*h, j*h), 0 <= i < M1,
0 <= j < M2, of a doubly periodic rectangle; index arithmetic wraps modulo
the node counts, so the node at x = L1 is identified with index 0.  The
discrete inner product carries the h^2 quadrature weight, making the norms
mimic their continuous counterparts on one period.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "PeriodicGrid",
    "TimeWindow",
    "Field2D",
    "GridMismatchError",
    "make_grid",
    "make_window",
    "inner",
    "l2_norm",
    "h1_seminorm",
    "max_norm",
    "fwd_diff_x",
    "fwd_diff_y",
]

# relative slack for the square-spacing precondition L1/M1 == L2/M2
_SPACING_RTOL = 1e-12


class GridMismatchError(ValueError):
    """Two fields that must share a mesh were built on different ones."""


@dataclass(frozen=True)
class PeriodicGrid:
    """Uniform mesh on a periodic rectangle with square spacing h = L1/M1 = L2/M2."""

    L1: float
    L2: float
    M1: int
    M2: int
    h: float

    @property
    def shape(self) -> tuple[int, int]:
        return (self.M1, self.M2)

    @property
    def n_nodes(self) -> int:
        return self.M1 * self.M2


@dataclass(frozen=True)
class TimeWindow:
    """Uniform partition of [0, T] into N steps of size tau = T/N."""

    T: float
    N: int
    tau: float

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.N + 1) * self.tau


def make_grid(L1: float, L2: float, M1: int, M2: int) -> PeriodicGrid:
    """Build a periodic grid, rejecting non-square spacing and undersized meshes.

    Parameters
    ----------
    L1, L2 : float
        Periods in x and y; must be positive.
    M1, M2 : int
        Node counts per period; at least 4 each (the cubic interpolation
        stencil of the two-grid transfer must fit).

    Returns
    -------
    PeriodicGrid with h = L1/M1.
    """
    if L1 <= 0 or L2 <= 0:
        raise ValueError(f"periods must be positive, got L1={L1}, L2={L2}")
    if M1 < 4 or M2 < 4:
        raise ValueError(f"need at least 4 nodes per direction, got M1={M1}, M2={M2}")
    hx = L1 / M1
    hy = L2 / M2
    if abs(hx - hy) > _SPACING_RTOL * max(abs(hx), abs(hy)):
        raise ValueError(f"spacing mismatch: L1/M1={hx} but L2/M2={hy} (square spacing required)")
    return PeriodicGrid(L1=float(L1), L2=float(L2), M1=int(M1), M2=int(M2), h=hx)


def make_window(T: float, N: int) -> TimeWindow:
    """Build a time window with tau = T/N."""
    if T <= 0:
        raise ValueError(f"final time must be positive, got T={T}")
    if N < 1:
        raise ValueError(f"need at least one time step, got N={N}")
    return TimeWindow(T=float(T), N=int(N), tau=float(T) / int(N))


@dataclass(frozen=True)
class Field2D:
    """Scalar grid function on a PeriodicGrid.

    values[i, j] is the sample at (x_i, y_j).  The array is not copied;
    by convention a field is never mutated after construction, so sharing
    one across threads for reading is safe.
    """

    grid: PeriodicGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != self.grid.shape:
            raise ValueError(f"values shape {v.shape} does not match grid shape {self.grid.shape}")
        object.__setattr__(self, "values", v)

    def at(self, i: int, j: int) -> float:
        """Value at integer indices with periodic wrap (any integers allowed)."""
        return float(self.values[i % self.grid.M1, j % self.grid.M2])

    def like(self, values: np.ndarray) -> "Field2D":
        """New field on the same grid."""
        return Field2D(self.grid, values)

    def copy(self) -> "Field2D":
        return Field2D(self.grid, self.values.copy())

    def __add__(self, other):
        _check_same_grid(self, other)
        return Field2D(self.grid, self.values + other.values)

    def __sub__(self, other):
        _check_same_grid(self, other)
        return Field2D(self.grid, self.values - other.values)

    def __mul__(self, other):
        if isinstance(other, Field2D):
            _check_same_grid(self, other)
            return Field2D(self.grid, self.values * other.values)
        return Field2D(self.grid, self.values * other)

    __rmul__ = __mul__

    def __neg__(self):
        return Field2D(self.grid, -self.values)


def zeros(grid: PeriodicGrid) -> Field2D:
    """Zero field on the given grid."""
    return Field2D(grid, np.zeros(grid.shape))


def full(grid: PeriodicGrid, value: float) -> Field2D:
    """Constant field on the given grid."""
    return Field2D(grid, np.full(grid.shape, float(value)))


def _check_same_grid(u: Field2D, v: Field2D):
    if u.grid != v.grid:
        raise GridMismatchError(f"fields live on different grids: {u.grid} vs {v.grid}")


def inner(u: Field2D, v: Field2D) -> float:
    """Discrete L2 inner product h^2 * sum_ij u_ij v_ij."""
    _check_same_grid(u, v)
    return u.grid.h ** 2 * float(np.dot(u.values.ravel(), v.values.ravel()))


def l2_norm(v: Field2D) -> float:
    """Discrete L2 norm, sqrt(inner(v, v))."""
    return v.grid.h * float(np.linalg.norm(v.values.ravel()))


def max_norm(v: Field2D) -> float:
    """Max-norm of the nodal values."""
    return float(np.max(np.abs(v.values)))


def fwd_diff_x(v: Field2D) -> np.ndarray:
    """Half-index forward difference (v_ij - v_{i-1,j})/h, one entry per node.

    These differences appear only inside the H1-type seminorm and the
    summation-by-parts identities; they are not field-to-field operators.
    """
    a = v.values
    return (a - np.roll(a, 1, axis=0)) / v.grid.h


def fwd_diff_y(v: Field2D) -> np.ndarray:
    """Half-index forward difference (v_ij - v_{i,j-1})/h."""
    a = v.values
    return (a - np.roll(a, 1, axis=1)) / v.grid.h


def h1_seminorm(v: Field2D) -> float:
    """Discrete H1 seminorm sqrt(||dx v||^2 + ||dy v||^2); zero iff v is constant."""
    dx = fwd_diff_x(v)
    dy = fwd_diff_y(v)
    return v.grid.h * float(np.sqrt(np.sum(dx * dx) + np.sum(dy * dy)))
