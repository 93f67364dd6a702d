"""Benchmark problem definitions and node sampling.

A Problem bundles the periodic domain (with its lower-corner offsets, so
formulas always receive physical coordinates), the final time, the initial
datum, and optional exact-solution / source-term callables.  All callables
are evaluated vectorized on coordinate arrays.

Two benchmarks ship: a manufactured solution with a source term chosen so the
momentum equation residual vanishes identically, and a smooth initial-value
problem whose exact solution is unknown (convergence is then estimated by
differencing successively refined runs).  Additional problems can be
registered by name for the CLI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .mesh import Field2D, PeriodicGrid, make_grid

__all__ = [
    "Problem",
    "example1",
    "example2",
    "register",
    "by_name",
    "problem_grid",
    "node_coords",
    "sample",
    "source_sampler",
]


@dataclass(frozen=True)
class Problem:
    """Periodic initial-value problem for the viscous Burgers' equation.

    initial maps (x, y) to u0; source maps (x, y, t) to the forcing term of
    the momentum equation (None for the homogeneous problem); exact maps
    (x, y, t) to the reference solution when one is known.
    """

    name: str
    L1: float
    L2: float
    T: float
    initial: Callable
    source: Optional[Callable] = None
    exact: Optional[Callable] = None
    lambda_default: float = 1.0
    x0: float = 0.0
    y0: float = 0.0


def example1(lam: float = 1.0) -> Problem:
    """Manufactured-solution benchmark on [0,2]^2 x [0,1].

    The presumed solution is exp(-t) sin(pi x) sin(pi y); the source closes
    over the viscosity so that u_t + u(u_x + u_y) - lam*Lap(u) = f holds
    identically (each of u_xx and u_yy contributes lam*pi^2*u, hence the
    2*lam*pi^2 term).
    """
    lam = float(lam)

    def exact(x, y, t):
        return np.exp(-t) * np.sin(np.pi * x) * np.sin(np.pi * y)

    def initial(x, y):
        return np.sin(np.pi * x) * np.sin(np.pi * y)

    def source(x, y, t):
        u = np.exp(-t) * np.sin(np.pi * x) * np.sin(np.pi * y)
        return u * (-1.0 + np.pi * np.exp(-t) * np.sin(np.pi * (x + y)) + 2.0 * lam * np.pi ** 2)

    return Problem(
        name="example1",
        L1=2.0,
        L2=2.0,
        T=1.0,
        initial=initial,
        source=source,
        exact=exact,
        lambda_default=lam,
    )


def example2(lam: float = 0.1) -> Problem:
    """Unknown-exact-solution benchmark on [0,1] x [1/2,3/2], T = 1.

    The initial datum sin(pi x) cos(pi y) is value-continuous but not C^1
    across the periodic seams; it is used exactly as stated and convergence
    is measured by self-comparison of refined runs.
    """

    def initial(x, y):
        return np.sin(np.pi * x) * np.cos(np.pi * y)

    return Problem(
        name="example2",
        L1=1.0,
        L2=1.0,
        T=1.0,
        initial=initial,
        source=None,
        exact=None,
        lambda_default=float(lam),
        y0=0.5,
    )


_REGISTRY: dict[str, Callable[[float], Problem]] = {
    "example1": example1,
    "example2": example2,
}


def register(name: str, factory: Callable[[float], Problem]):
    """Register a problem factory (viscosity -> Problem) under a CLI name."""
    _REGISTRY[name] = factory


def by_name(name: str, lam: Optional[float] = None) -> Problem:
    """Instantiate a registered problem, using its default viscosity if lam is None."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise KeyError(f"unknown problem {name!r}; registered problems: {known}") from None
    if lam is None:
        return factory()
    return factory(float(lam))


def problem_grid(problem: Problem, M1: int, M2: Optional[int] = None) -> PeriodicGrid:
    """Grid covering the problem domain with M1 (x M2) divisions."""
    if M2 is None:
        M2 = M1
    return make_grid(problem.L1, problem.L2, M1, M2)


def node_coords(problem: Problem, grid: PeriodicGrid):
    """Physical node coordinates as broadcastable (M1,1) and (1,M2) arrays."""
    x = problem.x0 + np.arange(grid.M1) * grid.h
    y = problem.y0 + np.arange(grid.M2) * grid.h
    return x[:, None], y[None, :]


def sample(problem: Problem, grid: PeriodicGrid, which: str = "initial", t: float = 0.0) -> Field2D:
    """Pointwise samples of one of the problem's functions at the grid nodes.

    which is 'initial', 'exact', or 'source'; the latter two take the
    evaluation time t.  Requesting an absent function raises ValueError.
    """
    X, Y = node_coords(problem, grid)
    if which == "initial":
        vals = problem.initial(X, Y)
    elif which == "exact":
        if problem.exact is None:
            raise ValueError(f"problem {problem.name!r} has no exact solution")
        vals = problem.exact(X, Y, t)
    elif which == "source":
        if problem.source is None:
            raise ValueError(f"problem {problem.name!r} has no source term")
        vals = problem.source(X, Y, t)
    else:
        raise ValueError(f"unknown sample kind {which!r}")
    return Field2D(grid, np.broadcast_to(np.asarray(vals, dtype=float), grid.shape).copy())


def source_sampler(problem: Problem, grid: PeriodicGrid):
    """Callable t -> sampled source field on the grid, or None when sourceless."""
    if problem.source is None:
        return None

    def at_time(t: float) -> Field2D:
        return sample(problem, grid, "source", t)

    return at_time
