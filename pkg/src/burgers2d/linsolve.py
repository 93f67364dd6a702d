"""Linear solves for the per-time-step systems.

Two routes are provided and kept in agreement by tests: a matrix-free
restarted GMRES (production path; the convection terms make the operators
nonsymmetric) and a dense assembly solved by LU with partial pivoting
(oracle path for small grids).

GMRES enforces the residual contract on the true, unpreconditioned residual:
the returned x always satisfies ||A x - b|| <= rel_tol * max(||b||, 1e-300),
or the solve raises LinearSolveError carrying the final residual.  All
reductions are plain fixed-order numpy dots, so identical inputs give
bit-identical solutions.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.linalg

from .fd_ops import compact_eigenvalues
from .mesh import Field2D, PeriodicGrid

__all__ = [
    "LinearOperator",
    "SolveSettings",
    "LinearSolveError",
    "solve_iterative",
    "solve_dense",
    "assemble_dense",
    "diffusion_preconditioner",
]

_DENSE_GUARD = 4096
_NORM_FLOOR = 1e-300


class LinearSolveError(RuntimeError):
    """Iterative solve failed to meet the residual contract.

    Attributes
    ----------
    residual : float
        True residual norm ||A x - b|| at the last iterate.
    iterations : int
        Inner iterations spent before giving up.
    """

    def __init__(self, message, residual, iterations):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass
class SolveSettings:
    """Tolerances and limits for the iterative path.

    rel_tol is relative to the right-hand side norm (with a tiny floor so a
    zero rhs is well defined); max_iters defaults to 10*M1*M2 at solve time;
    restart is the Krylov cycle length.  precondition toggles the optional
    left preconditioner carried by the operator, keeping the unpreconditioned
    path testable.
    """

    rel_tol: float = 1e-12
    max_iters: Optional[int] = None
    restart: int = 50
    precondition: bool = True

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"max_iters must be at least 1, got {self.max_iters}")
        if self.restart < 1:
            raise ValueError(f"restart must be at least 1, got {self.restart}")


@dataclass
class LinearOperator:
    """Matrix-free linear operator on fields of one grid.

    apply must be linear; an optional preconditioner approximates the inverse
    of the operator (applied on the left when enabled in SolveSettings).
    """

    grid: PeriodicGrid
    apply: Callable[[Field2D], Field2D]
    preconditioner: Optional[Callable[[Field2D], Field2D]] = None


def identity_operator(grid: PeriodicGrid) -> LinearOperator:
    return LinearOperator(grid=grid, apply=lambda f: f)


def solve_iterative(
    op: LinearOperator,
    rhs: Field2D,
    settings: SolveSettings | None = None,
    guess: Field2D | None = None,
    info: dict | None = None,
) -> Field2D:
    """Solve op(x) = rhs by restarted GMRES with the true-residual contract.

    Parameters
    ----------
    op : LinearOperator
    rhs : Field2D
    settings : SolveSettings, optional
        Defaults apply when omitted.
    guess : Field2D, optional
        Initial iterate; the rhs is used when absent.
    info : dict, optional
        When given, receives {'iterations': total inner iterations,
        'residual': final true residual norm}.

    Raises
    ------
    LinearSolveError
        On iteration-budget exhaustion or stagnation before the contract
        ||op(x) - rhs|| <= rel_tol * max(||rhs||, 1e-300) is met.
    """
    if settings is None:
        settings = SolveSettings()
    grid = op.grid
    shape = grid.shape
    n = grid.n_nodes
    max_iters = settings.max_iters if settings.max_iters is not None else 10 * n

    def matvec(vec):
        return op.apply(Field2D(grid, vec.reshape(shape))).values.ravel()

    minv = op.preconditioner if settings.precondition else None

    def prec(vec):
        if minv is None:
            return vec
        return minv(Field2D(grid, vec.reshape(shape))).values.ravel()

    b = rhs.values.ravel()
    b_norm = float(np.linalg.norm(b))
    target = settings.rel_tol * max(b_norm, _NORM_FLOOR)

    if b_norm == 0.0:
        # x = 0 solves the homogeneous system exactly for any linear op
        if info is not None:
            info["iterations"] = 0
            info["residual"] = 0.0
        return Field2D(grid, np.zeros(shape))

    x = (guess.values if guess is not None else rhs.values).ravel().copy()

    restart = settings.restart
    total_iters = 0
    prev_cycle_res = np.inf

    while True:
        r = b - matvec(x)
        res = float(np.linalg.norm(r))
        if res <= target:
            if info is not None:
                info["iterations"] = total_iters
                info["residual"] = res
            return Field2D(grid, x.reshape(shape))
        if total_iters >= max_iters:
            raise LinearSolveError(
                f"GMRES hit the iteration cap ({max_iters}) at residual {res:.3e} "
                f"(target {target:.3e})",
                residual=res,
                iterations=total_iters,
            )
        if res >= 0.99 * prev_cycle_res:
            raise LinearSolveError(
                f"GMRES stagnated at residual {res:.3e} (target {target:.3e})",
                residual=res,
                iterations=total_iters,
            )
        prev_cycle_res = res

        z = prec(r)
        beta = float(np.linalg.norm(z))
        if beta == 0.0:
            raise LinearSolveError(
                f"preconditioned residual vanished while true residual is {res:.3e}",
                residual=res,
                iterations=total_iters,
            )
        # aim the inner (preconditioned) estimate below the remaining
        # reduction factor, with safety margin; the outer loop re-checks the
        # true residual so the factor need not be exact
        inner_target = 0.25 * beta * (target / res)

        V = np.empty((restart + 1, n))
        H = np.zeros((restart + 1, restart))
        cs = np.zeros(restart)
        sn = np.zeros(restart)
        g = np.zeros(restart + 1)
        g[0] = beta
        V[0] = z / beta

        k = 0
        for j in range(restart):
            w = prec(matvec(V[j]))
            for i in range(j + 1):
                H[i, j] = float(np.dot(w, V[i]))
                w -= H[i, j] * V[i]
            H[j + 1, j] = float(np.linalg.norm(w))
            breakdown = H[j + 1, j] == 0.0
            if not breakdown:
                V[j + 1] = w / H[j + 1, j]
            for i in range(j):
                t = cs[i] * H[i, j] + sn[i] * H[i + 1, j]
                H[i + 1, j] = -sn[i] * H[i, j] + cs[i] * H[i + 1, j]
                H[i, j] = t
            denom = float(np.hypot(H[j, j], H[j + 1, j]))
            cs[j] = H[j, j] / denom
            sn[j] = H[j + 1, j] / denom
            H[j, j] = denom
            H[j + 1, j] = 0.0
            g[j + 1] = -sn[j] * g[j]
            g[j] = cs[j] * g[j]
            total_iters += 1
            k = j + 1
            if abs(g[j + 1]) <= inner_target or breakdown or total_iters >= max_iters:
                break

        y = scipy.linalg.solve_triangular(H[:k, :k], g[:k], check_finite=False)
        x = x + V[:k].T @ y


def assemble_dense(op: LinearOperator) -> np.ndarray:
    """Materialize the operator by applying it to every unit basis field."""
    grid = op.grid
    n = grid.n_nodes
    if n > _DENSE_GUARD:
        raise ValueError(f"dense assembly guard: {n} unknowns exceeds {_DENSE_GUARD}")
    A = np.empty((n, n))
    e = np.zeros(n)
    for k in range(n):
        e[k] = 1.0
        A[:, k] = op.apply(Field2D(grid, e.reshape(grid.shape))).values.ravel()
        e[k] = 0.0
    return A


def solve_dense(op: LinearOperator, rhs: Field2D) -> Field2D:
    """Direct oracle: assemble the matrix and solve by LU with partial pivoting.

    Guarded to at most 4096 unknowns; raises on numerically singular systems
    (a pivot below 1e-14 times the matrix max-norm).
    """
    A = assemble_dense(op)
    lu, piv = scipy.linalg.lu_factor(A, check_finite=False)
    pivot_floor = 1e-14 * float(np.max(np.abs(A)))
    if float(np.min(np.abs(np.diag(lu)))) < pivot_floor:
        raise np.linalg.LinAlgError("dense oracle: matrix is numerically singular")
    x = scipy.linalg.lu_solve((lu, piv), rhs.values.ravel(), check_finite=False)
    return Field2D(op.grid, x.reshape(op.grid.shape))


@lru_cache(maxsize=64)
def _diffusion_eig_recip(M1: int, M2: int, h: float, tau: float, lam: float) -> np.ndarray:
    # eigenvalues of I - (lam*tau/2) * (Ax^{-1} dxx + Ay^{-1} dyy) on the
    # rfft2 frequency layout; both factors are circulant so the 2D Fourier
    # basis diagonalizes the sum exactly
    def modes(M):
        lam_a = compact_eigenvalues(M)
        s2 = np.sin(np.pi * np.arange(M) / M) ** 2
        return (4.0 / h ** 2) * s2 / lam_a  # = -eig(Ax^{-1} dxx) >= 0

    bx = modes(M1)
    by = modes(M2)[: M2 // 2 + 1]
    eig = 1.0 + 0.5 * lam * tau * (bx[:, None] + by[None, :])
    return 1.0 / eig


def diffusion_preconditioner(grid: PeriodicGrid, tau: float, lam: float):
    """Exact inverse of the separable diffusion part I - (lam*tau/2)(vxx + wyy).

    The compact-inverse-times-second-difference factors are circulant in each
    direction, so the whole operator is diagonal in the 2D Fourier basis with
    real eigenvalues >= 1; applying the inverse costs one rfft2/irfft2 pair.
    Used as the left preconditioner for the per-step momentum systems.
    """
    recip = _diffusion_eig_recip(grid.M1, grid.M2, grid.h, float(tau), float(lam))

    def apply(f: Field2D) -> Field2D:
        spec = np.fft.rfft2(f.values)
        return Field2D(grid, np.fft.irfft2(spec * recip, s=grid.shape))

    return apply
