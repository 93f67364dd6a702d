"""Nonlinear compact difference scheme: Crank-Nicolson in time, compact in space.

The momentum equation couples u with the auxiliary fields v, w (the compact
fourth-order approximations of u_xx, u_yy).  Each time step is advanced by a
fixed-point iteration: sweep k -> k+1 solves the linear system obtained by
putting every term carrying the new iterate on the left-hand side, with the
auxiliaries eliminated through the compact line inverses inside the
matrix-free operator.  The convection terms use the quarter-weighted
splitting of the half-level products

    psi(a, b) at n-1/2  ->  (1/4)[psi(old_k, new) + psi(new, prev)
                                  + psi(prev, new) + psi(prev, prev)]

which recovers the Crank-Nicolson half-level form exactly at the fixed point.
The iteration starts from the previous level and stops when the max-norm
update drops below fp_tol or the sweep cap is reached; a capped step is
accepted but flagged, never aborted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import fd_ops
from .linsolve import LinearOperator, SolveSettings, diffusion_preconditioner, solve_iterative
from .mesh import Field2D, TimeWindow

__all__ = [
    "SchemeParams",
    "SolverState",
    "StepReport",
    "MarchReport",
    "NcdResult",
    "ncd_init",
    "ncd_step",
    "ncd_solve",
    "sweep_operator",
]


@dataclass
class SchemeParams:
    """Viscosity and iteration controls shared by both schemes.

    lam is the kinematic viscosity; fp_tol / fp_max_iters control the
    fixed-point iteration (max-norm stopping rule); linear holds the inner
    Krylov solve settings.
    """

    lam: float
    fp_tol: float = 1e-8
    fp_max_iters: int = 100
    linear: SolveSettings = field(default_factory=SolveSettings)

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError(f"viscosity must be positive, got {self.lam}")
        if self.fp_tol <= 0:
            raise ValueError(f"fp_tol must be positive, got {self.fp_tol}")
        if self.fp_max_iters < 1:
            raise ValueError(f"fp_max_iters must be at least 1, got {self.fp_max_iters}")


@dataclass
class SolverState:
    """One accepted time level: u and its compact second-derivative fields."""

    u: Field2D
    v: Field2D
    w: Field2D
    t: float
    step_index: int


@dataclass
class StepReport:
    fp_iterations: int
    final_fp_diff: float
    linear_iterations_total: int
    converged: bool


@dataclass
class MarchReport:
    steps: list

    @property
    def all_converged(self) -> bool:
        return all(s.converged for s in self.steps)

    @property
    def fp_iterations_total(self) -> int:
        return sum(s.fp_iterations for s in self.steps)

    @property
    def linear_iterations_total(self) -> int:
        return sum(s.linear_iterations_total for s in self.steps)


@dataclass
class NcdResult:
    """Final state, optional per-level u snapshots (index 0 = initial), report."""

    final: SolverState
    levels: Optional[list]
    report: MarchReport


def ncd_init(u0: Field2D, params: SchemeParams) -> SolverState:
    """State at t = 0 with the auxiliaries reconstructed from the initial datum."""
    del params  # controls nothing at initialization; kept for interface symmetry
    return SolverState(u=u0, v=fd_ops.aux_v(u0), w=fd_ops.aux_w(u0), t=0.0, step_index=0)


def sweep_operator(
    u_prev: Field2D,
    v_prev: Field2D,
    w_prev: Field2D,
    u_k: Field2D,
    v_k: Field2D,
    w_k: Field2D,
    tau: float,
    params: SchemeParams,
) -> LinearOperator:
    """Left-hand-side operator of one fixed-point sweep (unknown: next iterate).

    Exposed so the dense oracle can be pointed at exactly the operators the
    march solves.
    """
    grid = u_prev.grid
    h2_8 = grid.h ** 2 / 8.0
    inv_tau = 1.0 / tau
    half_lam = params.lam / 2.0

    # frozen cofactors: by bilinearity psi(a, x) + psi(b, x) = psi(a+b, x)
    sum_u = u_k + u_prev
    sum_v = v_k + v_prev
    sum_w = w_k + w_prev
    hat_prev = fd_ops.hat_h(u_prev)
    cx_prev = fd_ops.central_x(u_prev)
    cy_prev = fd_ops.central_y(u_prev)
    third = 1.0 / 3.0

    def apply(x: Field2D) -> Field2D:
        xv = fd_ops.aux_v(x)
        xw = fd_ops.aux_w(x)
        out = inv_tau * x
        out = out + 0.25 * (
            fd_ops.psi_h(sum_u, x) + third * (x * hat_prev + fd_ops.hat_h(x * u_prev))
        )
        out = out - h2_8 * (
            fd_ops.psi_x(sum_v, x) + third * (xv * cx_prev + fd_ops.central_x(xv * u_prev))
        )
        out = out - h2_8 * (
            fd_ops.psi_y(sum_w, x) + third * (xw * cy_prev + fd_ops.central_y(xw * u_prev))
        )
        return out - half_lam * (xv + xw)

    return LinearOperator(
        grid=grid,
        apply=apply,
        preconditioner=diffusion_preconditioner(grid, tau, params.lam),
    )


def _sweep_rhs(u_prev, v_prev, w_prev, tau, params, source):
    grid = u_prev.grid
    h2_8 = grid.h ** 2 / 8.0
    rhs = (
        (1.0 / tau) * u_prev
        - 0.25 * fd_ops.psi_h(u_prev, u_prev)
        + h2_8 * (fd_ops.psi_x(v_prev, u_prev) + fd_ops.psi_y(w_prev, u_prev))
        + (params.lam / 2.0) * (v_prev + w_prev)
    )
    if source is not None:
        rhs = rhs + source
    return rhs


def ncd_step(
    state: SolverState,
    tau: float,
    params: SchemeParams,
    source: Optional[Field2D] = None,
) -> tuple[SolverState, StepReport]:
    """Advance one Crank-Nicolson compact step by fixed-point iteration.

    source, when present, is the forcing already sampled at the half-level
    time; it enters the right-hand side pointwise.  Raises FloatingPointError
    if an iterate goes non-finite; linear-solve failures propagate.
    """
    u_prev, v_prev, w_prev = state.u, state.v, state.w
    rhs = _sweep_rhs(u_prev, v_prev, w_prev, tau, params, source)

    u_k, v_k, w_k = u_prev, v_prev, w_prev
    diff = math.inf
    lin_total = 0
    sweeps = 0
    while sweeps < params.fp_max_iters:
        op = sweep_operator(u_prev, v_prev, w_prev, u_k, v_k, w_k, tau, params)
        stats: dict = {}
        u_next = solve_iterative(op, rhs, params.linear, guess=u_k, info=stats)
        lin_total += stats["iterations"]
        sweeps += 1
        if not np.all(np.isfinite(u_next.values)):
            raise FloatingPointError(
                f"non-finite iterate in fixed-point sweep {sweeps} at t={state.t + tau:.6g}"
            )
        diff = float(np.max(np.abs(u_next.values - u_k.values)))
        u_k = u_next
        v_k = fd_ops.aux_v(u_k)
        w_k = fd_ops.aux_w(u_k)
        if diff <= params.fp_tol:
            break

    new_state = SolverState(
        u=u_k, v=v_k, w=w_k, t=state.t + tau, step_index=state.step_index + 1
    )
    report = StepReport(
        fp_iterations=sweeps,
        final_fp_diff=diff,
        linear_iterations_total=lin_total,
        converged=diff <= params.fp_tol,
    )
    return new_state, report


def ncd_solve(
    u0: Field2D,
    window: TimeWindow,
    params: SchemeParams,
    source_fn: Optional[Callable] = None,
    coords=None,
    keep_levels: bool = False,
) -> NcdResult:
    """March the scheme over the whole window.

    source_fn(x, y, t), when present, is evaluated vectorized on the node
    coordinates at each half-level time t_{n-1/2}.  coords overrides the
    node coordinates (needed when the domain's lower corner is not the
    origin); defaults to (i*h, j*h).
    """
    if window.N < 1:
        raise ValueError("time window must contain at least one step")
    grid = u0.grid
    if source_fn is not None and coords is None:
        coords = (
            (np.arange(grid.M1) * grid.h)[:, None],
            (np.arange(grid.M2) * grid.h)[None, :],
        )

    state = ncd_init(u0, params)
    levels = [state.u] if keep_levels else None
    reports = []
    tau = window.tau
    for n in range(1, window.N + 1):
        source = None
        if source_fn is not None:
            t_mid = (n - 0.5) * tau
            X, Y = coords
            vals = np.broadcast_to(np.asarray(source_fn(X, Y, t_mid), dtype=float), grid.shape)
            source = Field2D(grid, vals.copy())
        state, rep = ncd_step(state, tau, params, source=source)
        reports.append(rep)
        if keep_levels:
            levels.append(state.u)
    return NcdResult(final=state, levels=levels, report=MarchReport(steps=reports))
