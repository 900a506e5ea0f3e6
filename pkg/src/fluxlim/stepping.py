"""Time advancement of the viscous flux-limited diffusion equation.

Two steppers share one spatial discretization:

  * ``step_explicit``: forward Euler under the diffusive CFL restriction.
    The face coefficients lie in [0, 1 + eps], so each update is a convex
    combination plus an absorption factor; positivity and the Lp decay of
    the continuous flow carry over exactly.
  * ``step_semi_implicit``: backward Euler with the nonlinear coefficient
    frozen at the previous Picard iterate (both the density and the gradient
    slot), so every inner problem is a constant-coefficient SPD system
    solved by conjugate gradients. No step-size restriction.

The boundary is the no-flux box of the grid module; the absorption term
-eps*rho makes the total mass follow the product law prod(1 - eps*dt_k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.sparse.linalg import LinearOperator, cg

from .diagnostics import DiagnosticsRecord, record
from .grid import Field, Grid, face_gradient
from .limiter import Params, limiter

__all__ = [
    "StepControls",
    "Trajectory",
    "CflViolationError",
    "NumericalFailureError",
    "PicardDivergenceError",
    "cfl_dt",
    "step_explicit",
    "step_semi_implicit",
    "run",
]


class CflViolationError(ValueError):
    """Explicit step attempted with dt above the stability ceiling."""


class NumericalFailureError(RuntimeError):
    """A step produced non-finite or impossibly negative values."""


class PicardDivergenceError(RuntimeError):
    """Frozen-coefficient iteration failed to reach tolerance."""

    def __init__(self, message: str, last_residual: float):
        super().__init__(message)
        self.last_residual = last_residual


@dataclass(frozen=True)
class StepControls:
    """Scheme controls; ``dt = None`` lets ``run`` pick the CFL step."""

    dt: float | None = None
    cfl_safety: float = 0.45
    picard_tol: float = 1e-10
    picard_max_iter: int = 200
    linear_solver_tol: float = 1e-12

    def __post_init__(self) -> None:
        if self.dt is not None and not (np.isfinite(self.dt) and self.dt > 0.0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not (0.0 < self.cfl_safety <= 1.0):
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        if not (self.picard_tol > 0.0 and self.linear_solver_tol > 0.0):
            raise ValueError("tolerances must be positive")
        if self.picard_max_iter < 1:
            raise ValueError("picard_max_iter must be >= 1")


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered snapshots plus the diagnostics table of one run."""

    snapshots: tuple[tuple[float, Field], ...]
    records: tuple[DiagnosticsRecord, ...]

    @property
    def final(self) -> Field:
        return self.snapshots[-1][1]


def cfl_dt(grid: Grid, eps: float, safety: float = 0.45) -> float:
    """Explicit stability ceiling safety * h_min^2 / (2 d (1 + eps)).

    The face coefficients never exceed 1 + eps, so the constant-coefficient
    heat bound dominates every admissible state.
    """
    if not (0.0 < safety <= 1.0):
        raise ValueError(f"safety must lie in (0, 1], got {safety}")
    if not (np.isfinite(eps) and eps >= 0.0):
        raise ValueError(f"eps must be finite and >= 0, got {eps}")
    h_min = min(grid.spacing)
    return safety * h_min * h_min / (2.0 * grid.dim * (1.0 + eps))


def _face_coefficients(field: Field, params: Params) -> list[np.ndarray]:
    """Limiter-plus-viscosity coefficient per interior face, one array per axis.

    The limiter sees the face-mean density and the norm of the full
    reconstructed gradient (normal and tangential parts).
    """
    v = field.values
    g = field.grid
    coeffs = []
    for fd in face_gradient(field):
        lo = [slice(None)] * g.dim
        hi = [slice(None)] * g.dim
        lo[fd.axis] = slice(None, -1)
        hi[fd.axis] = slice(1, None)
        rho_face = 0.5 * (v[tuple(lo)] + v[tuple(hi)])
        coeffs.append(limiter(rho_face, fd.norm(), params.chi) + params.eps)
    return coeffs


def _div_coeff_grad(values: np.ndarray, grid: Grid, coeffs: list[np.ndarray]) -> np.ndarray:
    """div(a * grad u) with normal two-point face gradients and zero boundary flux."""
    acc = np.zeros(grid.shape)
    for axis in range(grid.dim):
        h = grid.spacing[axis]
        flux = coeffs[axis] * (np.diff(values, axis=axis) / h) / h
        lo = [slice(None)] * grid.dim
        hi = [slice(None)] * grid.dim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        acc[tuple(lo)] += flux
        acc[tuple(hi)] -= flux
    return acc


def _finalize(values: np.ndarray, grid: Grid, neg_tol: float) -> Field:
    if not np.isfinite(values).all():
        raise NumericalFailureError("non-finite value produced by a time step")
    scale = max(float(np.max(np.abs(values))), 1e-300)
    lowest = float(values.min())
    if lowest < -neg_tol * scale:
        raise NumericalFailureError(
            f"negative density {lowest} beyond the roundoff floor {-neg_tol * scale}"
        )
    if lowest < 0.0:
        values = np.maximum(values, 0.0)
    return Field.density(grid, values)


def step_explicit(field: Field, params: Params, controls: StepControls) -> Field:
    """One forward-Euler step of rho' = rho + dt*div((a+eps) grad rho) - dt*eps*rho."""
    if controls.dt is None:
        raise ValueError("step_explicit needs controls.dt")
    dt = controls.dt
    ceiling = cfl_dt(field.grid, params.eps, controls.cfl_safety)
    if dt > ceiling * (1.0 + 1e-9):
        raise CflViolationError(f"dt = {dt} exceeds the CFL ceiling {ceiling}")
    coeffs = _face_coefficients(field, params)
    div = _div_coeff_grad(field.values, field.grid, coeffs)
    new = field.values + dt * div - (dt * params.eps) * field.values
    return _finalize(new, field.grid, neg_tol=1e-13)


def step_semi_implicit(field: Field, params: Params, controls: StepControls, with_info: bool = False):
    """One backward-Euler step via frozen-coefficient Picard iteration.

    Each pass freezes the limiter coefficient at the previous iterate
    (density and gradient slots alike) and solves the SPD system
    (1 + eps*dt) u - dt*div(a grad u) = rho by conjugate gradients to
    ``linear_solver_tol``. Convergence is measured by the fixed-point
    residual |T(z) - z| / |T(z)| in L2. Updates are relaxed,
    z + theta (T(z) - z), and a candidate is only accepted once its residual
    drops below the current one, halving theta otherwise (down to 1/64).
    The backtracking guards against threshold flicker (faces hopping across
    the limiter cutoff between sweeps) at large dt; it never moves the fixed
    point, and theta stays at 1 whenever plain iteration contracts.

    Returns the converged field, plus the residual trace if ``with_info``.
    """
    if controls.dt is None:
        raise ValueError("step_semi_implicit needs controls.dt")
    dt = controls.dt
    grid = field.grid
    shape = grid.shape
    n_tot = int(np.prod(shape))
    rhs = field.values.ravel().copy()

    def picard_map(z: np.ndarray) -> tuple[np.ndarray, float]:
        coeffs = _face_coefficients(Field(grid, z), params)

        def matvec(u: np.ndarray) -> np.ndarray:
            uu = u.reshape(shape)
            return ((1.0 + params.eps * dt) * uu - dt * _div_coeff_grad(uu, grid, coeffs)).ravel()

        op = LinearOperator((n_tot, n_tot), matvec=matvec, dtype=float)
        sol, info = cg(op, rhs, x0=z.ravel(), rtol=controls.linear_solver_tol, atol=0.0)
        if info != 0:
            raise NumericalFailureError(f"inner CG solve did not converge (info = {info})")
        if not np.isfinite(sol).all():
            raise NumericalFailureError("non-finite value produced by the implicit solve")
        mapped = sol.reshape(shape)
        denom = max(float(np.linalg.norm(mapped)), 1e-300)
        return mapped, float(np.linalg.norm(mapped - z)) / denom

    z = field.values
    mapped, residual = picard_map(z)
    trace = [residual]
    theta = 1.0
    for _ in range(controls.picard_max_iter):
        if residual <= controls.picard_tol:
            out = _finalize(mapped, grid, neg_tol=max(1e-13, 1e3 * controls.linear_solver_tol))
            return (out, trace) if with_info else out
        theta = min(1.0, 1.5 * theta)  # remember the working relaxation level
        while True:
            cand = z + theta * (mapped - z)
            cand_mapped, cand_residual = picard_map(cand)
            if cand_residual < residual or theta <= 1.0 / 64.0:
                break
            theta *= 0.5
        z, mapped, residual = cand, cand_mapped, cand_residual
        trace.append(residual)

    raise PicardDivergenceError(
        f"Picard iteration exceeded {controls.picard_max_iter} sweeps "
        f"(last fixed-point residual {residual})",
        last_residual=residual,
    )


def run(
    initial: Field,
    params: Params,
    controls: StepControls,
    t_end: float,
    diag_stride: int = 10,
    p_set=(2.0, 4.0),
    grad_p_set=(2.0,),
    scheme: str = "explicit",
    snapshot_stride: int = 0,
) -> Trajectory:
    """Advance to ``t_end`` with a fixed step, recording diagnostics.

    The requested dt (or the CFL step when unset) is shrunk to the nearest
    divisor of ``t_end`` so the final time is hit exactly. Diagnostics are
    recorded at t = 0, every ``diag_stride`` steps, and at the final step;
    snapshots keep the initial and final states plus every
    ``snapshot_stride``-th step when that stride is positive. The run is
    deterministic given its inputs.
    """
    if t_end < 0.0:
        raise ValueError(f"t_end must be >= 0, got {t_end}")
    if diag_stride < 1:
        raise ValueError("diag_stride must be >= 1")
    if scheme not in ("explicit", "semi_implicit"):
        raise ValueError(f"unknown scheme {scheme!r}")
    if initial.values.min(initial=0.0) < 0.0:
        raise ValueError("initial data must be nonnegative")

    rec0 = record(initial, p_set=p_set, grad_p_set=grad_p_set, time=0.0)
    if t_end == 0.0:
        return Trajectory(snapshots=((0.0, initial),), records=(rec0,))

    dt_req = controls.dt if controls.dt is not None else cfl_dt(initial.grid, params.eps, controls.cfl_safety)
    n_steps = max(1, math.ceil(t_end / dt_req - 1e-9))
    dt = t_end / n_steps
    eff = replace(controls, dt=dt)
    step = step_explicit if scheme == "explicit" else step_semi_implicit

    field = initial
    snapshots = [(0.0, initial)]
    records = [rec0]
    for k in range(1, n_steps + 1):
        field = step(field, params, eff)
        t = t_end if k == n_steps else k * dt
        if k % diag_stride == 0 or k == n_steps:
            records.append(record(field, p_set=p_set, grad_p_set=grad_p_set, time=t))
        if k == n_steps or (snapshot_stride > 0 and k % snapshot_stride == 0):
            snapshots.append((t, field))
    return Trajectory(snapshots=tuple(snapshots), records=tuple(records))
