"""Time-domain runs: the nonlinear DAE and the lifted linear models."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm

from .errors import ConvergenceError, DomainError, ShapeError
from .expr import ModelSpec, compile_expr, partial
from .kron import kron_power_vec

#: constraint residual every stored point must satisfy
CONSTRAINT_TOL = 1e-10
NEWTON_TOL = 1e-13
NEWTON_MAX_ITER = 50


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    algebraics: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.atleast_2d(np.asarray(self.states, dtype=float))
        K = self.times.size
        if self.algebraics is None:
            self.algebraics = np.zeros((K, 0))
        self.algebraics = np.asarray(self.algebraics, dtype=float).reshape(K, -1)
        if self.states.shape[0] != K:
            raise ShapeError(f"{self.states.shape[0]} state rows for {K} time points")
        if K > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")
        for name, arr in (("times", self.times), ("states", self.states), ("algebraics", self.algebraics)):
            if not np.all(np.isfinite(arr)):
                raise DomainError(f"non-finite {name} in trajectory")

    @property
    def N(self) -> int:
        return self.states.shape[1]

    @property
    def M(self) -> int:
        return self.algebraics.shape[1]

    def header(self, xnames=None, znames=None) -> list[str]:
        xs = list(xnames) if xnames else [f"x{i + 1}" for i in range(self.N)]
        zs = list(znames) if znames else [f"z{i + 1}" for i in range(self.M)]
        return ["t"] + xs + zs

    def table(self) -> np.ndarray:
        return np.column_stack([self.times, self.states, self.algebraics])


def time_grid(T: float, dt: float) -> np.ndarray:
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive (got {dt})")
    if not (T > 0 and math.isfinite(T)):
        raise ValueError(f"T must be positive (got {T})")
    steps = int(math.ceil(T / dt - 1e-9))
    return dt * np.arange(steps + 1)


class _DaeFunctions:
    def __init__(self, model: ModelSpec):
        names = model.names
        self.N, self.M = model.N, model.M
        self.g = [compile_expr(e, names) for e in model.odes]
        self.h = [compile_expr(e, names) for e in model.constraints]
        self.hz = [[compile_expr(partial(e, [z]), names) for z in model.algebraics] for e in model.constraints]

    def rhs(self, v):
        return np.array([f(v) for f in self.g])

    def constraint(self, v):
        return np.array([f(v) for f in self.h])

    def solve_z(self, x, z_guess):
        """Newton on ``h(x, z) = 0`` for fixed ``x``."""
        z = np.array(z_guess, dtype=float)
        if self.M == 0:
            return z
        for _ in range(NEWTON_MAX_ITER):
            v = np.concatenate([x, z])
            r = self.constraint(v)
            if np.max(np.abs(r)) <= NEWTON_TOL:
                return z
            J = np.array([[d(v) for d in row] for row in self.hz])
            try:
                step = np.linalg.solve(J, r)
            except np.linalg.LinAlgError as exc:
                raise ConvergenceError(f"singular dh/dz at x={x}") from exc
            z = z - step
            if not np.all(np.isfinite(z)):
                break
            if np.max(np.abs(step)) <= 1e-15 * (1 + np.max(np.abs(z))):
                r = self.constraint(np.concatenate([x, z]))
                if np.max(np.abs(r)) <= CONSTRAINT_TOL:
                    return z
                break
        r = self.constraint(np.concatenate([x, z])) if np.all(np.isfinite(z)) else [np.inf]
        if np.max(np.abs(r)) <= CONSTRAINT_TOL:
            return z
        raise ConvergenceError(f"Newton for z did not converge at x={x}")


def simulate_dae(model: ModelSpec, x0, T: float = 10.0, dt: float = 0.01, z_guess=None) -> Trajectory:
    """Classic RK4 on ``x`` with ``z`` re-solved at every stage.

    ``x0`` is the absolute initial state.  Each stage solves
    ``h(x, z) = 0`` by Newton, warm-started from the last ``z``.
    """
    fun = _DaeFunctions(model)
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != model.N:
        raise ShapeError(f"x0 has {x.size} entries, model has {model.N} states")
    times = time_grid(T, dt)
    z = np.asarray(model.guess_z if z_guess is None else z_guess, dtype=float).ravel()
    if z.size != model.M:
        z = np.zeros(model.M)

    def stage(xs, zs):
        zs = fun.solve_z(xs, zs)
        return fun.rhs(np.concatenate([xs, zs])), zs

    X = np.empty((times.size, model.N))
    Z = np.empty((times.size, model.M))
    z = fun.solve_z(x, z)
    X[0], Z[0] = x, z
    try:
        for k in range(1, times.size):
            h = times[k] - times[k - 1]
            k1, z = stage(x, z)
            k2, za = stage(x + 0.5 * h * k1, z)
            k3, za = stage(x + 0.5 * h * k2, za)
            k4, za = stage(x + h * k3, za)
            x = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if not np.all(np.isfinite(x)):
                raise DomainError(f"state became non-finite at t={times[k]:g}")
            z = fun.solve_z(x, za)
            X[k], Z[k] = x, z
    except DomainError as exc:
        raise DomainError(f"trajectory left the model's domain near t={times[k]:g}: {exc}") from exc
    return Trajectory(times, X, Z, {"model": model.name, "method": "rk4-newton", "order": None})


def constraint_residuals(model: ModelSpec, traj: Trajectory) -> np.ndarray:
    """``max |h|`` at every stored point."""
    fun = _DaeFunctions(model)
    return np.array([
        np.max(np.abs(fun.constraint(np.concatenate([x, z])))) if model.M else 0.0
        for x, z in zip(traj.states, traj.algebraics)
    ])


def lifted_initial_state(delta_x0, order: int) -> np.ndarray:
    """``[dx, dx^[2], ..., dx^[order]]``."""
    dx = np.asarray(delta_x0, dtype=float).ravel()
    return np.concatenate([kron_power_vec(dx, k) for k in range(1, order + 1)])


def simulate_linear(A, delta_x0, N: int, order: int, T: float = 10.0, dt: float = 0.01, offset=None) -> Trajectory:
    """Propagate ``d/dt y = A y`` from the lifted perturbation.

    The stored states are the first ``N`` coordinates plus ``offset``
    (the equilibrium, zero by default).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    dim = sum(N**k for k in range(1, order + 1))
    if A.shape != (dim, dim):
        raise ShapeError(f"matrix {A.shape} does not match lifted dimension {dim} (N={N}, order={order})")
    y = lifted_initial_state(delta_x0, order)
    if y.size != dim:
        raise ShapeError(f"perturbation has {np.size(delta_x0)} entries, expected {N}")
    times = time_grid(T, dt)
    step = expm(A * dt)
    out = np.empty((times.size, N))
    out[0] = y[:N]
    for k in range(1, times.size):
        y = step @ y
        out[k] = y[:N]
    if not np.all(np.isfinite(out)):
        raise DomainError("lifted linear model diverged to non-finite values")
    base = np.zeros(N) if offset is None else np.asarray(offset, dtype=float).ravel()
    return Trajectory(times, out + base, None, {"method": "expm", "order": order})


@dataclass(frozen=True)
class ErrorReport:
    rms: np.ndarray
    max_abs: np.ndarray

    def to_dict(self) -> dict:
        return {"rms": self.rms.tolist(), "max_abs": self.max_abs.tolist()}


def compare(a: Trajectory, b: Trajectory) -> ErrorReport:
    """Per-state RMS and sup-norm of ``a - b`` on a shared grid."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ShapeError("trajectories are on different time grids")
    if a.N != b.N:
        raise ShapeError(f"state counts differ ({a.N} vs {b.N})")
    d = a.states - b.states
    return ErrorReport(np.sqrt(np.mean(d**2, axis=0)), np.max(np.abs(d), axis=0))
