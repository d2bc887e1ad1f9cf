"""Equilibrium search and Taylor coefficient blocks of ``g`` and ``h``.

Around an equilibrium ``(x_sep, z_sep)`` the right-hand sides expand as::

    g(x_sep + dx, z_sep + dz) = G[1] dx + G[2] dx^[2] + G[3] dx^[3]
                              + G[4] dz + G[5] (dx (x) dz) + G[6] dz^[2]
                              + G[7] (dx^[2] (x) dz) + G[8] (dx (x) dz^[2])
                              + G[9] dz^[3] + O(|d|^4)

and likewise for ``h`` with blocks ``H[1..9]``.  Coefficients follow the
symmetric-slot convention: the entry for the Kronecker slot
``(i_1..i_p, k_1..k_q)`` is the mixed partial divided by ``p! q!``, the same
for every ordering of the slots.
"""
from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal, Sequence

import mpmath
import numpy as np

from .errors import ConvergenceError, DomainError, ModelError, RegularityError
from .expr import Const, Expr, Func, ModelSpec, Neg, Pow, Var, compile_expr, evaluate, partial

#: factor signature of each coefficient block, x-slots first
BLOCK_SIGNATURES = {
    1: "x",
    2: "xx",
    3: "xxx",
    4: "z",
    5: "xz",
    6: "zz",
    7: "xxz",
    8: "xzz",
    9: "zzz",
}

EQUILIBRIUM_TOL = 1e-10
DET_WARN_LOW = 1e-8
DET_WARN_HIGH = 1e8


def block_width(j: int, N: int, M: int) -> int:
    sig = BLOCK_SIGNATURES[j]
    return N ** sig.count("x") * M ** sig.count("z")


def monomial_vector(dx, dz, signature: str) -> np.ndarray:
    """Kronecker product of ``dx``/``dz`` factors in the given order."""
    dx = np.asarray(dx, dtype=float).ravel()
    dz = np.asarray(dz, dtype=float).ravel()
    out = np.ones(1)
    for k in signature:
        out = np.kron(out, dx if k == "x" else dz)
    return out


@dataclass(frozen=True)
class Equilibrium:
    x_sep: np.ndarray
    z_sep: np.ndarray
    residual_norm: float
    newton_iters: int

    def to_dict(self) -> dict:
        return {
            "x_sep": [float(v) for v in self.x_sep],
            "z_sep": [float(v) for v in self.z_sep],
            "residual_norm": float(self.residual_norm),
            "newton_iters": int(self.newton_iters),
        }


@dataclass
class CoefficientSet:
    """Blocks ``G[1..9]`` (``N`` rows) and ``H[1..9]`` (``M`` rows)."""

    N: int
    M: int
    G: dict[int, np.ndarray]
    H: dict[int, np.ndarray]
    x_sep: np.ndarray = field(default=None)
    z_sep: np.ndarray = field(default=None)

    def __post_init__(self):
        for name, blocks, rows in (("G", self.G, self.N), ("H", self.H, self.M)):
            for j in range(1, 10):
                if j not in blocks:
                    blocks[j] = np.zeros((rows, block_width(j, self.N, self.M)))
                blocks[j] = np.asarray(blocks[j], dtype=float).reshape(
                    rows, block_width(j, self.N, self.M)
                )
        if self.x_sep is None:
            self.x_sep = np.zeros(self.N)
        if self.z_sep is None:
            self.z_sep = np.zeros(self.M)

    @property
    def det_H14(self) -> float:
        return float(np.linalg.det(self.H[4])) if self.M else 1.0

    def taylor_g(self, dx, dz, max_degree: int = 3) -> np.ndarray:
        return _taylor(self.G, dx, dz, max_degree, self.N)

    def taylor_h(self, dx, dz, max_degree: int = 3) -> np.ndarray:
        return _taylor(self.H, dx, dz, max_degree, self.M)

    def reduced_jacobian(self) -> np.ndarray:
        """``G[1] - G[4] H[4]^-1 H[1]``, the Jacobian after eliminating ``z``."""
        if self.M == 0:
            return self.G[1].copy()
        return self.G[1] - self.G[4] @ np.linalg.solve(self.H[4], self.H[1])

    def blocks(self):
        """Iterate ``(name, matrix)`` in the order G_1_1..G_1_9, H_1_1..H_1_9."""
        for j in range(1, 10):
            yield f"G_1_{j}", self.G[j]
        for j in range(1, 10):
            yield f"H_1_{j}", self.H[j]


def _taylor(blocks, dx, dz, max_degree, rows):
    out = np.zeros(rows)
    for j, sig in BLOCK_SIGNATURES.items():
        if len(sig) <= max_degree:
            out += blocks[j] @ monomial_vector(dx, dz, sig)
    return out


# ---------------------------------------------------------------------------
# Equilibrium

class _Compiled:
    """Residual and Jacobian closures for ``[g; h]`` over ``(x, z)``."""

    def __init__(self, model: ModelSpec):
        names = model.names
        self.n = len(names)
        exprs = model.odes + model.constraints
        self.f = [compile_expr(e, names) for e in exprs]
        self.J = [[compile_expr(partial(e, [v]), names) for v in names] for e in exprs]

    def residual(self, v) -> np.ndarray:
        return np.array([f(v) for f in self.f])

    def jacobian(self, v) -> np.ndarray:
        return np.array([[d(v) for d in row] for row in self.J])


def find_equilibrium(model: ModelSpec, guess=None, max_iter: int = 100, tol: float = EQUILIBRIUM_TOL) -> Equilibrium:
    """Damped Newton on the stacked residual ``[g; h] = 0``.

    Each full step is halved until the residual 2-norm decreases (or a
    trial point leaves the domain of ``g``/``h``).
    """
    sys_ = _Compiled(model)
    if guess is None:
        v = np.array(model.guess_x + model.guess_z, dtype=float)
    else:
        v = np.asarray(guess, dtype=float).copy()
    try:
        r = sys_.residual(v)
    except DomainError as exc:
        raise DomainError(f"initial guess outside the model domain: {exc}") from None
    for it in range(max_iter + 1):
        if np.max(np.abs(r)) <= tol:
            return Equilibrium(v[: model.N].copy(), v[model.N :].copy(), float(np.max(np.abs(r))), it)
        if it == max_iter:
            break
        J = sys_.jacobian(v)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            raise ConvergenceError(f"singular Jacobian at Newton iterate {it}") from None
        if not np.all(np.isfinite(step)):
            raise ConvergenceError(f"singular Jacobian at Newton iterate {it}")
        norm0 = np.linalg.norm(r)
        t = 1.0
        while True:
            trial = v + t * step
            try:
                r_trial = sys_.residual(trial)
                if np.linalg.norm(r_trial) < norm0 or np.max(np.abs(r_trial)) <= tol:
                    break
            except DomainError:
                pass
            t *= 0.5
            if t < 1e-10:
                raise ConvergenceError(f"line search stalled at Newton iterate {it}")
        v, r = trial, r_trial
    raise ConvergenceError(
        f"Newton did not converge in {max_iter} iterations (residual {np.max(np.abs(r)):.3e})"
    )


# ---------------------------------------------------------------------------
# Coefficient blocks

def _slot_names(sig: str, combo, model: ModelSpec):
    return [model.states[i] if k == "x" else model.algebraics[i] for k, i in zip(sig, combo)]


def coefficient_matrices(model: ModelSpec, eq: Equilibrium) -> CoefficientSet:
    """Evaluate all 18 coefficient blocks at the equilibrium by exact differentiation."""
    N, M = model.N, model.M
    point = dict(zip(model.states, eq.x_sep))
    point.update(zip(model.algebraics, eq.z_sep))

    @lru_cache(maxsize=None)
    def deriv(row_kind: str, row: int, names: tuple) -> float:
        return evaluate(deriv_expr(row_kind, row, names), point)

    @lru_cache(maxsize=None)
    def deriv_expr(row_kind: str, row: int, names: tuple) -> Expr:
        base = model.odes[row] if row_kind == "g" else model.constraints[row]
        if not names:
            return base
        return partial(deriv_expr(row_kind, row, names[:-1]), [names[-1]])

    out = {}
    for kind, rows in (("g", N), ("h", M)):
        blocks = {}
        for j, sig in BLOCK_SIGNATURES.items():
            p, q = sig.count("x"), sig.count("z")
            scale = 1.0 / (math.factorial(p) * math.factorial(q))
            B = np.zeros((rows, block_width(j, N, M)))
            ranges = [range(N) if k == "x" else range(M) for k in sig]
            for c, combo in enumerate(itertools.product(*ranges)):
                # sorted names share one cached derivative across permuted slots
                names = tuple(sorted(_slot_names(sig, combo, model)))
                for r in range(rows):
                    B[r, c] = deriv(kind, r, names) * scale
            blocks[j] = B
        out[kind] = blocks
    cs = CoefficientSet(N, M, out["g"], out["h"], np.array(eq.x_sep, float), np.array(eq.z_sep, float))
    if M:
        det = float(np.linalg.det(cs.H[4]))
        if det == 0.0:
            raise RegularityError("dh/dz is singular at the equilibrium (det H_1_4 = 0)", det)
        if abs(det) < DET_WARN_LOW or abs(det) > DET_WARN_HIGH:
            warnings.warn(
                f"|det H_1_4| = {abs(det):.3e}; the lifted algebraic block may be ill-conditioned",
                RuntimeWarning,
                stacklevel=2,
            )
    return cs


def analyze(model: ModelSpec) -> tuple[Equilibrium, CoefficientSet]:
    eq = find_equilibrium(model)
    return eq, coefficient_matrices(model, eq)


# ---------------------------------------------------------------------------
# Finite-difference oracle

_MP_FUNCS = {"sin": mpmath.sin, "cos": mpmath.cos, "tan": mpmath.tan, "exp": mpmath.exp}


def _eval_mp(e: Expr, point):
    if isinstance(e, Const):
        return mpmath.mpf(e.value)
    if isinstance(e, Var):
        return point[e.name]
    if isinstance(e, Neg):
        return -_eval_mp(e.arg, point)
    if isinstance(e, Func):
        return _MP_FUNCS[e.name](_eval_mp(e.arg, point))
    if isinstance(e, Pow):
        return _eval_mp(e.base, point) ** e.exponent
    a, b = _eval_mp(e.left, point), _eval_mp(e.right, point)
    if e.op == "+":
        return a + b
    if e.op == "-":
        return a - b
    if e.op == "*":
        return a * b
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def fd_oracle(
    model: ModelSpec,
    eq: Equilibrium,
    which: Literal["g", "h"],
    row: int,
    multiindex: Sequence[str],
    step: float = 1e-4,
) -> float:
    """Mixed partial of ``g[row]`` or ``h[row]`` at the equilibrium by finite differences.

    Nested central differences with ``step`` per axis, Richardson-extrapolated
    once against ``2*step``.  Function values are computed in 40-digit
    arithmetic so that third differences are not swamped by rounding.
    Only expression evaluation is used, never the symbolic derivative.
    """
    if len(multiindex) > 3:
        raise ValueError("multiindex order must be <= 3")
    e = (model.odes if which == "g" else model.constraints)[row]
    with mpmath.workdps(40):
        base = {n: mpmath.mpf(float(v)) for n, v in zip(model.states, eq.x_sep)}
        base.update({n: mpmath.mpf(float(v)) for n, v in zip(model.algebraics, eq.z_sep)})
        for n in multiindex:
            if n not in base:
                raise ModelError(f"unknown variable {n!r}")
        if not multiindex:
            return float(_eval_mp(e, base))

        def central(h):
            h = mpmath.mpf(h)
            k = len(multiindex)
            total = mpmath.mpf(0)
            for signs in np.ndindex(*(2,) * k):
                pt = dict(base)
                coef = 1
                for var, s in zip(multiindex, signs):
                    sgn = 1 if s == 0 else -1
                    pt[var] = pt[var] + sgn * h
                    coef *= sgn
                total += coef * _eval_mp(e, pt)
            return total / (2 * h) ** k

        d1 = central(step)
        d2 = central(2 * step)
        return float((4 * d1 - d2) / 3)


# ---------------------------------------------------------------------------
# Random coefficient sets (test and demo helper)

def random_coefficient_set(N: int, M: int, rng=None, scale: float = 0.5, H14=None) -> CoefficientSet:
    """Random blocks in the symmetric-slot convention.

    ``H[4]`` defaults to ``I + 0.3 * randn`` so it is comfortably invertible;
    pass ``H14`` to override (e.g. with a singular matrix).
    """
    rng = np.random.default_rng(rng)
    blocks = {}
    for kind, rows in (("G", N), ("H", M)):
        b = {}
        for j, sig in BLOCK_SIGNATURES.items():
            B = scale * rng.standard_normal((rows, block_width(j, N, M)))
            b[j] = _symmetrize(B, sig, N, M)
        blocks[kind] = b
    blocks["G"][1] = blocks["G"][1] - 2.0 * np.eye(N)
    if M:
        blocks["H"][4] = np.eye(M) + 0.3 * rng.standard_normal((M, M)) if H14 is None else np.asarray(H14, float)
    return CoefficientSet(N, M, blocks["G"], blocks["H"])


def _symmetrize(B, sig, N, M):
    """Average over permutations within the x-slots and within the z-slots."""
    p, q = sig.count("x"), sig.count("z")
    rows = B.shape[0]
    if rows == 0 or (p < 2 and q < 2):
        return B
    T = B.reshape((rows,) + (N,) * p + (M,) * q)
    acc = np.zeros_like(T)
    count = 0
    for px in itertools.permutations(range(p)):
        for pz in itertools.permutations(range(q)):
            axes = (0,) + tuple(1 + a for a in px) + tuple(1 + p + a for a in pz)
            acc += np.transpose(T, axes)
            count += 1
    return (acc / count).reshape(B.shape)
