"""Kronecker-product bookkeeping.

Vectors of monomials are laid out in the Kronecker convention: for
``a (x) b`` the leftmost factor varies slowest, so the entry for the index
tuple ``(i, j)`` sits at ``i * len(b) + j``.  Everything here works on dense
``numpy`` arrays; the systems of interest are at most a few hundred wide.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError

#: refuse to materialize anything larger than this many entries
SIZE_CAP = 10**8


def _check_size(n_entries: int, cap: int = SIZE_CAP):
    if n_entries > cap:
        raise ShapeError(f"result would have {n_entries} entries (cap {cap})")


def kron_product(A, B, cap: int = SIZE_CAP) -> np.ndarray:
    """Standard Kronecker product with a size guard."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    _check_size(A.size * B.size, cap)
    return np.kron(A, B)


def kron_all(*factors) -> np.ndarray:
    """Kronecker product of several matrices (or vectors), left to right."""
    out = np.asarray(factors[0], dtype=float)
    for f in factors[1:]:
        out = np.kron(out, np.asarray(f, dtype=float))
    return out


def kron_power_vec(v, n: int, cap: int = SIZE_CAP) -> np.ndarray:
    """``v (x) v (x) ... (x) v`` with ``n`` factors."""
    if n < 1:
        raise ValueError("order must be >= 1")
    v = np.asarray(v, dtype=float).ravel()
    _check_size(v.size**n, cap)
    out = v
    for _ in range(n - 1):
        out = np.kron(out, v)
    return out


def identity(n: int) -> np.ndarray:
    return np.eye(n)


# ---------------------------------------------------------------------------
# Axis permutations (generalized commutation matrices)

def permutation_index(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Index map for :func:`axis_permutation`.

    Returns ``idx`` with ``(P @ v)[r] == v[idx[r]]``.
    """
    dims = tuple(int(d) for d in dims)
    perm = tuple(int(p) for p in perm)
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"invalid permutation {perm} for {k} axes")
    size = math.prod(dims)
    # v viewed as a tensor with axes of sizes dims; the output has axis s
    # equal to input axis perm[s]
    src = np.arange(size).reshape(dims)
    return np.transpose(src, perm).ravel()


def axis_permutation(dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Permutation matrix reordering the factors of a Kronecker product.

    ``P @ kron(v[0], ..., v[k-1]) == kron(v[perm[0]], ..., v[perm[k-1]])``
    where ``v[i]`` has length ``dims[i]``.
    """
    idx = permutation_index(dims, perm)
    P = np.zeros((idx.size, idx.size))
    P[np.arange(idx.size), idx] = 1.0
    return P


def commutation_matrix(m: int, n: int) -> np.ndarray:
    """``K`` with ``K @ kron(a, b) == kron(b, a)`` for ``len(a)=m, len(b)=n``."""
    return axis_permutation((m, n), (1, 0))


def permutation_sign(dims: Sequence[int], perm: Sequence[int]) -> int:
    """Determinant (+1 or -1) of :func:`axis_permutation` without forming it."""
    idx = permutation_index(dims, perm)
    seen = np.zeros(idx.size, dtype=bool)
    sign = 1
    for start in range(idx.size):
        if seen[start]:
            continue
        length = 0
        j = start
        while not seen[j]:
            seen[j] = True
            j = idx[j]
            length += 1
        if length % 2 == 0:
            sign = -sign
    return sign


def canonical_order(kinds: Sequence[str]) -> tuple[int, ...]:
    """Stable order putting state factors (``"x"``) before algebraic ones (``"z"``).

    Returns ``order`` such that the canonical factor sequence is
    ``kinds[order[0]], kinds[order[1]], ...``.
    """
    return tuple(sorted(range(len(kinds)), key=lambda s: (kinds[s] != "x", s)))


def to_canonical(A, kinds: str, N: int, M: int) -> np.ndarray:
    """Re-express a coefficient block on the canonical ``x..x (x) z..z`` basis.

    ``A`` acts on the Kronecker product of factors whose kinds are listed in
    ``kinds`` (e.g. ``"zx"`` for ``dz (x) dx``).  The returned matrix gives
    the same product when applied to the canonically ordered vector
    (``dx (x) dz``).  Factors of the same kind keep their relative order.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    order = canonical_order(kinds)
    if list(order) == list(range(len(kinds))):
        return A
    canon_kinds = [kinds[s] for s in order]
    canon_dims = [N if k == "x" else M for k in canon_kinds]
    # actual position s holds canonical factor t where order[t] == s
    perm = np.argsort(order)
    idx = permutation_index(canon_dims, perm)
    # A @ P, with (P w)[r] = w[idx[r]]: column idx[r] of the result is column r of A
    out = np.zeros_like(A)
    out[:, idx] = A
    return out


# ---------------------------------------------------------------------------
# Carleman block recursion

def carleman_block(A1: dict | Sequence, i: int, j: int, n: int) -> np.ndarray:
    """Block ``A[i, j]`` of the Carleman matrix, mapping ``x^[j]`` into ``d/dt x^[i]``.

    ``A1`` maps ``k -> A[1, k]`` (the degree-k Taylor coefficient, ``n x n^k``);
    a sequence is read as ``[A[1,1], A[1,2], ...]``.  The recursion is

        A[i, j] = A[1, j-i+1] (x) I_{n^(i-1)} + I_n (x) A[i-1, j-1]

    i.e. the derivative of ``x^[i]`` picks up ``A[1, j-i+1]`` in each of its
    ``i`` slots.
    """
    if not isinstance(A1, dict):
        A1 = {k + 1: a for k, a in enumerate(A1)}
    if i < 1 or j < i:
        raise ValueError(f"no block A[{i},{j}]")
    k = j - i + 1
    if k not in A1 or A1[k] is None:
        raise KeyError(f"missing base matrix A[1,{k}]")
    base = np.asarray(A1[k], dtype=float)
    if base.shape != (n, n**k):
        raise ShapeError(f"A[1,{k}] has shape {base.shape}, expected {(n, n**k)}")
    if i == 1:
        return base
    _check_size(n**i * n**j)
    return np.kron(base, np.eye(n ** (i - 1))) + np.kron(np.eye(n), carleman_block(A1, i - 1, j - 1, n))


# ---------------------------------------------------------------------------
# Monomial bases and condensation

@dataclass(frozen=True)
class MonomialBasis:
    """Ordered index tuples labelling the coordinates of a lifted vector.

    Each entry is a tuple of ``(kind, index)`` pairs, e.g.
    ``(("x", 0), ("z", 1))`` for ``dx_1 dz_2``.
    """

    labels: tuple[tuple[tuple[str, int], ...], ...]

    def __len__(self):
        return len(self.labels)

    def __iter__(self):
        return iter(self.labels)

    def __add__(self, other: "MonomialBasis") -> "MonomialBasis":
        return MonomialBasis(self.labels + other.labels)

    @classmethod
    def product(cls, kinds: str, N: int, M: int) -> "MonomialBasis":
        """Basis of the Kronecker product with factor kinds ``kinds``."""
        ranges = [range(N) if k == "x" else range(M) for k in kinds]
        labels = tuple(
            tuple(zip(kinds, combo)) for combo in itertools.product(*ranges)
        )
        return cls(labels)

    @classmethod
    def stacked(cls, signatures: Sequence[str], N: int, M: int) -> "MonomialBasis":
        out = cls(())
        for s in signatures:
            out = out + cls.product(s, N, M)
        return out

    def names(self, xnames=None, znames=None) -> list[str]:
        def one(lbl):
            parts = []
            for kind, i in lbl:
                pool = xnames if kind == "x" else znames
                parts.append(pool[i] if pool else f"{kind}{i + 1}")
            return "*".join(parts)

        return [one(lbl) for lbl in self.labels]


def canonical_key(label) -> tuple:
    """Multiset key: variable kinds and indices sorted, so x1*x2 == x2*x1."""
    return tuple(sorted(label, key=lambda p: (p[0] != "x", p[0], p[1])))


@dataclass(frozen=True)
class CondensedMatrix:
    matrix: np.ndarray
    row_keys: tuple
    col_keys: tuple


def condense(Mx, row_basis: MonomialBasis, col_basis: MonomialBasis, tol: float = 1e-9) -> CondensedMatrix:
    """Merge coordinates that are the same monomial.

    Columns belonging to the same multiset are summed (the corresponding
    coordinates are equal, so their coefficients add).  Rows belonging to the
    same multiset describe the derivative of the same quantity; after column
    merging they must agree, and the first one in basis order is kept.
    """
    Mx = np.atleast_2d(np.asarray(Mx, dtype=float))
    if Mx.shape != (len(row_basis), len(col_basis)):
        raise ShapeError(
            f"matrix {Mx.shape} does not match bases ({len(row_basis)}, {len(col_basis)})"
        )
    col_keys: list = []
    col_pos: dict = {}
    col_map = np.empty(len(col_basis), dtype=int)
    for c, lbl in enumerate(col_basis):
        key = canonical_key(lbl)
        if key not in col_pos:
            col_pos[key] = len(col_keys)
            col_keys.append(key)
        col_map[c] = col_pos[key]
    merged = np.zeros((Mx.shape[0], len(col_keys)))
    np.add.at(merged.T, col_map, Mx.T)

    row_keys: list = []
    row_pos: dict = {}
    keep = []
    for r, lbl in enumerate(row_basis):
        key = canonical_key(lbl)
        if key in row_pos:
            ref = merged[keep[row_pos[key]]]
            if not np.allclose(merged[r], ref, rtol=0.0, atol=tol):
                worst = np.max(np.abs(merged[r] - ref))
                raise ValueError(
                    f"redundant rows for {key} disagree by {worst:.3e} (assembly bug?)"
                )
            continue
        row_pos[key] = len(row_keys)
        row_keys.append(key)
        keep.append(r)
    return CondensedMatrix(merged[keep], tuple(row_keys), tuple(col_keys))


def state_basis(N: int, order: int) -> MonomialBasis:
    """``[dx, dx^[2], ..., dx^[order]]``."""
    return MonomialBasis.stacked(["x" * k for k in range(1, order + 1)], N, 0)


def condensed_state_matrix(A, N: int, order: int, tol: float = 1e-9) -> np.ndarray:
    """Condense a square matrix over the stacked pure-state basis."""
    basis = state_basis(N, order)
    return condense(A, basis, basis, tol).matrix


def symmetrize_slots(C, N: int, k: int) -> np.ndarray:
    """Average the columns of ``C`` (``rows x N^k``) over permutations of the k slots.

    The result applied to ``x^[k]`` equals the original; this is how any
    coefficient block is brought to the symmetric-slot convention.
    """
    C = np.asarray(C, dtype=float)
    rows = C.shape[0]
    T = C.reshape((rows,) + (N,) * k)
    acc = np.zeros_like(T)
    perms = list(itertools.permutations(range(k)))
    for p in perms:
        acc += np.transpose(T, (0,) + tuple(q + 1 for q in p))
    return (acc / len(perms)).reshape(rows, N**k)
