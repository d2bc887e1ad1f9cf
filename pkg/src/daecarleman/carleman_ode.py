"""Truncated Carleman extension of a polynomial-truncated ODE."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ShapeError
from .kron import MonomialBasis, carleman_block, condensed_state_matrix, state_basis

MAX_ORDER = 3


@dataclass(frozen=True)
class CarlemanOdeSystem:
    """``d/dt [dx; dx^[2]; ...] = A_nord [dx; dx^[2]; ...]`` truncated at ``order``."""

    order: int
    N: int
    A_nord: np.ndarray
    basis: MonomialBasis

    def block(self, i: int, j: int) -> np.ndarray:
        """Rows of ``d/dt x^[i]``, columns of ``x^[j]``."""
        r0 = sum(self.N**k for k in range(1, i))
        c0 = sum(self.N**k for k in range(1, j))
        return self.A_nord[r0 : r0 + self.N**i, c0 : c0 + self.N**j]

    def condensed(self) -> np.ndarray:
        return condensed_state_matrix(self.A_nord, self.N, self.order)


def _check_order(order: int):
    if order not in range(1, MAX_ORDER + 1):
        raise ValueError(f"order must be 1, 2 or 3 (got {order})")


def build_extended_ode(A1: Sequence[np.ndarray], order: int) -> CarlemanOdeSystem:
    """Assemble the block upper-triangular Carleman matrix.

    ``A1[k-1]`` is the degree-k coefficient ``A[1,k]`` of shape ``N x N^k``;
    entries beyond ``order`` are ignored.  Block ``(i, j)`` holds ``A[i, j]``
    for ``i <= j <= order`` and is zero otherwise, so every row keeps exactly
    the terms of total degree ``<= order``.
    """
    _check_order(order)
    if len(A1) < order:
        raise ShapeError(f"need {order} coefficient matrices, got {len(A1)}")
    base = {k + 1: np.atleast_2d(np.asarray(A1[k], dtype=float)) for k in range(order)}
    N = base[1].shape[0]
    for k, a in base.items():
        if a.shape != (N, N**k):
            raise ShapeError(f"A[1,{k}] has shape {a.shape}, expected {(N, N**k)}")
    dim = sum(N**k for k in range(1, order + 1))
    A = np.zeros((dim, dim))
    offs = np.cumsum([0] + [N**k for k in range(1, order + 1)])
    for i in range(1, order + 1):
        for j in range(i, order + 1):
            A[offs[i - 1] : offs[i], offs[j - 1] : offs[j]] = carleman_block(base, i, j, N)
    return CarlemanOdeSystem(order, N, A, state_basis(N, order))


def ode_from_coefficients(coeffs, order: int) -> CarlemanOdeSystem:
    """Carleman extension of a model without algebraic variables."""
    if coeffs.M:
        raise ShapeError("model has algebraic variables; substitute them or use the DAE pipeline")
    return build_extended_ode([coeffs.G[1], coeffs.G[2], coeffs.G[3]], order)
