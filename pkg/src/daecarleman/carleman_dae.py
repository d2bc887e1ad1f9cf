"""Carleman linearization of semi-explicit DAEs.

The lifted state rows ``d/dt dx^[i]`` involve mixed monomials such as
``dx (x) dz`` that are not states.  To close the system, the constraint
``dh = 0`` is multiplied out into the auxiliary families

    dh,  dh (x) dx,  dh^[2]                      (order 2)
    dh (x) dx^[2],  dh^[2] (x) dx,  dh^[3]       (added at order 3)

each expanded to the same truncation degree.  The result is a square
system

    [ d/dt x_lift ]   [ F11  F12 ] [ x_lift ]
    [      0      ] = [ F21  F22 ] [ z_lift ]

whose Schur complement ``F11 - F12 F22^-1 F21`` is a linear ODE on the
lifted state basis.

Every block acting on a Kronecker product whose factors are not in
canonical order (all ``dx`` before all ``dz``) is re-expressed on the
canonical basis with :func:`daecarleman.kron.to_canonical`.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .carleman_ode import MAX_ORDER, CarlemanOdeSystem
from .errors import RegularityError, ShapeError
from .kron import (
    MonomialBasis,
    carleman_block,
    condensed_state_matrix,
    permutation_sign,
    canonical_order,
    state_basis,
    to_canonical,
)
from .taylor import CoefficientSet

#: column blocks of the algebraic part of the lifted vector, in order
Z_SIGNATURES = ("z", "xz", "zz", "xxz", "xzz", "zzz")
#: row families of the lifted constraints, in order
H_FAMILIES = ("h", "hx", "hh", "hxx", "hhx", "hhh")

#: coefficient-block index for each canonical column signature
COLUMN_INDEX = {"x": 1, "xx": 2, "xxx": 3, "z": 4, "xz": 5, "zz": 6, "xxz": 7, "xzz": 8, "zzz": 9}

COND_LIMIT = 1e12


def _degree(sig: str) -> int:
    return len(sig)


def x_signatures(order: int) -> tuple[str, ...]:
    return tuple("x" * k for k in range(1, order + 1))


def z_signatures(order: int) -> tuple[str, ...]:
    return tuple(s for s in Z_SIGNATURES if _degree(s) <= order)


def h_families(order: int) -> tuple[str, ...]:
    # a family of degree d in (h, x) contributes rows of degree >= d
    return tuple(f for f in H_FAMILIES if len(f) <= order)


def _family_rows(fam: str, N: int, M: int) -> int:
    return M ** fam.count("h") * N ** fam.count("x")


def _sig_width(sig: str, N: int, M: int) -> int:
    return N ** sig.count("x") * M ** sig.count("z")


# ---------------------------------------------------------------------------
# Lifted G-blocks

def build_g_blocks(c: CoefficientSet, order: int) -> dict[tuple[int, int], np.ndarray]:
    """Blocks of ``d/dt dx^[2]`` and ``d/dt dx^[3]`` keyed ``(row_power, column_block)``.

    Column block numbers follow the coefficient numbering (2: ``dx^[2]``,
    5: ``dx (x) dz``, 7: ``dx^[2] (x) dz`` ...).
    """
    N = c.N
    G = c.G
    I_N = np.eye(N)
    out: dict[tuple[int, int], np.ndarray] = {}
    if order < 2:
        return out
    A1 = {1: G[1], 2: G[2], 3: G[3]}
    out[2, 2] = carleman_block(A1, 2, 2, N)
    # (G14 (x) I)(dz (x) dx) reordered onto dx (x) dz, plus the right-slot term
    out[2, 5] = to_canonical(np.kron(G[4], I_N), "zx", N, c.M) + np.kron(I_N, G[4])
    if order < 3:
        return out
    out[2, 3] = carleman_block(A1, 2, 3, N)
    out[2, 7] = to_canonical(np.kron(G[5], I_N), "xzx", N, c.M) + np.kron(I_N, G[5])
    out[2, 8] = to_canonical(np.kron(G[6], I_N), "zzx", N, c.M) + np.kron(I_N, G[6])
    out[3, 3] = carleman_block(A1, 3, 3, N)
    out[3, 7] = (
        to_canonical(np.kron(G[4], np.eye(N * N)), "zxx", N, c.M)
        + to_canonical(np.kron(np.kron(I_N, G[4]), I_N), "xzx", N, c.M)
        + np.kron(np.eye(N * N), G[4])
    )
    return out


# ---------------------------------------------------------------------------
# Auxiliary H-blocks

def build_h_blocks(c: CoefficientSet, order: int) -> dict[tuple[int, int], np.ndarray]:
    """Coefficient blocks of the auxiliary constraint families.

    Keys are ``(family, column_block)`` with families numbered
    2: ``dh (x) dx``, 3: ``dh^[2]``, 4: ``dh (x) dx^[2]``,
    5: ``dh^[2] (x) dx``, 6: ``dh^[3]``.  Order 2 yields only
    ``H22, H23, H25, H32, H33, H35, H36`` with the degree-3 members
    ``H23`` and ``H33`` set to zero.
    """
    N, M = c.N, c.M
    H = c.H
    I_N = np.eye(N)
    I_N2 = np.eye(N * N)
    out: dict[tuple[int, int], np.ndarray] = {}
    if order < 2:
        return out

    def canon(A, kinds):
        return to_canonical(A, kinds, N, M)

    # dh (x) dx
    out[2, 2] = np.kron(H[1], I_N)
    out[2, 5] = canon(np.kron(H[4], I_N), "zx")
    # dh^[2]
    out[3, 2] = np.kron(H[1], H[1])
    out[3, 5] = canon(np.kron(H[4], H[1]), "zx") + np.kron(H[1], H[4])
    out[3, 6] = np.kron(H[4], H[4])
    if order < 3:
        out[2, 3] = np.zeros((M * N, N**3))
        out[3, 3] = np.zeros((M * M, N**3))
        return out

    out[2, 3] = np.kron(H[2], I_N)
    out[2, 7] = canon(np.kron(H[5], I_N), "xzx")
    out[2, 8] = canon(np.kron(H[6], I_N), "zzx")

    out[3, 3] = np.kron(H[2], H[1]) + np.kron(H[1], H[2])
    out[3, 7] = (
        canon(np.kron(H[5], H[1]), "xzx")
        + np.kron(H[1], H[5])
        + canon(np.kron(H[4], H[2]), "zxx")
        + np.kron(H[2], H[4])
    )
    out[3, 8] = (
        canon(np.kron(H[6], H[1]), "zzx")
        + np.kron(H[1], H[6])
        + np.kron(H[5], H[4])
        + canon(np.kron(H[4], H[5]), "zxz")
    )
    out[3, 9] = np.kron(H[6], H[4]) + np.kron(H[4], H[6])

    # dh (x) dx^[2]
    out[4, 3] = np.kron(H[1], I_N2)
    out[4, 7] = canon(np.kron(H[4], I_N2), "zxx")

    # dh^[2] (x) dx, built from the degree-2 part of dh^[2]
    out[5, 3] = np.kron(out[3, 2], I_N)
    out[5, 7] = canon(np.kron(out[3, 5], I_N), "xzx")
    out[5, 8] = canon(np.kron(out[3, 6], I_N), "zzx")

    # dh^[3] = dh^[2] (x) dh
    out[6, 3] = np.kron(out[3, 2], H[1])
    out[6, 7] = np.kron(out[3, 2], H[4]) + canon(np.kron(out[3, 5], H[1]), "xzx")
    out[6, 8] = np.kron(out[3, 5], H[4]) + canon(np.kron(out[3, 6], H[1]), "zzx")
    out[6, 9] = np.kron(out[3, 6], H[4])
    return out


# ---------------------------------------------------------------------------
# Assembly

@dataclass
class CarlemanDaeSystem:
    order: int
    N: int
    M: int
    F11: np.ndarray
    F12: np.ndarray
    F21: np.ndarray
    F22: np.ndarray
    x_basis: MonomialBasis
    z_basis: MonomialBasis
    coeffs: CoefficientSet = field(repr=False)
    g_blocks: dict = field(default_factory=dict, repr=False)
    h_blocks: dict = field(default_factory=dict, repr=False)

    @property
    def full(self) -> np.ndarray:
        return np.block([[self.F11, self.F12], [self.F21, self.F22]])

    def row_offsets(self) -> dict[str, int]:
        """Start row (within F21/F22) of each constraint family."""
        offs, r = {}, 0
        for fam in h_families(self.order):
            offs[fam] = r
            r += _family_rows(fam, self.N, self.M)
        return offs

    def col_offsets(self) -> dict[str, int]:
        """Start column (within F12/F22) of each algebraic column block."""
        offs, col = {}, 0
        for sig in z_signatures(self.order):
            offs[sig] = col
            col += _sig_width(sig, self.N, self.M)
        return offs

    def f22_block(self, fam: str, sig: str) -> np.ndarray:
        r0 = self.row_offsets()[fam]
        c0 = self.col_offsets()[sig]
        return self.F22[r0 : r0 + _family_rows(fam, self.N, self.M), c0 : c0 + _sig_width(sig, self.N, self.M)]


#: nonzero block pattern of the lifted system; everything else is zero
#: rows: x-powers 1..3 then constraint families, columns: x then z signatures
SPARSITY = {
    "x": {"x", "xx", "xxx", "z", "xz", "zz", "xxz", "xzz", "zzz"},
    "xx": {"xx", "xxx", "xz", "xxz", "xzz"},
    "xxx": {"xxx", "xxz"},
    "h": {"x", "xx", "xxx", "z", "xz", "zz", "xxz", "xzz", "zzz"},
    "hx": {"xx", "xxx", "xz", "xxz", "xzz"},
    "hh": {"xx", "xxx", "xz", "zz", "xxz", "xzz", "zzz"},
    "hxx": {"xxx", "xxz"},
    "hhx": {"xxx", "xxz", "xzz"},
    "hhh": {"xxx", "xxz", "xzz", "zzz"},
}

_FAMILY_NUMBER = {"hx": 2, "hh": 3, "hxx": 4, "hhx": 5, "hhh": 6}


def assemble(c: CoefficientSet, gb=None, hb=None, order: int = 2) -> CarlemanDaeSystem:
    """Lay the coefficient blocks out as ``F11, F12, F21, F22``.

    Row order: ``dx, dx^[2], dx^[3]`` then the constraint families
    ``dh, dh (x) dx, dh^[2], dh (x) dx^[2], dh^[2] (x) dx, dh^[3]``.
    Column order: ``dx, dx^[2], dx^[3]`` then
    ``dz, dx (x) dz, dz^[2], dx^[2] (x) dz, dx (x) dz^[2], dz^[3]``,
    truncated to total degree ``order``.
    """
    if order not in range(1, MAX_ORDER + 1):
        raise ValueError(f"order must be 1, 2 or 3 (got {order})")
    if c.M == 0:
        raise ShapeError("model has no algebraic variables; use the ODE pipeline")
    N, M = c.N, c.M
    gb = build_g_blocks(c, order) if gb is None else gb
    hb = build_h_blocks(c, order) if hb is None else hb
    xs, zs, fams = x_signatures(order), z_signatures(order), h_families(order)

    def blocks_for_row(row: str) -> dict[str, np.ndarray]:
        out = {}
        if row == "x":
            for sig in xs + zs:
                out[sig] = c.G[COLUMN_INDEX[sig]]
        elif row in ("xx", "xxx"):
            i = len(row)
            for (ri, j), B in gb.items():
                if ri == i:
                    out[_sig_of(j)] = B
        elif row == "h":
            for sig in xs + zs:
                out[sig] = c.H[COLUMN_INDEX[sig]]
        else:
            fam = _FAMILY_NUMBER[row]
            for (fi, j), B in hb.items():
                if fi == fam:
                    out[_sig_of(j)] = B
        return out

    col_sigs = xs + zs
    col_w = [_sig_width(s, N, M) for s in col_sigs]
    col_off = dict(zip(col_sigs, np.cumsum([0] + col_w[:-1])))
    row_sigs = xs + fams
    row_h = [N ** len(s) if s in xs else _family_rows(s, N, M) for s in row_sigs]
    row_off = dict(zip(row_sigs, np.cumsum([0] + row_h[:-1])))
    nx = sum(N**k for k in range(1, order + 1))
    total_rows, total_cols = sum(row_h), sum(col_w)
    if total_rows != total_cols:
        raise ShapeError(f"lifted system is {total_rows} x {total_cols}, not square")
    F = np.zeros((total_rows, total_cols))
    for row, height in zip(row_sigs, row_h):
        for sig, B in blocks_for_row(row).items():
            if sig not in col_off:
                continue  # column beyond the truncation order
            B = np.asarray(B, dtype=float)
            w = _sig_width(sig, N, M)
            if B.shape != (height, w):
                raise ShapeError(f"block ({row}, {sig}) has shape {B.shape}, expected {(height, w)}")
            r0, c0 = row_off[row], col_off[sig]
            F[r0 : r0 + height, c0 : c0 + w] = B
    x_basis = state_basis(N, order)
    z_basis = MonomialBasis.stacked(list(zs), N, M)
    return CarlemanDaeSystem(
        order, N, M,
        F[:nx, :nx], F[:nx, nx:], F[nx:, :nx], F[nx:, nx:],
        x_basis, z_basis, c, gb, hb,
    )


def _sig_of(j: int) -> str:
    for sig, k in COLUMN_INDEX.items():
        if k == j:
            return sig
    raise KeyError(j)


# ---------------------------------------------------------------------------
# Kron reduction

@dataclass
class ReducedOde:
    order: int
    N: int
    M: int
    Ftilde11: np.ndarray
    htilde: dict[int, np.ndarray]
    det_H14: float
    det_F22: float
    cond_F22: float

    def condensed(self) -> np.ndarray:
        return condensed_state_matrix(self.Ftilde11, self.N, self.order)

    @property
    def basis(self) -> MonomialBasis:
        return state_basis(self.N, self.order)


def kron_reduce(sys: CarlemanDaeSystem) -> ReducedOde:
    """Eliminate the algebraic block: ``F11 - F12 F22^-1 F21``.

    ``F22`` is factorized with partial pivoting; its inverse is never formed.
    The first ``M`` rows of ``F22^-1 F21``, negated, give the implicit-function
    coefficients ``dz = Ht1 dx + Ht2 dx^[2] + Ht3 dx^[3] + ...``.
    """
    det_H14 = float(np.linalg.det(sys.coeffs.H[4]))
    if det_H14 == 0.0:
        raise RegularityError("det H_1_4 = 0: constraint Jacobian dh/dz is singular", det_H14)
    cond = float(np.linalg.cond(sys.F22))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise RegularityError(
            f"F22 is singular or ill-conditioned (cond {cond:.3e}, det H_1_4 {det_H14:.3e})",
            det_H14,
        )
    try:
        Y = np.linalg.solve(sys.F22, sys.F21)
    except np.linalg.LinAlgError:
        raise RegularityError(f"F22 is singular (det H_1_4 {det_H14:.3e})", det_H14) from None
    Ft = sys.F11 - sys.F12 @ Y
    sign, logdet = np.linalg.slogdet(sys.F22)
    det_F22 = float(sign * np.exp(logdet))
    N, M = sys.N, sys.M
    htilde = {}
    col = 0
    for k in range(1, sys.order + 1):
        htilde[k] = -Y[:M, col : col + N**k]
        col += N**k
    return ReducedOde(sys.order, N, M, Ft, htilde, det_H14, det_F22, cond)


def carleman_dae(c: CoefficientSet, order: int) -> tuple[CarlemanDaeSystem, ReducedOde]:
    """Assemble and reduce in one call."""
    sys = assemble(c, order=order)
    return sys, kron_reduce(sys)


# ---------------------------------------------------------------------------
# Determinant identities

@dataclass
class DetReport:
    det_direct: float
    det_block_product: float
    det_closed_form: float
    rel_err_block: float
    rel_err_closed: float
    identities: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.rel_err_block <= 1e-6 and self.rel_err_closed <= 1e-6

    def to_dict(self) -> dict:
        return {
            "det_direct": self.det_direct,
            "det_block_product": self.det_block_product,
            "det_closed_form": self.det_closed_form,
            "rel_err_block": self.rel_err_block,
            "rel_err_closed": self.rel_err_closed,
            "identities": self.identities,
        }


def _rel(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0.0 else abs(a - b) / scale


def _reorder_sign(kinds: str, N: int, M: int) -> int:
    order = canonical_order(kinds)
    canon_dims = [N if kinds[s] == "x" else M for s in order]
    return permutation_sign(canon_dims, np.argsort(order))


def det_product_check(sys: CarlemanDaeSystem) -> DetReport:
    """Compare ``det F22`` with its block-triangular factorization and closed forms.

    ``F22`` is block lower-triangular in the family/column ordering, so its
    determinant is the product of the diagonal blocks ``H14, H25, H36, H47,
    H58, H69``.  Each of those is a Kronecker product of ``H14`` with
    identities (times a factor-reordering permutation), so its determinant is
    a power of ``det H14`` up to the permutation's sign; the signs are
    reported separately under ``identities``.
    """
    if sys.order != 3:
        raise ValueError("determinant identities are stated for the order-3 system")
    N, M = sys.N, sys.M
    d = float(np.linalg.det(sys.coeffs.H[4]))
    sign, logdet = np.linalg.slogdet(sys.F22)
    direct = float(sign * np.exp(logdet))

    diag = {
        "H_2_5": ("hx", "xz", N, "zx"),
        "H_3_6": ("hh", "zz", 2 * M, None),
        "H_4_7": ("hxx", "xxz", N * N, "zxx"),
        "H_5_8": ("hhx", "xzz", 2 * M * N, "zzx"),
    }
    identities = {}
    block_product = d
    closed = d
    for name, (fam, sig, power, kinds) in diag.items():
        actual = float(np.linalg.det(sys.f22_block(fam, sig)))
        sgn = _reorder_sign(kinds, N, M) if kinds else 1
        predicted = sgn * d**power
        identities[name] = {
            "det": actual,
            "closed_form": d**power,
            "permutation_sign": sgn,
            "rel_err_abs": _rel(abs(actual), abs(d**power)),
            "rel_err_signed": _rel(actual, predicted),
        }
        block_product *= actual
        closed *= predicted
    det_H36 = identities["H_3_6"]["det"]
    actual69 = float(np.linalg.det(sys.f22_block("hhh", "zzz")))
    pred69 = det_H36**M * d ** (M * M)
    identities["H_6_9"] = {
        "det": actual69,
        "closed_form": pred69,
        "permutation_sign": 1,
        "rel_err_abs": _rel(abs(actual69), abs(pred69)),
        "rel_err_signed": _rel(actual69, pred69),
    }
    block_product *= actual69
    closed *= d ** (2 * M * M) * d ** (M * M)
    return DetReport(direct, block_product, closed, _rel(direct, block_product), _rel(direct, closed), identities)


# ---------------------------------------------------------------------------
# Comparison with a reference Carleman ODE

def validate_against_ode(reduced: ReducedOde, reference: CarlemanOdeSystem) -> float:
    """Relative Frobenius distance (percent) between condensed ``Ftilde11`` and ``A_nord``."""
    if reduced.order != reference.order or reduced.N != reference.N:
        raise ShapeError(
            f"basis mismatch: reduced (N={reduced.N}, order {reduced.order}) vs "
            f"reference (N={reference.N}, order {reference.order})"
        )
    return percent_error(reduced.condensed(), reference.condensed())


def percent_error(A, ref) -> float:
    A = np.asarray(A, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if A.shape != ref.shape:
        raise ShapeError(f"shape mismatch {A.shape} vs {ref.shape}")
    return float(np.linalg.norm(A - ref) / np.linalg.norm(ref) * 100.0)
