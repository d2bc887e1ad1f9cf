import numpy as np
import pytest

from daecarleman.carleman_dae import (
    SPARSITY,
    assemble,
    build_g_blocks,
    build_h_blocks,
    carleman_dae,
    det_product_check,
    kron_reduce,
    percent_error,
    validate_against_ode,
    x_signatures,
    z_signatures,
)
from daecarleman.carleman_ode import ode_from_coefficients
from daecarleman.errors import RegularityError, ShapeError
from daecarleman.kron import kron_all
from daecarleman.taylor import CoefficientSet, monomial_vector, random_coefficient_set

from conftest import analyzed, reduced
from expected import TEST1_DAE_ORDER2, TEST1_HTILDE_1, TEST1_REDUCED_ORDER2


def test_test1_lifted_matrix(test1):
    s = assemble(test1[2], order=2)
    np.testing.assert_allclose(s.full, TEST1_DAE_ORDER2, atol=1e-12)


def test_test1_reduced_matrix():
    red = reduced("test1", 2)[1]
    np.testing.assert_allclose(red.Ftilde11, TEST1_REDUCED_ORDER2, atol=1e-12)
    np.testing.assert_allclose(red.htilde[1], TEST1_HTILDE_1, atol=1e-12)
    assert not red.htilde[2].any()


def test_test1_auxiliary_blocks(test1):
    hb = build_h_blocks(test1[2], 2)
    np.testing.assert_allclose(hb[2, 2], [[-1, 0, 1, 0], [0, -1, 0, 1]])
    np.testing.assert_allclose(hb[2, 5], np.eye(2))
    np.testing.assert_allclose(hb[3, 2], [[1, -1, -1, 1]])
    np.testing.assert_allclose(hb[3, 5], [[-2, 2]])
    np.testing.assert_allclose(hb[3, 6], [[1]])
    gb = build_g_blocks(test1[2], 2)
    np.testing.assert_allclose(gb[2, 5], [[0.2, 0], [-0.1, 0.1], [-0.1, 0.1], [0, -0.2]], atol=1e-15)


def test_order1_assembly():
    c = random_coefficient_set(2, 2, 5)
    s = assemble(c, order=1)
    np.testing.assert_array_equal(s.full, np.block([[c.G[1], c.G[4]], [c.H[1], c.H[4]]]))


@pytest.mark.parametrize("N, M", [(1, 1), (2, 1), (2, 2), (3, 2)])
def test_sparsity_pattern(N, M):
    c = random_coefficient_set(N, M, N * 10 + M)
    s = assemble(c, order=3)
    rows = list(x_signatures(3)) + list(s.row_offsets())
    cols = list(x_signatures(3)) + list(z_signatures(3))
    F = s.full
    heights = {r: N ** len(r) for r in x_signatures(3)}
    r0 = 0
    for r in rows:
        h = heights.get(r) or s.f22_block(r, "z").shape[0]
        c0 = 0
        for col in cols:
            w = N ** len(col) if col in heights else s.f22_block("h", col).shape[1]
            block = F[r0 : r0 + h, c0 : c0 + w]
            if col not in SPARSITY[r]:
                assert not block.any(), (r, col)
            c0 += w
        r0 += h


def test_lifted_rows_match_truncated_products():
    # F11 X + F12 Z reproduces d/dt of the x-powers, F21 X + F22 Z the
    # constraint families, both exact through degree 3
    N, M = 2, 2
    c = random_coefficient_set(N, M, 21)
    s = assemble(c, order=3)
    rng = np.random.default_rng(0)
    for scale in (1e-2, 5e-3):
        dx, dz = scale * rng.standard_normal(N), scale * rng.standard_normal(M)
        X = np.concatenate([monomial_vector(dx, dz, k) for k in x_signatures(3)])
        Z = np.concatenate([monomial_vector(dx, dz, k) for k in z_signatures(3)])
        g, h = c.taylor_g(dx, dz), c.taylor_h(dx, dz)
        want_x = np.concatenate([
            g,
            np.kron(g, dx) + np.kron(dx, g),
            kron_all(g, dx, dx) + kron_all(dx, g, dx) + kron_all(dx, dx, g),
        ])
        want_h = np.concatenate([h, np.kron(h, dx), np.kron(h, h), kron_all(h, dx, dx), kron_all(h, h, dx), kron_all(h, h, h)])
        bound = 100 * np.linalg.norm(np.concatenate([dx, dz])) ** 4
        assert np.abs(s.F11 @ X + s.F12 @ Z - want_x).max() <= bound
        assert np.abs(s.F21 @ X + s.F22 @ Z - want_h).max() <= bound


def test_zero_coupling_removes_mixed_blocks():
    c = random_coefficient_set(2, 1, 3)
    c.G[4][:] = 0
    gb = build_g_blocks(c, 3)
    assert not gb[2, 5].any() and not gb[3, 7].any()


def test_g25_acts_as_product_rule():
    N, M = 3, 2
    c = random_coefficient_set(N, M, 9)
    gb = build_g_blocks(c, 2)
    rng = np.random.default_rng(1)
    dx, dz = rng.standard_normal(N), rng.standard_normal(M)
    lin = c.G[4] @ dz
    np.testing.assert_allclose(gb[2, 5] @ np.kron(dx, dz), np.kron(lin, dx) + np.kron(dx, lin), atol=1e-13)


def test_singular_constraint_jacobian_raises():
    c = random_coefficient_set(2, 2, 4, H14=np.array([[1.0, 2.0], [2.0, 4.0]]))
    s = assemble(c, order=2)
    assert abs(np.linalg.det(s.F22)) < 1e-12
    with pytest.raises(RegularityError):
        kron_reduce(s)


@pytest.mark.parametrize("seed", range(20))
def test_determinant_factorization_random(seed):
    rng = np.random.default_rng(seed)
    N, M = int(rng.integers(1, 3)), int(rng.integers(1, 3))
    rep = det_product_check(assemble(random_coefficient_set(N, M, rng), order=3))
    assert rep.rel_err_block <= 1e-6
    assert rep.rel_err_closed <= 1e-6
    for ident in rep.identities.values():
        assert ident["rel_err_abs"] <= 1e-6
        assert ident["rel_err_signed"] <= 1e-6


def test_determinants_with_identity_jacobian():
    c = random_coefficient_set(2, 2, 8, H14=np.eye(2))
    rep = det_product_check(assemble(c, order=3))
    assert abs(rep.det_direct) == pytest.approx(1.0, abs=1e-12)
    assert rep.ok
    assert all(abs(abs(i["det"]) - 1) < 1e-12 for i in rep.identities.values())


def test_determinants_test1(test1):
    rep = det_product_check(assemble(test1[2], order=3))
    assert rep.ok


def test_determinant_check_needs_order3(test1):
    with pytest.raises(ValueError):
        det_product_check(assemble(test1[2], order=2))


@pytest.mark.parametrize("order", [2, 3])
def test_test2_matches_substituted_ode(order):
    ref = ode_from_coefficients(analyzed("test2-ode")[2], order)
    assert validate_against_ode(reduced("test2", order)[1], ref) < 1e-10


def test_percent_error_scaling():
    A = np.random.default_rng(2).standard_normal((4, 4))
    assert percent_error(A, A) == 0.0
    E = A / np.linalg.norm(A)
    assert percent_error(A + 1e-3 * E * np.linalg.norm(A), A) == pytest.approx(0.1, rel=1e-9)
    with pytest.raises(ShapeError):
        percent_error(A, A[:3])


def test_validate_basis_mismatch():
    ref = ode_from_coefficients(analyzed("test1-ode")[2], 3)
    with pytest.raises(ShapeError):
        validate_against_ode(reduced("test1", 2)[1], ref)


def test_assemble_errors():
    with pytest.raises(ValueError):
        assemble(random_coefficient_set(2, 1, 0), order=4)
    with pytest.raises(ShapeError):
        assemble(CoefficientSet(2, 0, {1: -np.eye(2)}, {}), order=2)


def test_reduced_reuses_public_pipeline(test1):
    s, red = carleman_dae(test1[2], 2)
    assert red.Ftilde11.shape == (6, 6)
    assert red.condensed().shape == (5, 5)
    assert red.det_H14 == 1.0
