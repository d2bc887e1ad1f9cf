import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from daecarleman.errors import ShapeError
from daecarleman.kron import condensed_state_matrix
from daecarleman.spectral import (
    balance,
    combination_spectrum,
    eigenvalues,
    hessenberg,
    match_spectra,
    mode_report,
)

from conftest import analyzed, reduced


def test_diagonal():
    np.testing.assert_allclose(eigenvalues(np.diag([3.0, 1.0, 2.0])), [1, 2, 3], atol=1e-14)


def test_companion_matrix_roots():
    # (s+1)(s+2)(s^2+2s+5): roots -1, -2, -1 +/- 2j
    coeffs = np.polymul(np.polymul([1, 1], [1, 2]), [1, 2, 5])
    C = np.zeros((4, 4))
    C[0] = -coeffs[1:]
    C[1:, :-1] = np.eye(3)
    want = np.array([-2, -1 - 2j, -1, -1 + 2j])
    got = eigenvalues(C)
    assert match_spectra(got, want, 1e-10).passed


def test_eigenvalue_residuals():
    A = np.random.default_rng(3).standard_normal((7, 7))
    for lam in eigenvalues(A):
        smin = np.linalg.svd(A - lam * np.eye(7), compute_uv=False)[-1]
        assert smin <= 1e-12 * np.linalg.norm(A)


def test_sorted_and_conjugate_closed():
    A = np.random.default_rng(4).standard_normal((9, 9))
    lam = eigenvalues(A)
    keys = [(l.real, l.imag) for l in lam]
    assert keys == sorted(keys)
    assert match_spectra(lam, np.conj(lam), 1e-12).passed
    assert lam.sum().real == pytest.approx(np.trace(A), abs=1e-12)
    assert abs(lam.sum().imag) <= 1e-12


def test_balance_and_hessenberg_keep_spectrum():
    A = np.random.default_rng(5).standard_normal((6, 6))
    A[0] *= 1e4
    B = balance(A)
    H = hessenberg(B)
    assert not np.tril(H, -2).any()
    assert match_spectra(np.linalg.eigvals(H), np.linalg.eigvals(A), 1e-8).passed


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 12), st.integers(0, 2**31 - 1))
def test_agrees_with_lapack(n, seed):
    A = np.random.default_rng(seed).standard_normal((n, n))
    rep = match_spectra(eigenvalues(A), np.linalg.eigvals(A), 1e-8 * max(1.0, np.linalg.norm(A)))
    assert rep.passed, rep.max_distance


def test_input_errors():
    with pytest.raises(ShapeError):
        eigenvalues(np.zeros((2, 3)))
    with pytest.raises(ValueError):
        eigenvalues([[np.nan]])
    assert eigenvalues(np.zeros((0, 0))).size == 0


def test_mode_report_examples():
    rep = mode_report([1j, -1.0, 0.0])
    assert rep.frequencies[0] == pytest.approx(1 / (2 * math.pi))
    assert rep.dampings[0] == 0.0
    assert math.isnan(rep.frequencies[1]) and rep.dampings[1] == 1.0
    assert math.isnan(rep.dampings[2])
    modes = rep.to_dict()["modes"]
    assert modes[1]["frequency_hz"] is None and modes[2]["damping"] is None


@pytest.mark.parametrize("n, order, count", [(2, 2, 5), (3, 2, 9), (3, 3, 19), (1, 3, 3)])
def test_combination_counts(n, order, count):
    assert combination_spectrum(np.arange(1, n + 1), order).size == count


def test_combination_single_eigenvalue():
    np.testing.assert_allclose(combination_spectrum([-1.5], 3), [-1.5, -3.0, -4.5])
    with pytest.raises(ValueError):
        combination_spectrum([1.0], 4)


def test_match_spectra():
    a = np.array([-1 + 2j, -1 - 2j, -3])
    assert match_spectra(a, a[::-1]).max_distance == 0.0
    rep = match_spectra(a, a + 1e-9)
    assert rep.passed and rep.max_distance == pytest.approx(1e-9, rel=1e-6)
    assert not match_spectra(a, a + 1e-3).passed
    with pytest.raises(ShapeError):
        match_spectra(a, a[:2])


@pytest.mark.parametrize("name", ["test1", "test2", "test3"])
@pytest.mark.parametrize("order", [2, 3])
def test_lifted_spectrum_is_combination_spectrum(name, order):
    model, _, c = analyzed(name)
    lifted = condensed_state_matrix(reduced(name, order)[1].Ftilde11, model.N, order)
    base = eigenvalues(c.reduced_jacobian())
    assert match_spectra(eigenvalues(lifted), combination_spectrum(base, order), 1e-6).passed
