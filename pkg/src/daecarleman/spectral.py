"""Eigenvalues, modal quantities and spectrum matching.

The eigensolver is the classic pair: balancing and Householder reduction to
upper Hessenberg form, then Francis double-shift QR on the Hessenberg
matrix, deflating one real root or one complex pair at a time.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConvergenceError, ShapeError

#: QR sweeps allowed per eigenvalue before giving up
MAX_SWEEPS = 100
_EPS = np.finfo(float).eps
_RADIX = 2.0


def balance(A) -> np.ndarray:
    """Diagonal similarity scaling so row and column norms are comparable."""
    a = np.array(A, dtype=float)
    n = a.shape[0]
    done = False
    while not done:
        done = True
        for i in range(n):
            c = np.sum(np.abs(a[:, i])) - abs(a[i, i])
            r = np.sum(np.abs(a[i, :])) - abs(a[i, i])
            if c == 0.0 or r == 0.0:
                continue
            g = r / _RADIX
            f = 1.0
            s = c + r
            while c < g:
                f *= _RADIX
                c *= _RADIX * _RADIX
            g = r * _RADIX
            while c > g:
                f /= _RADIX
                c /= _RADIX * _RADIX
            if (c + r) / f < 0.95 * s:
                done = False
                a[i, :] /= f
                a[:, i] *= f
    return a


def hessenberg(A) -> np.ndarray:
    """Householder reduction to upper Hessenberg form (similarity)."""
    H = np.array(A, dtype=float)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        nx = np.linalg.norm(x)
        if nx == 0.0:
            continue
        v = x.copy()
        v[0] += math.copysign(nx, x[0])
        v /= np.linalg.norm(v)
        H[k + 1 :, :] -= 2.0 * np.outer(v, v @ H[k + 1 :, :])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v)
        H[k + 2 :, k] = 0.0
    return H


def _hessenberg_qr(a: np.ndarray) -> np.ndarray:
    n = a.shape[0]
    wr = np.zeros(n)
    wi = np.zeros(n)
    anorm = sum(abs(a[i, j]) for i in range(n) for j in range(max(i - 1, 0), n))
    nn = n - 1
    t = 0.0
    while nn >= 0:
        its = 0
        while True:
            # smallest l with a negligible subdiagonal below it
            l = nn
            while l >= 1:
                s = abs(a[l - 1, l - 1]) + abs(a[l, l])
                if s == 0.0:
                    s = anorm
                if abs(a[l, l - 1]) <= _EPS * s:
                    a[l, l - 1] = 0.0
                    break
                l -= 1
            x = a[nn, nn]
            if l == nn:
                wr[nn] = x + t
                nn -= 1
                break
            y = a[nn - 1, nn - 1]
            w = a[nn, nn - 1] * a[nn - 1, nn]
            if l == nn - 1:
                p = 0.5 * (y - x)
                q = p * p + w
                z = math.sqrt(abs(q))
                x += t
                if q >= 0.0:
                    z = p + math.copysign(z, p)
                    wr[nn - 1] = wr[nn] = x + z
                    if z != 0.0:
                        wr[nn] = x - w / z
                else:
                    wr[nn - 1] = wr[nn] = x + p
                    wi[nn - 1] = -z
                    wi[nn] = z
                nn -= 2
                break
            if its == MAX_SWEEPS:
                raise ConvergenceError(f"QR iteration stalled after {its} sweeps")
            if its in (10, 20, 40, 60, 80):
                # exceptional shift to break cycles
                t += x
                for i in range(nn + 1):
                    a[i, i] -= x
                s = abs(a[nn, nn - 1]) + abs(a[nn - 1, nn - 2])
                x = y = 0.75 * s
                w = -0.4375 * s * s
            its += 1
            m = nn - 2
            while m >= l:
                z = a[m, m]
                r = x - z
                s = y - z
                p = (r * s - w) / a[m + 1, m] + a[m, m + 1]
                q = a[m + 1, m + 1] - z - r - s
                r = a[m + 2, m + 1]
                s = abs(p) + abs(q) + abs(r)
                p /= s
                q /= s
                r /= s
                if m == l:
                    break
                u = abs(a[m, m - 1]) * (abs(q) + abs(r))
                v = abs(p) * (abs(a[m - 1, m - 1]) + abs(z) + abs(a[m + 1, m + 1]))
                if u <= _EPS * v:
                    break
                m -= 1
            for i in range(m, nn - 1):
                a[i + 2, i] = 0.0
                if i != m:
                    a[i + 2, i - 1] = 0.0
            for k in range(m, nn):
                if k != m:
                    p = a[k, k - 1]
                    q = a[k + 1, k - 1]
                    r = a[k + 2, k - 1] if k + 1 != nn else 0.0
                    x = abs(p) + abs(q) + abs(r)
                    if x != 0.0:
                        p /= x
                        q /= x
                        r /= x
                s = math.copysign(math.sqrt(p * p + q * q + r * r), p)
                if s == 0.0:
                    continue
                if k == m:
                    if l != m:
                        a[k, k - 1] = -a[k, k - 1]
                else:
                    a[k, k - 1] = -s * x
                p += s
                x = p / s
                y = q / s
                z = r / s
                q /= p
                r /= p
                for j in range(k, nn + 1):
                    p = a[k, j] + q * a[k + 1, j]
                    if k + 1 != nn:
                        p += r * a[k + 2, j]
                        a[k + 2, j] -= p * z
                    a[k + 1, j] -= p * y
                    a[k, j] -= p * x
                for i in range(l, min(nn, k + 3) + 1):
                    p = x * a[i, k] + y * a[i, k + 1]
                    if k + 1 != nn:
                        p += z * a[i, k + 2]
                        a[i, k + 2] -= p * r
                    a[i, k + 1] -= p * q
                    a[i, k] -= p
    return wr + 1j * wi


def eigenvalues(A) -> np.ndarray:
    """All eigenvalues of a real square matrix, sorted by (real, imag)."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"eigenvalues need a square matrix, got {A.shape}")
    if A.shape[0] == 0:
        return np.zeros(0, dtype=complex)
    if not np.all(np.isfinite(A)):
        raise ValueError("matrix has non-finite entries")
    w = _hessenberg_qr(hessenberg(balance(A)))
    return w[np.lexsort((w.imag, w.real))]


@dataclass(frozen=True)
class SpectrumReport:
    """Eigenvalues with frequency (Hz, NaN for real modes) and damping ratio."""

    eigenvalues: np.ndarray
    frequencies: np.ndarray
    dampings: np.ndarray
    source: str = ""

    def to_dict(self) -> dict:
        def num(v):
            return None if not math.isfinite(v) else float(v)

        return {
            "source": self.source,
            "modes": [
                {"re": float(l.real), "im": float(l.imag), "frequency_hz": num(f), "damping": num(d)}
                for l, f, d in zip(self.eigenvalues, self.frequencies, self.dampings)
            ],
        }


def mode_report(eigs, source: str = "") -> SpectrumReport:
    """``f = |Im|/2pi`` and damping ``-Re/|lambda|`` (NaN for a zero eigenvalue)."""
    lam = np.asarray(eigs, dtype=complex).ravel()
    mag = np.abs(lam)
    freq = np.where(lam.imag != 0, np.abs(lam.imag) / (2 * np.pi), np.nan)
    with np.errstate(invalid="ignore", divide="ignore"):
        damp = np.where(mag > 0, -lam.real / mag, np.nan)
    return SpectrumReport(lam, freq, damp, source)


def combination_spectrum(base, order: int) -> np.ndarray:
    """All sums ``lambda_i + ... `` of k eigenvalues (i <= j <= ...), k = 1..order."""
    if order not in (1, 2, 3):
        raise ValueError(f"order must be 1, 2 or 3 (got {order})")
    lam = list(np.asarray(base, dtype=complex).ravel())
    out = []
    for k in range(1, order + 1):
        out.extend(sum(c) for c in itertools.combinations_with_replacement(lam, k))
    return np.array(out, dtype=complex)


@dataclass(frozen=True)
class MatchReport:
    pairs: tuple
    distances: np.ndarray
    max_distance: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        return {
            "max_distance": self.max_distance,
            "tol": self.tol,
            "passed": self.passed,
            "pairs": [list(p) for p in self.pairs],
        }


def match_spectra(a, b, tol: float = 1e-6) -> MatchReport:
    """Pair two multisets of complex numbers by minimum total distance."""
    a = np.asarray(a, dtype=complex).ravel()
    b = np.asarray(b, dtype=complex).ravel()
    if a.size != b.size:
        raise ShapeError(f"multisets differ in size ({a.size} vs {b.size})")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    d = cost[rows, cols]
    worst = float(d.max()) if d.size else 0.0
    return MatchReport(tuple(zip(rows.tolist(), cols.tolist())), d, worst, tol, worst <= tol)
