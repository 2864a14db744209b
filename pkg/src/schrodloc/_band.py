"""Hermitian banded kernels: LDL^H factorization (no pivoting), solves,
and matrix-vector products.

Storage is LAPACK-style lower band: ``ab[r - c, c] = A[r, c]`` for
0 <= r - c <= bw, shape (bw + 1, n).  The factorization is the workhorse
of the inertia-bisection eigensolver; numba keeps it O(n bw^2) with
scalar loops.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = [
    "ldl_factor_band",
    "ldl_solve_band",
    "band_matvec",
    "band_matvec_longdouble",
    "gershgorin_bounds",
    "band_to_dense",
]


@njit(cache=True, nogil=True)
def ldl_factor_band(ab, pivtol):
    """Factor A = L D L^H for Hermitian lower-band ``ab``.

    Returns (L, d, fail) with L stored as L[i-j-1, j] = L[i, j] and d the
    real diagonal of D.  ``fail`` is the first column whose pivot has
    magnitude <= pivtol, or -1 on success (columns past a failure are не
    computed).
    """
    bw = ab.shape[0] - 1
    n = ab.shape[1]
    L = np.zeros((bw, n), dtype=np.complex128)
    d = np.zeros(n, dtype=np.float64)
    for j in range(n):
        s = ab[0, j].real
        kmin = j - bw
        if kmin < 0:
            kmin = 0
        for k in range(kmin, j):
            ljk = L[j - k - 1, k]
            s -= (ljk.real * ljk.real + ljk.imag * ljk.imag) * d[k]
        d[j] = s
        if abs(s) <= pivtol:
            return L, d, j
        imax = j + bw
        if imax > n - 1:
            imax = n - 1
        for i in range(j + 1, imax + 1):
            v = ab[i - j, j]
            kmin2 = i - bw
            if kmin2 < 0:
                kmin2 = 0
            for k in range(kmin2, j):
                v -= L[i - k - 1, k] * np.conj(L[j - k - 1, k]) * d[k]
            L[i - j - 1, j] = v / s
    return L, d, -1


@njit(cache=True, nogil=True)
def ldl_solve_band(L, d, rhs):
    """Solve (L D L^H) x = rhs with factors from ldl_factor_band."""
    bw = L.shape[0]
    n = L.shape[1]
    x = rhs.copy()
    for i in range(n):
        kmin = i - bw
        if kmin < 0:
            kmin = 0
        acc = x[i]
        for k in range(kmin, i):
            acc -= L[i - k - 1, k] * x[k]
        x[i] = acc
    for i in range(n):
        x[i] /= d[i]
    for i in range(n - 1, -1, -1):
        jmax = i + bw
        if jmax > n - 1:
            jmax = n - 1
        acc = x[i]
        for j in range(i + 1, jmax + 1):
            acc -= np.conj(L[j - i - 1, i]) * x[j]
        x[i] = acc
    return x


def band_matvec(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    """A @ x for Hermitian lower-band storage (vectorized numpy)."""
    n = ab.shape[1]
    y = ab[0] * x
    for k in range(1, ab.shape[0]):
        if n - k <= 0:
            break
        band = ab[k, : n - k]
        y[k:] += band * x[: n - k]
        y[: n - k] += np.conj(band) * x[k:]
    return y


def band_matvec_longdouble(ab: np.ndarray, x: np.ndarray) -> np.ndarray:
    """As band_matvec but in extended precision, for residual evaluation
    where float64 cancellation would dominate the result."""
    abl = ab.astype(np.clongdouble)
    return band_matvec(abl, x.astype(np.clongdouble))


def gershgorin_bounds(ab: np.ndarray) -> tuple[float, float]:
    """(lower, upper) Gershgorin bounds for the Hermitian band matrix."""
    n = ab.shape[1]
    diag = ab[0].real
    radius = np.zeros(n)
    for k in range(1, ab.shape[0]):
        if n - k <= 0:
            break
        mags = np.abs(ab[k, : n - k])
        radius[k:] += mags
        radius[: n - k] += mags
    return float((diag - radius).min()), float((diag + radius).max())


def band_to_dense(ab: np.ndarray) -> np.ndarray:
    """Full Hermitian matrix from lower-band storage (tests, small n)."""
    n = ab.shape[1]
    out = np.zeros((n, n), dtype=complex)
    out[np.arange(n), np.arange(n)] = ab[0].real
    for k in range(1, ab.shape[0]):
        if n - k <= 0:
            break
        idx = np.arange(n - k)
        out[idx + k, idx] = ab[k, : n - k]
        out[idx, idx + k] = np.conj(ab[k, : n - k])
    return out
