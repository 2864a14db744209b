"""Smooth partition-of-unity cutoff on overlapping half-shifted windows.

The cutoff theta is built from the standard bump eta0(x) = exp(-1/(x(l-x)))
as theta = eta0 / sqrt(eta + eta(. - l/2)) with eta the l-periodic
extension of eta0^2.  By construction theta is C-infinity, supported on
[0, l], and satisfies theta^2(x) + theta^2(x - l/2) = 1 on [l/2, l].
kappa = max |theta'| enters the 8*kappa^2 error term of the global lower
bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import expit

from .potential import HermitianPotential
from .quadrature import panel_rule

__all__ = [
    "PartitionFunction",
    "CompactFunction",
    "IdentityCheck",
    "build_theta",
    "theta_k",
    "u_k",
    "v_k",
    "lemma1_residual",
    "parseval_residual",
    "scalar_bump",
    "vector_bump",
]

_GRID_POINTS = 10_000
_GOLDEN_XTOL = 1e-10


def _log_eta2(ell: float, t: np.ndarray) -> np.ndarray:
    """log(eta0(t)^2) = -2/(t(l-t)) on (0, l), -inf outside."""
    prod = t * (ell - t)
    out = np.full_like(prod, -np.inf)
    inside = prod > 0
    out[inside] = -2.0 / prod[inside]
    return out


def _dlog_eta2(ell: float, t: np.ndarray) -> np.ndarray:
    """d/dt of -2/(t(l-t)) where defined; 0 elsewhere (unused under the
    masks applied by callers)."""
    prod = t * (ell - t)
    out = np.zeros_like(prod)
    inside = prod > 0
    out[inside] = 2.0 * (ell - 2.0 * t[inside]) / prod[inside] ** 2
    return out


def _theta_arrays(ell: float, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """theta and theta' at points x, evaluated through the stable
    logistic form theta^2 = sigma(A - B), A = log eta0^2(x),
    B = log eta0^2((x - l/2) mod l)."""
    x = np.asarray(x, dtype=float)
    u = np.mod(x - 0.5 * ell, ell)
    A = _log_eta2(ell, x)
    B = _log_eta2(ell, u)
    inside = (x > 0.0) & (x < ell)

    with np.errstate(all="ignore"):
        diff = A - B                      # +inf at x = l/2 (B = -inf) is fine
        s = expit(diff)                   # theta^2
        theta = np.where(inside, np.sqrt(s), 0.0)
        omt = expit(-diff)                # 1 - theta^2
        slope = 0.5 * theta * omt * (_dlog_eta2(ell, x) - _dlog_eta2(ell, u))
    # 0 * inf at support/flat edges: the true limit there is 0
    slope = np.where(inside & np.isfinite(slope), slope, 0.0)
    return theta, slope


@dataclass(frozen=True)
class PartitionFunction:
    """Cutoff theta with its derivative and kappa = max |theta'|."""

    ell: float
    kappa: float
    theta: Callable[[np.ndarray], np.ndarray]
    theta_prime: Callable[[np.ndarray], np.ndarray]


def _vectorized(fn):
    def wrapped(x):
        arr = np.asarray(x, dtype=float)
        out = fn(np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out
    return wrapped


def _golden_max(f, a: float, b: float, xtol: float) -> float:
    invphi = 0.5 * (np.sqrt(5.0) - 1.0)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return max(fc, fd)


def build_theta(ell: float, grid_points: int = _GRID_POINTS) -> PartitionFunction:
    """Construct the cutoff for window length ell and compute kappa.

    kappa is found on a dense uniform grid and polished by golden-section
    search around each grid-local maximum; the returned value never
    undercuts the grid maximum.
    """
    if ell <= 0:
        raise ValueError(f"ell must be positive, got {ell}")
    ell = float(ell)

    theta = _vectorized(lambda xs: _theta_arrays(ell, xs)[0])
    theta_prime = _vectorized(lambda xs: _theta_arrays(ell, xs)[1])

    xs = np.linspace(0.0, ell, grid_points + 1)
    slope = np.abs(_theta_arrays(ell, xs)[1])
    kappa = float(slope.max())

    def f(x):
        return abs(_theta_arrays(ell, np.array([x]))[1][0])

    # polish every interior grid-local maximum (the profile has two
    # symmetric peaks; polishing all of them is cheap)
    local = np.flatnonzero(
        (slope[1:-1] >= slope[:-2]) & (slope[1:-1] >= slope[2:])
    ) + 1
    order = np.argsort(slope[local])[::-1][:4]
    for i in local[order]:
        kappa = max(kappa, _golden_max(f, xs[i - 1], xs[i + 1], _GOLDEN_XTOL))

    return PartitionFunction(ell=ell, kappa=kappa, theta=theta,
                             theta_prime=theta_prime)


def theta_k(pf: PartitionFunction, k: int, x):
    """theta shifted to window k: theta(x - k*l/2)."""
    return pf.theta(np.asarray(x, dtype=float) - 0.5 * k * pf.ell)


def theta_k_prime(pf: PartitionFunction, k: int, x):
    return pf.theta_prime(np.asarray(x, dtype=float) - 0.5 * k * pf.ell)


# -- compactly supported test functions -----------------------------------


@dataclass(frozen=True)
class CompactFunction:
    """Smooth compactly supported vector function with known derivative.

    ``value`` and ``derivative`` map a point array (K,) to values (K, m).
    """

    dim: int
    support: tuple[float, float]
    value: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]


def _bump_profile(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """b(t) = exp(1 - 1/(1-t^2)) on (-1, 1) with derivative; 0 outside."""
    t = np.asarray(t, dtype=float)
    inside = np.abs(t) < 1.0
    b = np.zeros_like(t)
    db = np.zeros_like(t)
    ti = t[inside]
    g = 1.0 - ti * ti
    b[inside] = np.exp(1.0 - 1.0 / g)
    db[inside] = b[inside] * (-2.0 * ti / g**2)
    return b, db


def scalar_bump(center: float, radius: float, amplitude=1.0) -> CompactFunction:
    """Standard C-infinity bump supported on (center-radius, center+radius)."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    amp = complex(amplitude)

    def value(x):
        b, _ = _bump_profile((np.asarray(x) - center) / radius)
        return (amp * b)[:, None]

    def derivative(x):
        _, db = _bump_profile((np.asarray(x) - center) / radius)
        return (amp * db / radius)[:, None]

    return CompactFunction(dim=1, support=(center - radius, center + radius),
                           value=value, derivative=derivative)


def vector_bump(center: float, radius: float, dim: int,
                freqs=None) -> CompactFunction:
    """Bump times complex phases exp(i f_j x) per component, exercising
    genuinely complex-valued test data for matrix potentials."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if freqs is None:
        freqs = np.arange(1, dim + 1, dtype=float)
    freqs = np.asarray(freqs, dtype=float)
    if len(freqs) != dim:
        raise ValueError("one frequency per component required")

    def value(x):
        x = np.asarray(x, dtype=float)
        b, _ = _bump_profile((x - center) / radius)
        return b[:, None] * np.exp(1j * np.outer(x, freqs))

    def derivative(x):
        x = np.asarray(x, dtype=float)
        b, db = _bump_profile((x - center) / radius)
        phase = np.exp(1j * np.outer(x, freqs))
        return (db / radius)[:, None] * phase + b[:, None] * (1j * freqs) * phase

    return CompactFunction(dim=dim, support=(center - radius, center + radius),
                           value=value, derivative=derivative)


def u_k(pf: PartitionFunction, k: int, y: CompactFunction) -> CompactFunction:
    """u_k = theta_k^2 * y, with derivative by the product rule."""
    def value(x):
        return theta_k(pf, k, x)[:, None] ** 2 * y.value(x)

    def derivative(x):
        th = theta_k(pf, k, x)[:, None]
        dth = theta_k_prime(pf, k, x)[:, None]
        return 2.0 * th * dth * y.value(x) + th**2 * y.derivative(x)

    a = max(y.support[0], 0.5 * k * pf.ell)
    b = min(y.support[1], 0.5 * k * pf.ell + pf.ell)
    return CompactFunction(dim=y.dim, support=(a, b), value=value,
                           derivative=derivative)


def v_k(pf: PartitionFunction, k: int, y: CompactFunction) -> CompactFunction:
    """v_k = theta_k * theta_{k+1} * y (supported on the window overlap)."""
    def value(x):
        return (theta_k(pf, k, x) * theta_k(pf, k + 1, x))[:, None] * y.value(x)

    def derivative(x):
        t0 = theta_k(pf, k, x)[:, None]
        t1 = theta_k(pf, k + 1, x)[:, None]
        d0 = theta_k_prime(pf, k, x)[:, None]
        d1 = theta_k_prime(pf, k + 1, x)[:, None]
        return (d0 * t1 + t0 * d1) * y.value(x) + t0 * t1 * y.derivative(x)

    a = max(y.support[0], 0.5 * k * pf.ell + 0.5 * pf.ell)
    b = min(y.support[1], 0.5 * k * pf.ell + pf.ell)
    return CompactFunction(dim=y.dim, support=(a, b), value=value,
                           derivative=derivative)


# -- identity residuals ----------------------------------------------------


@dataclass(frozen=True)
class IdentityCheck:
    lhs: float
    rhs: float
    residual: float


def _require_compact(y: CompactFunction) -> tuple[float, float]:
    a, b = y.support
    if not (np.isfinite(a) and np.isfinite(b) and b > a):
        raise ValueError("test function must have finite nonempty support")
    return float(a), float(b)


def _windows_meeting(pf: PartitionFunction, a: float, b: float) -> range:
    h = 0.5 * pf.ell
    k_lo = int(np.floor(a / h)) - 2
    k_hi = int(np.ceil(b / h)) + 1
    return range(k_lo, k_hi + 1)


def _shared_nodes(P: HermitianPotential | None, pf: PartitionFunction,
                  a: float, b: float, order: int):
    h = 0.5 * pf.ell
    grid = np.arange(np.floor(a / h), np.ceil(b / h) + 1) * h
    breaks = grid
    if P is not None:
        breaks = np.concatenate([grid, P.breakpoints_in((a, b))])
    return panel_rule(a, b, breaks, max_width=min(h, b - a) / 24.0, order=order)


def _form_integrand(Q: np.ndarray, w: np.ndarray, wp: np.ndarray) -> np.ndarray:
    """(w', w') - (Qw, w') - (Qw', w) pointwise; real by Hermiticity."""
    qw = np.einsum("kab,kb->ka", Q, w)
    return (np.abs(wp) ** 2).sum(axis=1) - 2.0 * np.real(
        np.einsum("ka,ka->k", qw, wp.conj())
    )


def lemma1_residual(P: HermitianPotential, pf: PartitionFunction,
                    y: CompactFunction, order: int = 12) -> IdentityCheck:
    """Check the window-splitting identity for the quadratic form.

    Both sides are evaluated with one shared composite Gauss rule whose
    panels are aligned to the half-window grid and to the breakpoints of
    Q, so the residual measures only the identity, not quadrature error.
    """
    a, b = _require_compact(y)
    x, wt = _shared_nodes(P, pf, a, b, order)
    Q = P.eval_many(x)
    Y = y.value(x)
    Yp = y.derivative(x)

    lhs = float(wt @ _form_integrand(Q, Y, Yp))

    rhs = 0.0
    ynorm2 = (np.abs(Y) ** 2).sum(axis=1)
    for k in _windows_meeting(pf, a, b):
        t0 = theta_k(pf, k, x)[:, None]
        t1 = theta_k(pf, k + 1, x)[:, None]
        d0 = theta_k_prime(pf, k, x)[:, None]
        d1 = theta_k_prime(pf, k + 1, x)[:, None]

        uk = t0**2 * Y
        ukp = 2.0 * t0 * d0 * Y + t0**2 * Yp
        rhs += float(wt @ _form_integrand(Q, uk, ukp))

        vk = (t0 * t1) * Y
        vkp = (d0 * t1 + t0 * d1) * Y + (t0 * t1) * Yp
        rhs += 2.0 * float(wt @ _form_integrand(Q, vk, vkp))

        weight = ((d0 * t1 - t0 * d1)[:, 0]) ** 2
        rhs -= 2.0 * float(wt @ (weight * ynorm2))

    residual = abs(lhs - rhs) / (1.0 + abs(lhs))
    return IdentityCheck(lhs=lhs, rhs=rhs, residual=residual)


def parseval_residual(pf: PartitionFunction, y: CompactFunction,
                      order: int = 12) -> float:
    """Check <y,y> = sum <u_k,u_k> + 2 sum <v_k,v_k> with shared quadrature."""
    a, b = _require_compact(y)
    x, wt = _shared_nodes(None, pf, a, b, order)
    Y = y.value(x)
    ynorm2 = (np.abs(Y) ** 2).sum(axis=1)

    lhs = float(wt @ ynorm2)
    rhs = 0.0
    for k in _windows_meeting(pf, a, b):
        t0 = theta_k(pf, k, x)
        t1 = theta_k(pf, k + 1, x)
        rhs += float(wt @ (t0**4 * ynorm2))
        rhs += 2.0 * float(wt @ ((t0 * t1) ** 2 * ynorm2))
    return abs(lhs - rhs) / (1.0 + abs(lhs))
