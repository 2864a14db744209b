"""Piecewise representation of the antiderivative Q of a singular matrix potential.

The potential q itself may contain delta terms and is never evaluated
pointwise.  Everything downstream (form assembly, shooting integration)
consumes only Q, which is an ordinary locally square-integrable matrix
function: piecewise polynomial between breakpoints plus Heaviside jumps.
A jump of Q by the Hermitian matrix ``J`` at ``x0`` encodes the term
``J * delta(x - x0)`` in q.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HermitianPotential",
    "OutOfSupportError",
    "zero",
    "from_polynomial_pieces",
    "delta_comb",
    "antiderivative_of_samples",
]

MAX_PIECE_DEGREE = 8
_HERM_TOL = 1e-12


class OutOfSupportError(ValueError):
    """Evaluation point lies outside the potential's declared support."""


def _as_herm_matrix(a, dim: int, what: str) -> np.ndarray:
    """Validate Hermiticity (relative tol 1e-12) and return the exactly
    symmetrized complex matrix."""
    mat = np.atleast_2d(np.asarray(a, dtype=complex))
    if mat.shape != (dim, dim):
        raise ValueError(f"{what}: expected shape ({dim}, {dim}), got {mat.shape}")
    scale = max(np.abs(mat).max(), 1.0)
    if np.abs(mat - mat.conj().T).max() > _HERM_TOL * scale:
        raise ValueError(f"{what}: matrix is not Hermitian")
    return 0.5 * (mat + mat.conj().T)


@dataclass(frozen=True)
class HermitianPotential:
    """Hermitian antiderivative Q of a 1D matrix potential q = Q'.

    Q(x) = piecewise polynomial (global-x coefficients) + sum of jump
    matrices at locations <= x (right-continuous convention).  With
    ``period`` set, Q extends to all of R via
    Q(x + p) = Q(x) + (Q(p) - Q(0)), making q p-periodic.

    Construct through the module builders; they validate Hermiticity and
    piece layout.
    """

    dim: int
    breakpoints: np.ndarray          # (npieces+1,) sorted, or shape (0,)
    coeffs: tuple                    # per piece: (deg+1, m, m) arrays, Q = sum c[k] x^k
    jump_locs: np.ndarray            # (njumps,) sorted
    jump_mats: np.ndarray            # (njumps, m, m)
    period: float | None = None
    _jump_prefix: np.ndarray = field(init=False, repr=False)
    _period_step: np.ndarray | None = field(init=False, repr=False)

    def __post_init__(self):
        m = self.dim
        pre = np.zeros((len(self.jump_locs) + 1, m, m), dtype=complex)
        if len(self.jump_locs):
            pre[1:] = np.cumsum(self.jump_mats, axis=0)
        object.__setattr__(self, "_jump_prefix", pre)
        step = None
        if self.period is not None:
            # increment of Q over one period: polynomial change plus all jumps
            step = pre[-1].copy()
            if len(self.breakpoints):
                step += self._poly_at(np.array([self.breakpoints[-1]]))[0]
                step -= self._poly_at(np.array([self.breakpoints[0]]))[0]
            step = 0.5 * (step + step.conj().T)
        object.__setattr__(self, "_period_step", step)

    # -- geometry ------------------------------------------------------

    @property
    def support(self) -> tuple[float, float]:
        if self.period is not None or len(self.breakpoints) == 0:
            return (-np.inf, np.inf)
        return (float(self.breakpoints[0]), float(self.breakpoints[-1]))

    @property
    def max_degree(self) -> int:
        return max((c.shape[0] - 1 for c in self.coeffs), default=0)

    def _check_support(self, x: np.ndarray) -> None:
        lo, hi = self.support
        bad = (x < lo) | (x > hi)
        if bad.any():
            raise OutOfSupportError(
                f"x = {x[bad].flat[0]} outside declared support [{lo}, {hi}]"
            )

    # -- evaluation ----------------------------------------------------

    def _poly_at(self, x: np.ndarray) -> np.ndarray:
        """Polynomial part at points x (no jumps, no periodic folding)."""
        m = self.dim
        out = np.zeros((len(x), m, m), dtype=complex)
        if len(self.breakpoints) == 0:
            return out
        idx = np.searchsorted(self.breakpoints, x, side="right") - 1
        idx = np.clip(idx, 0, len(self.coeffs) - 1)
        for p, c in enumerate(self.coeffs):
            sel = idx == p
            if not sel.any():
                continue
            xs = x[sel]
            acc = np.zeros((len(xs), m, m), dtype=complex)
            for k in range(c.shape[0] - 1, -1, -1):   # Horner in global x
                acc = acc * xs[:, None, None] + c[k]
            out[sel] = acc
        return out

    def eval_many(self, x) -> np.ndarray:
        """Q at an array of points, shape (len(x), m, m)."""
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if self.period is None:
            self._check_support(x)
            xr = x
            wind = None
        else:
            p = self.period
            x0 = float(self.breakpoints[0]) if len(self.breakpoints) else 0.0
            wind = np.floor((x - x0) / p)
            xr = x - wind * p
            # clamp rounding spill back into the base window
            over = xr >= x0 + p
            xr = np.where(over, xr - p, xr)
            wind = np.where(over, wind + 1, wind)
            under = xr < x0
            xr = np.where(under, xr + p, xr)
            wind = np.where(under, wind - 1, wind)
        out = self._poly_at(xr)
        if len(self.jump_locs):
            out += self._jump_prefix[
                np.searchsorted(self.jump_locs, xr, side="right")
            ]
        if wind is not None:
            out += wind[:, None, None] * self._period_step
        return out

    def eval(self, x: float) -> np.ndarray:
        """Q(x) as an (m, m) Hermitian matrix; right limit at jumps."""
        return self.eval_many(np.array([float(x)]))[0]

    def eval_squared(self, x: float) -> np.ndarray:
        """Q(x) @ Q(x), evaluated from the exact piecewise representation."""
        q = self.eval(x)
        return q @ q

    def eval_squared_many(self, x) -> np.ndarray:
        q = self.eval_many(x)
        return q @ q

    # -- breakpoints ---------------------------------------------------

    def breakpoints_in(self, interval) -> np.ndarray:
        """Piece boundaries and jump locations strictly inside (a, b)."""
        a, b = float(interval[0]), float(interval[1])
        if not b > a:
            raise ValueError(f"empty interval ({a}, {b})")
        base = np.concatenate([np.asarray(self.breakpoints, float),
                               np.asarray(self.jump_locs, float)])
        if self.period is None:
            pts = base
        else:
            p = self.period
            pts = []
            for t in base:
                k_lo = int(np.floor((a - t) / p)) - 1
                k_hi = int(np.ceil((b - t) / p)) + 1
                pts.extend(t + k * p for k in range(k_lo, k_hi + 1))
            pts = np.asarray(pts, float)
        pts = pts[(pts > a) & (pts < b)]
        return np.unique(pts)


# -- builders ------------------------------------------------------------


def zero(dim: int = 1) -> HermitianPotential:
    """Q identically zero (free operator), supported on all of R."""
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return HermitianPotential(
        dim=dim,
        breakpoints=np.empty(0),
        coeffs=(),
        jump_locs=np.empty(0),
        jump_mats=np.empty((0, dim, dim), dtype=complex),
    )


def from_polynomial_pieces(
    breakpoints,
    coefficients,
    jumps=(),
    period: float | None = None,
    dim: int | None = None,
) -> HermitianPotential:
    """Build Q from polynomial pieces in global x plus optional jumps.

    Parameters
    ----------
    breakpoints : sorted array of piece boundaries, length npieces+1.
    coefficients : per piece, a sequence of matrices (or scalars for m=1);
        ``coefficients[p][k]`` multiplies x**k on piece p.  Degree <= 8.
    jumps : iterable of (location, Hermitian matrix or scalar).
    period : optional period p; the pieces must then tile exactly one
        period and all jumps lie in [breakpoints[0], breakpoints[0] + p).
    """
    bp = np.asarray(breakpoints, dtype=float)
    if bp.ndim != 1 or len(bp) < 2:
        raise ValueError("need at least two breakpoints")
    if not np.all(np.diff(bp) > 0):
        raise ValueError("breakpoints must be strictly increasing")
    if len(coefficients) != len(bp) - 1:
        raise ValueError("one coefficient list per piece required")

    if dim is None:
        first = np.atleast_2d(np.asarray(coefficients[0][0], dtype=complex))
        dim = first.shape[0]

    pieces = []
    for p, cl in enumerate(coefficients):
        if len(cl) == 0:
            raise ValueError(f"piece {p}: empty coefficient list")
        if len(cl) - 1 > MAX_PIECE_DEGREE:
            raise ValueError(
                f"piece {p}: degree {len(cl) - 1} exceeds cap {MAX_PIECE_DEGREE}"
            )
        stack = np.stack(
            [_as_herm_matrix(c, dim, f"piece {p} coefficient {k}")
             for k, c in enumerate(cl)]
        )
        pieces.append(stack)

    jlocs, jmats = _validate_jumps(jumps, dim)
    if period is not None:
        if period <= 0:
            raise ValueError("period must be positive")
        if abs((bp[-1] - bp[0]) - period) > 1e-12 * max(1.0, period):
            raise ValueError("pieces must tile exactly one period")
        if len(jlocs) and (jlocs.min() < bp[0] or jlocs.max() >= bp[0] + period):
            raise ValueError("jumps must lie within [x0, x0 + period)")

    return HermitianPotential(
        dim=dim,
        breakpoints=bp,
        coeffs=tuple(pieces),
        jump_locs=jlocs,
        jump_mats=jmats,
        period=period,
    )


def delta_comb(locations, strengths, dim: int = 1,
               period: float | None = None) -> HermitianPotential:
    """Potential that is a sum of delta terms: Q is a pure step function.

    ``strengths`` are scalars (dim=1) or Hermitian matrices.  With
    ``period`` set, locations must lie in [0, period) and the comb
    repeats over all of R.
    """
    jumps = list(zip(locations, strengths))
    jlocs, jmats = _validate_jumps(jumps, dim)
    if period is not None:
        if period <= 0:
            raise ValueError("period must be positive")
        if len(jlocs) and (jlocs.min() < 0 or jlocs.max() >= period):
            raise ValueError("periodic comb locations must lie in [0, period)")
        return from_polynomial_pieces(
            [0.0, period],
            [[np.zeros((dim, dim))]],
            jumps=jumps,
            period=period,
            dim=dim,
        )
    return HermitianPotential(
        dim=dim,
        breakpoints=np.empty(0),
        coeffs=(),
        jump_locs=jlocs,
        jump_mats=jmats,
    )


def antiderivative_of_samples(x, q_samples, dim: int | None = None) -> HermitianPotential:
    """Piecewise-linear Q from samples of q via cumulative trapezoid.

    Q(x[0]) is pinned to 0 (the additive constant is gauge-irrelevant).
    On each sample interval the slope is the average of the endpoint
    samples, so q is represented piecewise-constant; exact for constant q.
    """
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or len(x) < 2:
        raise ValueError("need at least two sample points")
    if not np.all(np.diff(x) > 0):
        raise ValueError("sample grid must be strictly increasing")
    q = np.asarray(q_samples, dtype=complex)
    if q.ndim == 1:
        q = q[:, None, None]
    if dim is None:
        dim = q.shape[1]
    if q.shape != (len(x), dim, dim):
        raise ValueError(f"samples must have shape ({len(x)}, {dim}, {dim})")
    q = np.stack([_as_herm_matrix(q[i], dim, f"sample {i}") for i in range(len(x))])

    slopes = 0.5 * (q[:-1] + q[1:])                        # (n-1, m, m)
    dx = np.diff(x)[:, None, None]
    nodes = np.concatenate(
        [np.zeros((1, dim, dim), dtype=complex), np.cumsum(slopes * dx, axis=0)]
    )
    coefficients = []
    for i in range(len(x) - 1):
        # Q(t) = nodes[i] + slopes[i] * (t - x[i]) rewritten in global t
        c0 = nodes[i] - slopes[i] * x[i]
        coefficients.append([c0, slopes[i]])
    return from_polynomial_pieces(x, coefficients, dim=dim)


def _validate_jumps(jumps, dim: int):
    locs, mats = [], []
    for loc, mat in jumps:
        locs.append(float(loc))
        mats.append(_as_herm_matrix(mat, dim, f"jump at {loc}"))
    locs = np.asarray(locs, dtype=float)
    if len(locs) != len(np.unique(locs)):
        raise ValueError("jump locations must be distinct")
    order = np.argsort(locs)
    if len(locs):
        return locs[order], np.stack(mats)[order]
    return locs, np.empty((0, dim, dim), dtype=complex)
