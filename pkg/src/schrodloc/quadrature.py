"""Composite Gauss-Legendre rules on breakpoint-aligned panels.

One rule object is shared by every integral entering an identity check,
so that algebraically equal integrands cancel to rounding error.
"""

from __future__ import annotations

import numpy as np

__all__ = ["panel_rule", "gauss_rule"]

_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def gauss_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes/weights on [-1, 1], cached per order."""
    if order not in _CACHE:
        _CACHE[order] = np.polynomial.legendre.leggauss(order)
    return _CACHE[order]


def panel_rule(a: float, b: float, breaks=(), max_width: float | None = None,
               order: int = 12) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of a composite Gauss rule on (a, b).

    Panel edges include every entry of ``breaks`` inside (a, b); panels
    wider than ``max_width`` are split uniformly.
    """
    if not b > a:
        raise ValueError(f"empty interval ({a}, {b})")
    edges = [a, b]
    for t in np.atleast_1d(np.asarray(breaks, dtype=float)):
        if a < t < b:
            edges.append(float(t))
    edges = np.unique(np.asarray(edges, dtype=float))
    if max_width is not None and max_width > 0:
        refined = []
        for lo, hi in zip(edges[:-1], edges[1:]):
            nsub = max(1, int(np.ceil((hi - lo) / max_width)))
            refined.append(np.linspace(lo, hi, nsub + 1)[:-1])
        edges = np.concatenate(refined + [edges[-1:]])
    t, w = gauss_rule(order)
    lo = edges[:-1]
    half = 0.5 * np.diff(edges)
    x = (lo[:, None] + half[:, None] * (t[None, :] + 1.0)).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return x, wt
