"""Vectorised Cardano formula for complex cubics, with Newton polishing."""

from __future__ import annotations

import numpy as np

_XI = np.exp(2j * np.pi / 3)


def cubic_roots(a3, a2, a1, a0, polish: int = 2) -> np.ndarray:
    """Roots of ``a3 v^3 + a2 v^2 + a1 v + a0`` (broadcast over arrays), shape ``(..., 3)``.

    Uses the depressed-cubic quantities D0 = b^2 - 3c and D1 = 2b^3 - 9bc + 27d,
    choosing the square-root sign that maximises |C| to avoid cancellation.
    """
    a3, a2, a1, a0 = np.broadcast_arrays(*(np.asarray(x, dtype=complex) for x in (a3, a2, a1, a0)))
    b, c, d = a2 / a3, a1 / a3, a0 / a3
    d0 = b * b - 3 * c
    d1 = 2 * b**3 - 9 * b * c + 27 * d
    disc = np.sqrt(d1 * d1 - 4 * d0**3)
    plus, minus = (d1 + disc) / 2, (d1 - disc) / 2
    big = np.where(np.abs(plus) >= np.abs(minus), plus, minus)
    cc = big ** (1 / 3)
    roots = np.empty(b.shape + (3,), dtype=complex)
    triple = np.abs(cc) == 0
    safe = np.where(triple, 1, cc)
    for k in range(3):
        ck = safe * _XI**k
        r = -(b + ck + d0 / ck) / 3
        roots[..., k] = np.where(triple, -b / 3, r)
    for _ in range(polish):
        v = roots
        f = ((v + b[..., None]) * v + c[..., None]) * v + d[..., None]
        df = (3 * v + 2 * b[..., None]) * v + c[..., None]
        step = np.where(np.abs(df) > 1e-300, f / np.where(df == 0, 1, df), 0)
        # keep the polish only where it does not make things worse
        cand = v - step
        fc = ((cand + b[..., None]) * cand + c[..., None]) * cand + d[..., None]
        roots = np.where(np.abs(fc) <= np.abs(f), cand, v)
    return roots


def cubic_residuals(coeffs, roots) -> np.ndarray:
    """``|p(v)| / (sum_k |a_k| |v|^k)`` for each root (relative residual)."""
    a3, a2, a1, a0 = (np.asarray(c, dtype=complex)[..., None] for c in coeffs)
    v = roots
    val = ((a3 * v + a2) * v + a1) * v + a0
    av = np.abs(v)
    scale = ((np.abs(a3) * av + np.abs(a2)) * av + np.abs(a1)) * av + np.abs(a0)
    return np.abs(val) / np.where(scale == 0, 1, scale)


def real_cubic_discriminant(a, b, c, d):
    """``18abcd - 4b^3 d + b^2 c^2 - 4ac^3 - 27a^2 d^2`` (negative iff a complex pair)."""
    return 18 * a * b * c * d - 4 * b**3 * d + b * b * c * c - 4 * a * c**3 - 27 * a * a * d * d
