"""Cauchy-Stieltjes evaluation, spectral density and support of the measure at 1/2.

Notation: ``c = alpha + beta``.  For real ``z`` the auxiliary functions are

    P*(z) = z/2 + sign(z)/2 * sqrt(z^2 - 4c^2)
    Q*(z) = z/2 + beta + sign(z - 2 beta)/2 * sqrt((z - 2 beta)^2 - 4 alpha^2)

with the root of positive imaginary part when the radicand is negative.  V is
the root of

    beta^4 v^3 + (P* + Q*) beta^2 v^2 + (P* Q* + beta^2 - alpha^2) v + P* = 0

with positive imaginary part, and the Stieltjes transform is W = V / (beta V + 1)^2.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from fractions import Fraction
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import roots_legendre

from .cardano import cubic_residuals, cubic_roots, real_cubic_discriminant
from .errors import DiagnosticError, DomainError, InvariantViolation, PreconditionError
from .series import TruncatedSeries, appendix_series

IMAG_TOL = 1e-9
EPS_LADDER = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
SCAN_POINTS = 4096


@dataclass(frozen=True)
class BranchedValue:
    value: complex
    branch: str  # "sign_z", "sign_z_minus_2beta", "positive_imag" or "analytic"


@dataclass(frozen=True)
class CubicRoots:
    roots: tuple[complex, complex, complex]
    selected: int | None
    residuals: tuple[float, ...] = ()

    @property
    def value(self) -> complex | None:
        return None if self.selected is None else self.roots[self.selected]


def _params(alpha, beta) -> tuple[float, float]:
    a, b = float(alpha), float(beta)
    if not (math.isfinite(a) and math.isfinite(b)):
        raise DomainError("alpha and beta must be finite reals")
    return a, b


# ---------------------------------------------------------------------------
# P*, Q*


def _r_star(c: float, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Branch of ``w/2 + sqrt(w^2/4 - c^2)`` behaving like ``w`` at infinity.

    Returns values and a boolean array telling where the positive-imaginary
    rule fired (real ``w`` inside ``(-2|c|, 2|c|)``).
    """
    w = np.asarray(w, dtype=complex)
    out = np.empty_like(w)
    real = w.imag == 0
    x = w.real
    rad = x * x - 4 * c * c
    pos = real & (rad >= 0)
    out[pos] = x[pos] / 2 + np.sign(x[pos]) * np.sqrt(rad[pos]) / 2
    neg = real & (rad < 0)
    out[neg] = x[neg] / 2 + 0.5j * np.sqrt(-rad[neg])
    up = ~real
    if np.any(w.imag < 0):
        raise DomainError("z must lie in the closed upper half-plane")
    wu = w[up]
    out[up] = wu / 2 + wu / 2 * np.sqrt(1 - 4 * c * c / (wu * wu))
    return out, neg


def pq_star_arrays(alpha, beta, z) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    a, b = _params(alpha, beta)
    z = np.asarray(z, dtype=complex)
    p, p_imag = _r_star(a + b, z)
    q, q_imag = _r_star(a, z - 2 * b)
    return p, q + 2 * b, p_imag, q_imag


def eval_pq_star(alpha, beta, z: complex) -> tuple[BranchedValue, BranchedValue]:
    z = complex(z)
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    p, q, pi, qi = pq_star_arrays(alpha, beta, np.array([z]))
    if z.imag > 0:
        return BranchedValue(complex(p[0]), "analytic"), BranchedValue(complex(q[0]), "analytic")
    return (
        BranchedValue(complex(p[0]), "positive_imag" if pi[0] else "sign_z"),
        BranchedValue(complex(q[0]), "positive_imag" if qi[0] else "sign_z_minus_2beta"),
    )


# ---------------------------------------------------------------------------
# V and W


def cubic_coefficient_arrays(alpha, beta, p, q):
    a, b = _params(alpha, beta)
    b2 = b * b
    return (np.full_like(p, b2 * b2), (p + q) * b2, p * q + (b2 - a * a), p)


def _select(roots: np.ndarray, upper: np.ndarray, tol: float) -> np.ndarray:
    """Index of the root with Im > tol (-1 if none); argmax Im off the real axis."""
    im = roots.imag
    count = (im > tol).sum(axis=-1)
    if np.any(count > 1):
        bad = np.argwhere(count > 1).ravel()[:3]
        raise InvariantViolation(f"two cubic roots with positive imaginary part at samples {bad.tolist()}")
    best = np.argmax(im, axis=-1)
    best_im = np.take_along_axis(im, best[..., None], axis=-1)[..., 0]
    ok = (count == 1) | (upper & (best_im > 0))
    return np.where(ok, best, -1)


def v_arrays(alpha, beta, z, tol: float = IMAG_TOL):
    """Vectorised V: returns ``(V, selected_mask, roots)``; ``V`` is NaN where no root qualifies."""
    a, b = _params(alpha, beta)
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    p, q, _, _ = pq_star_arrays(a, b, z)
    if b == 0:
        v = p / (a * a - p * p)
        roots = np.stack([v, np.full_like(v, np.nan), np.full_like(v, np.nan)], axis=-1)
        sel = (v.imag > tol) | ((z.imag > 0) & (v.imag > 0))
        return np.where(sel, v, v), sel, roots
    coeffs = cubic_coefficient_arrays(a, b, p, q)
    roots = cubic_roots(*coeffs)
    idx = _select(roots, z.imag > 0, tol)
    v = np.take_along_axis(roots, np.maximum(idx, 0)[..., None], axis=-1)[..., 0]
    return np.where(idx >= 0, v, np.nan + 0j), idx >= 0, roots


def eval_v(alpha, beta, z: complex, tol: float = IMAG_TOL) -> CubicRoots:
    a, b = _params(alpha, beta)
    z = complex(z)
    if z.imag < 0:
        raise DomainError("z must lie in the closed upper half-plane")
    if b == 0:
        raise PreconditionError("beta = 0: the cubic degenerates; use v_beta_zero")
    p, q, _, _ = pq_star_arrays(a, b, np.array([z]))
    coeffs = cubic_coefficient_arrays(a, b, p, q)
    roots = cubic_roots(*coeffs)
    idx = _select(roots, np.array([z.imag > 0]), tol)[0]
    res = cubic_residuals(coeffs, roots)[0]
    return CubicRoots(tuple(complex(r) for r in roots[0]), None if idx < 0 else int(idx), tuple(float(r) for r in res))


def v_beta_zero(alpha, z: complex) -> complex:
    """Closed form ``V = P* / (alpha^2 - P*^2)`` for ``beta = 0``."""
    p, _, _, _ = pq_star_arrays(alpha, 0.0, np.array([complex(z)]))
    return complex(p[0] / (alpha * alpha - p[0] * p[0]))


def w_from_v(beta, v):
    return v / (beta * v + 1) ** 2


def stieltjes_w(alpha, beta, z):
    """``W(z)``, the Stieltjes transform of the measure at 1/2, for ``Im z > 0`` (vectorised)."""
    v, sel, _ = v_arrays(alpha, beta, z)
    return w_from_v(float(beta), v)


def density(alpha, beta, z) -> np.ndarray:
    """``Im W(z) / pi`` at real ``z`` (0 where no root has positive imaginary part)."""
    z = np.atleast_1d(np.asarray(z, dtype=float))
    v, sel, _ = v_arrays(alpha, beta, z.astype(complex))
    w = w_from_v(float(beta), np.where(sel, v, 0))
    return np.where(sel, np.maximum(w.imag, 0.0) / np.pi, 0.0)


def density_eps(alpha, beta, z, eps: float) -> np.ndarray:
    """``Im W(z + i eps) / pi``."""
    w = stieltjes_w(alpha, beta, np.asarray(z, dtype=float) + 1j * eps)
    return w.imag / np.pi


def richardson_limit(alpha, beta, z, ladder: Sequence[float] = EPS_LADDER):
    """Limit of ``Im W(z + i eps)/pi`` as eps -> 0 from the three smallest rungs.

    Returns ``(limit, monotone)`` where ``monotone`` says the successive
    differences along the ladder shrink.
    """
    ladder = sorted(ladder, reverse=True)
    if len(ladder) < 3:
        raise PreconditionError("eps ladder needs at least three rungs")
    vals = np.stack([density_eps(alpha, beta, z, e) for e in ladder])
    e1, e2, e3 = ladder[-3:]
    d1, d2, d3 = vals[-3:]
    # quadratic through (e_k, d_k) evaluated at 0
    l1 = e2 * e3 / ((e1 - e2) * (e1 - e3))
    l2 = e1 * e3 / ((e2 - e1) * (e2 - e3))
    l3 = e1 * e2 / ((e3 - e1) * (e3 - e2))
    limit = l1 * d1 + l2 * d2 + l3 * d3
    diffs = np.abs(np.diff(vals, axis=0))
    monotone = np.all(diffs[1:] <= diffs[:-1] + 1e-14, axis=0)
    return limit, monotone


def special_points(alpha, beta) -> list[float]:
    a, b = _params(alpha, beta)
    c = a + b
    pts = {2 * c, -2 * c, 2 * b + 2 * a, 2 * b - 2 * a, 0.0}
    return sorted(pts)


# ---------------------------------------------------------------------------
# density curves


@dataclass
class SpectralDensityCurve:
    alpha: float
    beta: float
    z: np.ndarray
    density: np.ndarray
    v: np.ndarray
    branch: list[str]
    route_limit: np.ndarray | None = None
    route_checked: np.ndarray | None = None
    route_max_deviation: float | None = None
    flagged: list[int] = field(default_factory=list)

    def rows(self):
        for k, zk in enumerate(self.z):
            v = self.v[k]
            yield (float(zk), float(self.density[k]), float(np.nan_to_num(v.real)), float(np.nan_to_num(v.imag)), self.branch[k])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["z", "density", "re_v", "im_v", "branch"])
        for z, d, re, im, br in self.rows():
            w.writerow([f"{z:.15g}", f"{d:.15g}", f"{re:.15g}", f"{im:.15g}", br])
        return buf.getvalue()

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "route_max_deviation": self.route_max_deviation,
            "flagged": self.flagged,
            "samples": [
                {"z": z, "density": d, "re_v": re, "im_v": im, "branch": br} for z, d, re, im, br in self.rows()
            ],
        }


def _branch_flags(alpha, beta, z) -> list[str]:
    _, _, pi, qi = pq_star_arrays(alpha, beta, z.astype(complex))
    return [f"P:{'imag' if a else 'sign'},Q:{'imag' if b else 'sign'}" for a, b in zip(pi, qi)]


def density_curve(
    alpha,
    beta,
    grid,
    eps_ladder: Sequence[float] = EPS_LADDER,
    check_routes: bool = True,
    route_tol: float = 1e-6,
    margin: float = 1e-3,
) -> SpectralDensityCurve:
    """Density on ``grid`` plus an independent epsilon-limit check of the same numbers.

    Samples closer than ``margin`` to a support endpoint or branch point are
    left out of the route comparison (root labels are not continuous there).
    """
    a, b = _params(alpha, beta)
    z = np.asarray(grid, dtype=float)
    if not np.all(np.isfinite(z)):
        raise DomainError("grid must be finite")
    v, sel, _ = v_arrays(a, b, z.astype(complex))
    dens = density(a, b, z)
    flagged = []
    if b != 0:
        near = np.abs(b * np.where(sel, v, 0) + 1) < 1e-9
        flagged = np.flatnonzero(near & sel).tolist()
    curve = SpectralDensityCurve(a, b, z, dens, v, _branch_flags(a, b, z), flagged=flagged)
    if not check_routes:
        return curve
    supp = support(a, b)
    avoid = np.array(special_points(a, b) + [e for iv in supp.intervals for e in iv])
    far = np.min(np.abs(z[:, None] - avoid[None, :]), axis=1) > margin
    inside = np.array([supp.contains(x) for x in z])
    mask = far & inside
    limit = np.full(z.shape, np.nan)
    if mask.any():
        lim, _ = richardson_limit(a, b, z[mask], eps_ladder)
        limit[mask] = lim
        dev = float(np.max(np.abs(lim - dens[mask])))
    else:
        dev = 0.0
    curve.route_limit, curve.route_checked, curve.route_max_deviation = limit, mask, dev
    if dev > route_tol:
        raise DiagnosticError(f"density routes disagree by {dev:.3e} > {route_tol:.1e}")
    return curve


# ---------------------------------------------------------------------------
# support


@dataclass
class SupportDescription:
    intervals: list[tuple[float, float]]
    atoms: list[tuple[float, float]]
    endpoint_certificates: list[dict]

    def contains(self, z: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= z <= hi + tol for lo, hi in self.intervals) or any(
            abs(z - a) <= tol for a, _ in self.atoms
        )

    def gaps(self, lo: float, hi: float) -> list[tuple[float, float]]:
        out, cur = [], lo
        for a, b in self.intervals:
            if a > cur:
                out.append((cur, a))
            cur = max(cur, b)
        if cur < hi:
            out.append((cur, hi))
        return out

    def to_json(self) -> dict:
        return {
            "intervals": [list(iv) for iv in self.intervals],
            "atoms": [{"location": z, "mass": m} for z, m in self.atoms],
            "endpoint_certificates": self.endpoint_certificates,
        }


def discriminant(alpha, beta, z) -> np.ndarray:
    """Discriminant of the real cubic at real ``z`` outside the P*/Q* band regions."""
    a, b = _params(alpha, beta)
    z = np.asarray(z, dtype=float)
    p, q, _, _ = pq_star_arrays(a, b, z.astype(complex))
    a3, a2, a1, a0 = (np.real(x) for x in cubic_coefficient_arrays(a, b, p, q))
    return real_cubic_discriminant(a3, a2, a1, a0)


def _in_bands(a, b, z):
    z = np.asarray(z, dtype=float)
    return (np.abs(z) < 2 * abs(a + b)) | (np.abs(z - 2 * b) < 2 * abs(a))


def support(alpha, beta, tol: float = 1e-13, scan_points: int = SCAN_POINTS, find_point_masses: bool = True) -> SupportDescription:
    """Closure of ``{|z| < 2|a+b|} U {|z - 2b| < 2|a|} U {D(z) < 0}`` plus real poles of W.

    ``D`` changes sign only at finitely many points; they are bracketed on a
    uniform scan and refined with Brent's method.
    """
    a, b = _params(alpha, beta)
    if a == 0 and b == 0:
        return SupportDescription([(0.0, 0.0)], [], [{"z": 0.0, "kind": "zero operator", "residual": 0.0}])
    big = 2 * (abs(a) + abs(b))
    band_ends = {2 * abs(a + b): "|z|=2|a+b|", -2 * abs(a + b): "|z|=2|a+b|"}
    if a != 0:
        band_ends.setdefault(2 * b + 2 * abs(a), "|z-2b|=2|a|")
        band_ends.setdefault(2 * b - 2 * abs(a), "|z-2b|=2|a|")
    grid = np.union1d(np.linspace(-big, big, scan_points), list(band_ends))
    breaks: dict[float, dict] = {z: {"z": z, "kind": k, "residual": 0.0, "exact": True} for z, k in band_ends.items()}
    if b != 0:
        real_dom = ~_in_bands(a, b, grid)
        dvals = discriminant(a, b, grid)
        scale = np.max(np.abs(dvals[real_dom])) if real_dom.any() else 1.0

        def dfun(x):
            return float(discriminant(a, b, np.array([x]))[0])

        for i in range(len(grid) - 1):
            if not (real_dom[i] and real_dom[i + 1]):
                continue
            lo, hi = grid[i], grid[i + 1]
            if dvals[i] == 0:
                breaks.setdefault(lo, {"z": lo, "kind": "D=0", "residual": 0.0, "exact": True})
                continue
            if dvals[i] * dvals[i + 1] < 0:
                try:
                    r = brentq(dfun, lo, hi, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=200)
                    exact = True
                except (RuntimeError, ValueError):
                    r, exact = (lo + hi) / 2, False
                breaks[r] = {
                    "z": r,
                    "kind": "D=0",
                    "residual": abs(dfun(r)) / scale,
                    "bracket": [lo, hi],
                    "exact": exact,
                }
    pts = sorted(p for p in breaks if -big - 1e-12 <= p <= big + 1e-12)
    pts = sorted(set([-big] + pts + [big]))
    cells = []
    for lo, hi in zip(pts[:-1], pts[1:]):
        mid = (lo + hi) / 2
        inside = bool(_in_bands(a, b, mid)) or (b != 0 and discriminant(a, b, np.array([mid]))[0] < 0)
        cells.append((lo, hi, inside))
    intervals: list[list[float]] = []
    for lo, hi, inside in cells:
        if not inside:
            continue
        if intervals and abs(intervals[-1][1] - lo) <= 0:
            intervals[-1][1] = hi
        else:
            intervals.append([lo, hi])
    ivs = [(float(lo), float(hi)) for lo, hi in intervals]
    certs = [breaks[e] for iv in ivs for e in iv if e in breaks]
    atoms = find_atoms(a, b, SupportDescription(ivs, [], certs).gaps(-big, big)) if find_point_masses else []
    return SupportDescription(ivs, atoms, certs)


def _inverse_w_real(a, b, z: np.ndarray, eta: float = 1e-9) -> np.ndarray:
    """``1/W`` on gap points, taking V as the real root nearest the continuation from ``z + i eta``."""
    v_up, _, _ = v_arrays(a, b, z + 1j * eta)
    if b == 0:
        v = v_up.real
    else:
        p, q, _, _ = pq_star_arrays(a, b, z.astype(complex))
        roots = cubic_roots(*cubic_coefficient_arrays(a, b, p, q))
        k = np.argmin(np.abs(roots - v_up[:, None]), axis=1)
        v = np.take_along_axis(roots, k[:, None], axis=1)[:, 0].real
    return (b * v + 1) ** 2 / v


def find_atoms(alpha, beta, gaps, samples: int = 2000) -> list[tuple[float, float]]:
    """Real poles of W inside spectral gaps, with masses ``-1/(1/W)'``."""
    a, b = _params(alpha, beta)
    atoms = []
    for lo, hi in gaps:
        if hi - lo < 1e-9:
            continue
        z = np.linspace(lo, hi, samples)[1:-1]
        g = _inverse_w_real(a, b, z)
        for i in np.flatnonzero(np.sign(g[:-1]) * np.sign(g[1:]) < 0):
            f = lambda x: float(_inverse_w_real(a, b, np.array([x]))[0])
            r = brentq(f, z[i], z[i + 1], xtol=1e-14)
            # sign changes through infinity (V = 0) are not poles of W
            if abs(f(r)) > 1e-8:
                continue
            h = 1e-6 * max(1.0, abs(r))
            slope = (f(r + h) - f(r - h)) / (2 * h)
            mass = -1.0 / slope if slope else float("nan")
            if mass > 0:
                atoms.append((r, mass))
    return atoms


# ---------------------------------------------------------------------------
# quadrature


@lru_cache(maxsize=32)
def _legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    return roots_legendre(n)


def _cos_nodes(lo: float, hi: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre in theta for ``z = lo + (hi - lo)(1 - cos theta)/2`` (clusters at both ends)."""
    x, w = _legendre(n)
    theta = (x + 1) * np.pi / 2
    z = lo + (hi - lo) * (1 - np.cos(theta)) / 2
    jac = (hi - lo) / 2 * np.sin(theta) * np.pi / 2
    return z, w * jac


def quadrature_breakpoints(alpha, beta, supp: SupportDescription) -> list[tuple[float, float]]:
    pts = special_points(alpha, beta)
    pieces = []
    for lo, hi in supp.intervals:
        inner = sorted({lo, hi} | {p for p in pts if lo < p < hi})
        pieces.extend(zip(inner[:-1], inner[1:]))
    return [(lo, hi) for lo, hi in pieces if hi > lo]


@dataclass(frozen=True)
class QuadratureMoments:
    moments: tuple[float, ...]
    atom_contribution: tuple[float, ...]
    nodes_per_piece: int
    change: float

    @property
    def total_mass(self) -> float:
        return self.moments[0]


def measure_moments(alpha, beta, n_max: int, supp: SupportDescription | None = None, rtol: float = 1e-13, max_nodes: int = 8192) -> QuadratureMoments:
    """``int z^n dmu`` for ``n <= n_max`` (atoms included), doubling nodes until stable."""
    a, b = _params(alpha, beta)
    if supp is None:
        supp = support(a, b)
    pieces = quadrature_breakpoints(a, b, supp)
    big = 2 * (abs(a) + abs(b)) or 1.0
    powers = np.arange(n_max + 1)

    def moments(n):
        acc = np.zeros(n_max + 1)
        for lo, hi in pieces:
            z, w = _cos_nodes(lo, hi, n)
            d = density(a, b, z)
            acc += ((z / big)[None, :] ** powers[:, None] * (w * d)[None, :]).sum(axis=1)
        return acc

    n = 64
    prev = moments(n)
    change = math.inf
    while n < max_nodes:
        n *= 2
        cur = moments(n)
        change = float(np.max(np.abs(cur - prev)))
        prev = cur
        if change < rtol:
            break
    atom_part = np.zeros(n_max + 1)
    for loc, mass in supp.atoms:
        atom_part += mass * (loc / big) ** powers
    scaled = prev + atom_part
    return QuadratureMoments(
        tuple(float(m * big**k) for k, m in enumerate(scaled)),
        tuple(float(m * big**k) for k, m in enumerate(atom_part)),
        n,
        change,
    )


def integrate_density(alpha, beta, lo: float, hi: float, n: int = 2048) -> float:
    """``mu((lo, hi])`` of the absolutely continuous part, splitting at special points."""
    a, b = _params(alpha, beta)
    cuts = sorted({lo, hi} | {p for p in special_points(a, b) if lo < p < hi})
    total = 0.0
    for x0, x1 in zip(cuts[:-1], cuts[1:]):
        z, w = _cos_nodes(x0, x1, n)
        total += float(np.sum(w * density(a, b, z)))
    return total


# ---------------------------------------------------------------------------
# series route


def norm_bound_from_series(p_series: TruncatedSeries) -> float:
    """Crude bound ``limsup |p_n|^(1/n)`` estimate used only as a sanity default."""
    vals = [abs(complex(c)) for c in p_series.coeffs[1:]]
    return max((v ** (1 / k) for k, v in enumerate(vals, 1) if v), default=0.0)


def stieltjes_of_graph_series(p_series: TruncatedSeries, z: complex, bound: float) -> complex:
    """``-z^-1 P(1/z)`` by partial sums; requires ``|z| > bound`` where ``bound >= ||H||``.

    The neglected tail is at most ``r^(N+1) / (|z| (1 - r))`` with ``r = bound/|z|``.
    """
    z = complex(z)
    if abs(z) <= bound:
        raise DomainError(f"|z| = {abs(z):.6g} is inside the norm bound {bound:.6g}")
    return complex(-p_series.evaluate(1 / z) / z)


def series_tail_bound(order: int, z: complex, bound: float) -> float:
    r = bound / abs(z)
    return r ** (order + 1) / (abs(z) * (1 - r))


# ---------------------------------------------------------------------------
# appendix graphs


def _exact_sqrt(x: Fraction) -> Fraction | None:
    n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
    return Fraction(n, d) if n * n == x.numerator and d * d == x.denominator else None


def f_gamma_exact(t: Fraction) -> Fraction:
    """``4t + (1 - sqrt(1 - 4t^2))/2`` at a rational point where the root is rational."""
    r = _exact_sqrt(1 - 4 * t * t)
    if r is None:
        raise DomainError(f"1 - 4t^2 is not a rational square at t = {t}")
    return 4 * t + (1 - r) / 2


def f_gamma(t):
    return 4 * t + (1 - np.sqrt(1 - 4 * t * t + 0j)) / 2


def f_gamma_tilde(t):
    r = np.sqrt(1 - 4 * t * t + 0j)
    return (5 - r - 2 * np.sqrt(2 - 52 * t * t + 2 * r)) / 6


def appendix_spectra() -> dict:
    """Spectra of the half-line, the half-line with loops, and the tree with rays."""
    # the half-line with two loops: 1 - F(t) vanishes at t = 4/17
    t0 = Fraction(4, 17)
    f_at = f_gamma_exact(t0)
    r0 = _exact_sqrt(1 - 4 * t0 * t0)
    f_prime = 4 + 2 * t0 / r0
    mass_exact = 1 / (t0 * f_prime)

    def s_gamma(z):
        return -1 / (z * (1 - f_gamma(1 / z)))

    pole = 1 / t0
    # find the real pole of S beyond the band from scratch
    gap = np.linspace(2 + 1e-9, 8.0, 4001)
    denom = (1 - f_gamma(1 / gap)).real
    hits = np.flatnonzero(np.sign(denom[:-1]) * np.sign(denom[1:]) < 0)
    detected = [brentq(lambda z: (1 - f_gamma(1 / z)).real, gap[i], gap[i + 1], xtol=1e-15) for i in hits]
    hs = [1e-3, 5e-4, 2.5e-4]
    vals = [((float(pole) - (float(pole) + h)) * s_gamma(float(pole) + h)).real for h in hs]
    # linear extrapolation in h of (a - z) S(z)
    mass_residue = 2 * vals[2] - vals[1]
    eig = 4.0 ** -np.arange(1, 200)
    mass_vector = eig[0] ** 2 / np.sum(eig**2)

    # the tree with rays: edge where 2 - 52t^2 + 2 sqrt(1 - 4t^2) = 0, i.e. 676 t^4 - 48 t^2 = 0
    roots = np.roots([676, 0, -48, 0, 0])
    t_edge = float(max(r.real for r in roots if abs(r.imag) < 1e-12))
    z_edge = 1 / t_edge
    z_edge_closed = 13 * math.sqrt(3) / 6
    # boundary values are real outside the edge and non-real inside
    probe_out = [f_gamma_tilde(1 / z) for z in (z_edge * 1.001, 4.25, 10.0)]
    probe_in = [f_gamma_tilde(1 / z + 0j) for z in (z_edge * 0.999, 3.0, 2.5)]
    real_outside = all(abs(v.imag) < 1e-12 for v in probe_out)
    complex_inside = all(abs(v.imag) > 1e-12 for v in probe_in)
    t_scan = np.linspace(1e-6, t_edge, 20001)
    no_pole_tilde = bool(np.all(np.abs(1 - f_gamma_tilde(t_scan)) > 1e-6))
    tilde_interval = (-z_edge, z_edge)
    in_tilde = tilde_interval[0] <= float(pole) <= tilde_interval[1]
    return {
        "gamma_n": {"intervals": [(-2.0, 2.0)], "atoms": []},
        "gamma_loops": {
            "intervals": [(-2.0, 2.0)],
            "atoms": [(float(pole), float(mass_exact))],
            "F_at_4_17": f_at,
            "pole": pole,
            "poles_detected": detected,
            "mass_exact": mass_exact,
            "mass_residue": float(mass_residue),
            "mass_eigenvector": float(mass_vector),
        },
        "gamma_tilde": {
            "intervals": [tilde_interval],
            "atoms": [],
            "t_edge": t_edge,
            "edge": z_edge,
            "edge_closed_form": z_edge_closed,
            "edge_error": abs(z_edge - z_edge_closed),
            "real_outside": real_outside,
            "complex_inside": complex_inside,
            "no_pole": no_pole_tilde,
        },
        "pole_in_gamma_tilde_spectrum": in_tilde,
        "conclusion": f"sigma(Gamma) ⊄ sigma(GammaTilde): {float(pole):g} > {z_edge:.4f}…",
    }


def appendix_series_check(order: int = 20) -> bool:
    from .graphs import appendix_graphs
    from .series import moments_bruteforce

    table = appendix_series(order)
    radius = -(-order // 2)
    return all(
        list(table[k][1]) == list(moments_bruteforce(appendix_graphs(k, radius), order).values)
        for k in ("gamma_n", "gamma_loops", "gamma_tilde")
    )


def dumps(obj) -> str:
    def default(o):
        if isinstance(o, Fraction):
            return f"{o.numerator}/{o.denominator}"
        if isinstance(o, (np.floating, np.integer)):
            return o.item()
        if isinstance(o, np.bool_):
            return bool(o)
        raise TypeError(type(o))

    return json.dumps(obj, default=default, sort_keys=True)
