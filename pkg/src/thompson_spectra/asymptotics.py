"""Square-root edge behaviour for alpha = beta = 1/4.

Near ``t = +1`` write ``t = 1 - s^2`` and near ``t = -1`` write ``t = s^2 - 1``.
Then ``x(t) = C1 + C2 s + O(s^2)`` and ``x(t) = C3 + C4 s + O(s^2)``; pushing
these through ``P = 1/(beta^2 t^2 x + 1/x - 2 beta t)`` gives
``P = C1t + C2t s + ...`` and ``P = C3t + C4t s + ...``.

Singularity transfer turns ``sqrt(1 - t)`` into ``-n^(-3/2) / (2 sqrt(pi))``,
so the return probabilities behave like

    p_{2n}   ~ -(C2t + C4t) / (4 sqrt(2 pi)) * n^(-3/2)
    p_{2n+1} ~ -(C2t - C4t) / (4 sqrt(2 pi)) * n^(-3/2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import InvariantViolation, PreconditionError
from .series import solve_cubic_series, upsilon_series
from .stieltjes import density, integrate_density

ALPHA = BETA = 0.25
SQ2 = math.sqrt(2)


@dataclass(frozen=True)
class EdgeExpansion:
    edge: int
    c0: float
    c1: float
    roots_at_edge: tuple[float, ...]
    slopes: tuple[float, ...]
    d_dx: float


@dataclass(frozen=True)
class EdgeConstants:
    C1: float
    C2: float
    C3: float
    C4: float
    C1t: float
    C2t: float
    C3t: float
    C4t: float
    plus: EdgeExpansion
    minus: EdgeExpansion

    @property
    def transfer_even(self) -> float:
        """Leading constant of ``p_{2n} n^(3/2)`` from singularity transfer."""
        return -(self.C2t + self.C4t) / (4 * math.sqrt(2 * math.pi))

    @property
    def transfer_odd(self) -> float:
        return -(self.C2t - self.C4t) / (4 * math.sqrt(2 * math.pi))

    @property
    def half_sum(self) -> float:
        """``-(C2t + C4t)/2``, the constant as printed next to the n^(-3/2) law."""
        return -(self.C2t + self.C4t) / 2

    @property
    def edge_mass_constant(self) -> float:
        """``-(2/(3 pi)) C2t``: ``mu((1 - s, 1]) ~ this * s^(3/2)``."""
        return -2 * self.C2t / (3 * math.pi)

    def as_dict(self) -> dict:
        keys = ("C1", "C2", "C3", "C4", "C1t", "C2t", "C3t", "C4t")
        out = {k: getattr(self, k) for k in keys}
        out.update(
            C1_closed="4(2-sqrt2)",
            C3_closed="6+2sqrt2-2sqrt(11+2sqrt2)",
            transfer_even=self.transfer_even,
            transfer_odd=self.transfer_odd,
            half_sum=self.half_sum,
            edge_mass_constant=self.edge_mass_constant,
        )
        return out


def _coefficients(edge: int, s: float = 0.0):
    """Cubic coefficients ``(a3, a2, a1, a0)`` and their s-derivatives at ``s`` (alpha = beta = 1/4)."""
    b = BETA
    t = edge * (1 - s * s)
    dt = -2 * edge * s
    r = math.sqrt(max(1 - t * t, 0.0))
    p = -0.5 - 0.5 * r
    # d/ds sqrt(1 - t^2) = s sqrt(2 - s^2) derivative, written out
    dr = math.sqrt(2 - s * s) - s * s / math.sqrt(2 - s * s)
    dp = -0.5 * dr
    if edge == 1:
        q = -0.5 - b * t - 0.5 * s
        dq = -b * dt - 0.5
    else:
        rq = math.sqrt(1 - 4 * b * t)
        q = -0.5 - b * t - 0.5 * rq
        dq = -b * dt + 0.5 * (4 * b * dt) / (2 * rq)
    b4 = b**4
    coeffs = (b4 * t**4, (p + q) * b * b * t * t, p * q, p)
    derivs = (4 * b4 * t**3 * dt, (dp + dq) * b * b * t * t + (p + q) * b * b * 2 * t * dt, dp * q + p * dq, dp)
    return coeffs, derivs


def _poly(c, x):
    return ((c[0] * x + c[1]) * x + c[2]) * x + c[3]


def _dpoly(c, x):
    return (3 * c[0] * x + 2 * c[1]) * x + c[2]


def _edge_expansion(edge: int, pick) -> EdgeExpansion:
    coeffs, derivs = _coefficients(edge)
    roots = np.sort(np.roots(coeffs).real)
    slopes = tuple(float(-_poly(derivs, u) / _dpoly(coeffs, u)) for u in roots)
    k = pick(roots, slopes)
    u = float(roots[k])
    return EdgeExpansion(edge, u, slopes[k], tuple(map(float, roots)), slopes, float(_dpoly(coeffs, u)))


def _g(x, t):
    return BETA**2 * t * t * x + 1 / x - 2 * BETA * t


def _g_x(x, t):
    return BETA**2 * t * t - 1 / (x * x)


def edge_constants() -> EdgeConstants:
    """``C1..C4`` for ``x`` and ``C1t..C4t`` for ``P`` at ``t = +-1`` (alpha = beta = 1/4)."""

    def pick_plus(roots, slopes):
        # x increases on [0, 1), so u(s) = x(1 - s^2) must decrease
        neg = [k for k, d in enumerate(slopes) if d < 0]
        if len(neg) != 1:
            raise InvariantViolation(f"expected one decreasing branch at t = 1, got slopes {slopes}")
        return neg[0]

    plus = _edge_expansion(1, pick_plus)

    def pick_minus(roots, slopes):
        below = [k for k, u in enumerate(roots) if u < plus.c0]
        if len(below) != 1:
            raise InvariantViolation(f"expected one root below C1 at t = -1, got {roots}")
        return below[0]

    minus = _edge_expansion(-1, pick_minus)
    c1, c2, c3, c4 = plus.c0, plus.c1, minus.c0, minus.c1
    g1, g3 = _g(c1, 1.0), _g(c3, -1.0)
    return EdgeConstants(
        c1, c2, c3, c4,
        1 / g1, -_g_x(c1, 1.0) * c2 / g1**2,
        1 / g3, -_g_x(c3, -1.0) * c4 / g3**2,
        plus, minus,
    )


def x_real_branch(ts, steps_per_unit: int = 2000) -> np.ndarray:
    """Real root of the cubic continued from ``x(0) = 1`` along ``[0, t]`` (alpha = beta = 1/4)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    out = np.empty_like(ts)
    for sign in (1, -1):
        idx = np.flatnonzero(np.sign(ts) == sign)
        if not len(idx):
            continue
        far = float(np.max(np.abs(ts[idx])))
        path = np.union1d(np.linspace(0.0, far, max(2, int(far * steps_per_unit))), np.abs(ts[idx]))
        x, values = 1.0, {}
        for t in path[1:]:
            roots = np.roots(_cubic_at(sign * t))
            real = roots[np.abs(roots.imag) < 1e-7].real
            x = float(real[np.argmin(np.abs(real - x))])
            values[t] = x
        for i in idx:
            out[i] = values[abs(ts[i])]
    out[ts == 0] = 1.0
    return out


def _cubic_at(t: float):
    b = a = BETA
    q = -0.5 - b * t - 0.5 * math.sqrt(max(1 - 4 * b * t + 4 * (b * b - a * a) * t * t, 0.0))
    p = -0.5 - 0.5 * math.sqrt(max(1 - 4 * (a + b) ** 2 * t * t, 0.0))
    return [b**4 * t**4, (p + q) * b * b * t * t, p * q + (b * b - a * a) * t * t, p]


def root_selection_check(order: int = 60) -> dict:
    """Evidence that the chosen edge roots are the continuation of the series ``x(t)``."""
    if order < 30:
        raise PreconditionError("order must be at least 30")
    const = edge_constants()
    x = solve_cubic_series(Fraction(1, 4), Fraction(1, 4), order)
    nonneg = all(c >= 0 for c in x.coeffs)
    ts = np.linspace(0, 0.999, 400)
    branch = x_real_branch(ts)
    x99, x9999, near_plus, near_minus = map(float, x_real_branch([0.99, 0.9999, 1 - 1e-8, -1 + 1e-8]))
    linear99 = const.C1 + const.C2 * 0.1
    linear9999 = const.C1 + const.C2 * 0.01
    return {
        "x0": x.coeffs[0],
        "coefficients_nonnegative": nonneg,
        "branch_nondecreasing": bool(np.all(np.diff(branch) >= -1e-12)),
        "series_matches_branch": float(abs(float(x.evaluate(Fraction(1, 4))) - x_real_branch([0.25])[0])),
        "x_0.99": x99,
        "linear_0.99": linear99,
        "relative_gap_0.99": abs(x99 - linear99) / abs(linear99),
        "x_0.9999": x9999,
        "relative_gap_0.9999": abs(x9999 - linear9999) / abs(linear9999),
        "x_near_plus1": near_plus,
        "x_near_minus1": near_minus,
        "C1": const.C1,
        "C3": const.C3,
        "roots_plus": const.plus.roots_at_edge,
        "roots_minus": const.minus.roots_at_edge,
        "d_dx_plus": const.plus.d_dx,
        "d_dx_minus": const.minus.d_dx,
    }


@dataclass
class MomentFit:
    window: tuple[int, int]
    exponent: float
    residual_rms: float
    A_hat: float
    B_hat: float
    spread_top_half: float
    A_transfer: float
    B_transfer: float
    A_half_sum: float
    A_extrapolated: float
    B_extrapolated: float
    all_positive: bool
    flagged: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def return_moments(order: int) -> np.ndarray:
    """Float coefficients ``p_0..p_order`` of ``P`` at 1/2 for alpha = beta = 1/4 (FFT Newton)."""
    _, p = upsilon_series(ALPHA, BETA, order)
    return np.asarray(p.coeffs, dtype=float)


def return_probability_fit(n_max: int, n_min: int | None = None, moments: np.ndarray | None = None) -> MomentFit:
    """Log-log fit of ``p_{2n}`` over ``n in [n_min, n_max]`` (default ``n_min = n_max/4``)."""
    if n_max < 500:
        raise PreconditionError("n_max must be at least 500")
    n_min = n_max // 4 if n_min is None else n_min
    p = return_moments(2 * n_max + 1) if moments is None else moments
    n = np.arange(n_min, n_max + 1)
    even, odd = p[2 * n], p[2 * n + 1]
    positive = bool(np.all(even > 0))
    slope, intercept = np.polyfit(np.log(n), np.log(even), 1)
    fitted = slope * np.log(n) + intercept
    rms = float(np.sqrt(np.mean((fitted - np.log(even)) ** 2)))
    scaled_even, scaled_odd = even * n**1.5, odd * n**1.5
    top = n >= (n_min + n_max) / 2
    spread = float((scaled_even[top].max() - scaled_even[top].min()) / scaled_even[top].mean())
    # the next term is O(1/n): eliminate it with the values at n_max and n_max/2
    half = n_max // 2
    a_half = p[2 * half] * half**1.5
    b_half = p[2 * half + 1] * half**1.5
    a_ext = 2 * scaled_even[-1] - a_half
    b_ext = 2 * scaled_odd[-1] - b_half
    const = edge_constants()
    fit = MomentFit(
        (n_min, n_max), float(-slope), rms, float(scaled_even[-1]), float(scaled_odd[-1]), spread,
        const.transfer_even, const.transfer_odd, const.half_sum, float(a_ext), float(b_ext), positive,
    )
    if not 1.45 <= fit.exponent <= 1.55:
        fit.flagged = True
        fit.notes.append(f"fitted exponent {fit.exponent:.4f} outside [1.45, 1.55]")
    if spread > 0.02:
        fit.flagged = True
        fit.notes.append(f"p_2n n^1.5 varies by {100 * spread:.2f}% over the top half")
    return fit


@dataclass
class EdgeDensityFit:
    s_grid: tuple[float, ...]
    masses: tuple[float, ...]
    exponent: float
    C_hat: float
    C_predicted: float
    ratio_spread: float
    flagged: bool = False
    notes: list[str] = field(default_factory=list)

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def edge_mass(s: float, nodes: int = 4096) -> float:
    """``mu((1 - s, 1])`` for alpha = beta = 1/4, by quadrature of the density."""
    return integrate_density(ALPHA, BETA, 1 - s, 1.0, n=nodes)


def integrated_density_edge(s_grid) -> EdgeDensityFit:
    """Fit ``mu((1 - s, 1]) = C s^e`` on ``s_grid``; compare with ``e = 3/2`` and the predicted C."""
    s = np.asarray(sorted(s_grid), dtype=float)
    masses = np.array([edge_mass(x) for x in s])
    slope, intercept = np.polyfit(np.log(s), np.log(masses), 1)
    ratios = density(ALPHA, BETA, 1 - s) / np.sqrt(s)
    spread = float(ratios.max() / ratios.min())
    pred = edge_constants().edge_mass_constant
    fit = EdgeDensityFit(
        tuple(s.tolist()), tuple(masses.tolist()), float(slope), float(math.exp(intercept)), pred, spread
    )
    if not 1.45 <= fit.exponent <= 1.55:
        fit.flagged = True
        fit.notes.append(f"fitted exponent {fit.exponent:.4f} outside [1.45, 1.55]")
    if abs(fit.C_hat / pred - 1) > 0.03:
        fit.flagged = True
        fit.notes.append(f"C_hat / predicted = {fit.C_hat / pred:.4f}")
    return fit
