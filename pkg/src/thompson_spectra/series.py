"""Truncated power series, return-weight moments, and the cubic for x(t)."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Number, Rational
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.signal import fftconvolve

from .errors import DomainError, InvariantViolation, PreconditionError
from .graphs import BallTruncation, RootedWeightedGraph

FFT_THRESHOLD = 256


def _is_exact(x) -> bool:
    return isinstance(x, Rational)


class TruncatedSeries:
    """Coefficients ``c_0..c_N`` of a power series known modulo ``t^(N+1)``.

    Exact mode stores a list of ``Fraction``; float mode stores a numpy array
    (float64 or complex128).  Mixing the two promotes to float.
    """

    __slots__ = ("coeffs", "exact")

    def __init__(self, coeffs, order: int | None = None):
        if isinstance(coeffs, np.ndarray) and coeffs.dtype.kind in "fc":
            arr = coeffs
            exact = False
        else:
            coeffs = list(coeffs)
            exact = all(_is_exact(c) for c in coeffs)
            arr = [Fraction(c) for c in coeffs] if exact else np.asarray(coeffs, dtype=_dtype_of(coeffs))
        n = len(arr) if order is None else order + 1
        if n < 1:
            raise DomainError("a series needs at least one coefficient")
        if len(arr) < n:
            pad = n - len(arr)
            arr = arr + [Fraction(0)] * pad if exact else np.concatenate([arr, np.zeros(pad, arr.dtype)])
        self.coeffs = arr[:n]
        self.exact = exact

    # construction helpers
    @classmethod
    def constant(cls, c, order: int, exact: bool = True):
        return cls([c] if exact and _is_exact(c) else np.array([c], dtype=_dtype_of([c])), order)

    @classmethod
    def variable(cls, order: int, exact: bool = True):
        """The series ``t``."""
        base = [Fraction(0), Fraction(1)] if exact else np.array([0.0, 1.0])
        return cls(base, order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k):
        return self.coeffs[k]

    def __iter__(self):
        return iter(self.coeffs)

    def __repr__(self):
        head = ", ".join(str(c) for c in list(self.coeffs[:6]))
        return f"TruncatedSeries([{head}{', ...' if len(self) > 6 else ''}], order={self.order})"

    def to_float(self, complex_: bool = False) -> TruncatedSeries:
        dt = complex if complex_ else (float if self.exact else self.coeffs.dtype)
        return TruncatedSeries(np.array([complex(c) if complex_ else c for c in self.coeffs], dtype=dt).astype(dt))

    def truncate(self, order: int) -> TruncatedSeries:
        if order > self.order:
            raise PreconditionError(f"series known only to order {self.order}, asked for {order}")
        return TruncatedSeries(self.coeffs[: order + 1])

    def _coerce(self, other) -> TruncatedSeries:
        if isinstance(other, TruncatedSeries):
            if self.exact and not other.exact:
                return other
            return other
        if isinstance(other, Number):
            return TruncatedSeries.constant(other, self.order, exact=self.exact and _is_exact(other))
        return NotImplemented

    def _binary_order(self, other):
        return min(self.order, other.order)

    @staticmethod
    def _promote(a, b):
        if a.exact and b.exact:
            return a.coeffs, b.coeffs, True
        ca = np.asarray([complex(c) for c in a.coeffs]) if a.exact else a.coeffs
        cb = np.asarray([complex(c) for c in b.coeffs]) if b.exact else b.coeffs
        if a.exact and not np.iscomplexobj(cb):
            ca = ca.real
        if b.exact and not np.iscomplexobj(ca):
            cb = cb.real
        return ca, cb, False

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = self._binary_order(other) + 1
        a, b, exact = self._promote(self, other)
        if exact:
            return TruncatedSeries([x + y for x, y in zip(a[:n], b[:n])])
        return TruncatedSeries(a[:n] + b[:n])

    __radd__ = __add__

    def __neg__(self):
        if self.exact:
            return TruncatedSeries([-c for c in self.coeffs])
        return TruncatedSeries(-self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Number) and not isinstance(other, TruncatedSeries):
            if self.exact and _is_exact(other):
                c = Fraction(other)
                return TruncatedSeries([c * x for x in self.coeffs])
            base = self.to_float(isinstance(other, complex)) if self.exact else self
            return TruncatedSeries(base.coeffs * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        n = self._binary_order(other) + 1
        a, b, exact = self._promote(self, other)
        if exact:
            return TruncatedSeries(_exact_mul(a[:n], b[:n], n))
        if n > FFT_THRESHOLD:
            return TruncatedSeries(fftconvolve(a[:n], b[:n])[:n])
        return TruncatedSeries(np.convolve(a[:n], b[:n])[:n])

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, TruncatedSeries):
            return self * other.reciprocal()
        if self.exact and _is_exact(other):
            return self * (1 / Fraction(other))
        return self * (1 / other)

    def __rtruediv__(self, other):
        return self.reciprocal() * other

    def __pow__(self, k: int):
        if k < 0:
            return self.reciprocal() ** (-k)
        out = TruncatedSeries.constant(1, self.order, exact=self.exact)
        if not self.exact:
            out = out.to_float(np.iscomplexobj(self.coeffs))
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, TruncatedSeries):
            return NotImplemented
        return self.order == other.order and all(x == y for x, y in zip(self.coeffs, other.coeffs))

    __hash__ = None

    def shift(self, k: int) -> TruncatedSeries:
        """Multiply by ``t^k`` keeping the same order."""
        zero = Fraction(0) if self.exact else 0
        head = [zero] * k
        if self.exact:
            return TruncatedSeries(head + list(self.coeffs[: len(self) - k]))
        return TruncatedSeries(np.concatenate([np.zeros(k, self.coeffs.dtype), self.coeffs[: len(self) - k]]))

    def derivative(self) -> TruncatedSeries:
        if self.order == 0:
            return TruncatedSeries.constant(0, 0, exact=self.exact)
        if self.exact:
            return TruncatedSeries([k * self.coeffs[k] for k in range(1, len(self))])
        return TruncatedSeries(self.coeffs[1:] * np.arange(1, len(self)))

    def reciprocal(self) -> TruncatedSeries:
        c0 = self.coeffs[0]
        if c0 == 0:
            raise DomainError("reciprocal needs a nonzero constant term")
        y = TruncatedSeries.constant(1 / Fraction(c0) if self.exact else 1 / c0, 0, exact=self.exact)
        prec = 1
        while prec < len(self):
            prec = min(2 * prec, len(self))
            s = self.truncate(prec - 1)
            y = _extend(y, prec)
            y = y * (2 - s * y)
        return y

    def sqrt(self) -> TruncatedSeries:
        """Square root with the branch ``sqrt(c0) > 0`` (``sqrt(1) = 1``)."""
        c0 = self.coeffs[0]
        if self.exact:
            r = _exact_sqrt(Fraction(c0))
        else:
            if c0 == 0:
                raise DomainError("sqrt needs a nonzero constant term")
            r = np.sqrt(c0 + 0j) if np.iscomplexobj(self.coeffs) or c0 < 0 else math.sqrt(c0)
        y = TruncatedSeries.constant(r, 0, exact=self.exact)
        prec = 1
        while prec < len(self):
            prec = min(2 * prec, len(self))
            s = self.truncate(prec - 1)
            y = _extend(y, prec)
            y = (y + s * y.reciprocal()) * Fraction(1, 2) if self.exact else (y + s * y.reciprocal()) * 0.5
        return y

    def compose(self, inner: TruncatedSeries) -> TruncatedSeries:
        """``self(inner(t))`` for ``inner(0) = 0``, by Horner's rule."""
        if inner.coeffs[0] != 0:
            raise DomainError("composition needs inner(0) = 0")
        n = min(self.order, inner.order)
        inner = inner.truncate(n)
        out = TruncatedSeries.constant(self.coeffs[n], n, exact=self.exact)
        for k in range(n - 1, -1, -1):
            out = out * inner + self.coeffs[k]
        return out

    def evaluate(self, t):
        """Partial sum at ``t`` (Horner)."""
        if self.exact and _is_exact(t):
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * t + c
            return acc
        coeffs = np.array([complex(c) for c in self.coeffs]) if self.exact else self.coeffs
        return np.polyval(coeffs[::-1], t)

    def to_json(self) -> list:
        if not self.exact:
            return [float(c) if not isinstance(c, complex) else [c.real, c.imag] for c in self.coeffs.tolist()]
        return [f"{c.numerator}/{c.denominator}" for c in self.coeffs]

    @classmethod
    def from_json(cls, items: Sequence[str]) -> TruncatedSeries:
        return cls([Fraction(s) for s in items])


def _dtype_of(values):
    return complex if any(isinstance(v, complex) or np.iscomplexobj(v) for v in values) else float


def _extend(y: TruncatedSeries, n: int) -> TruncatedSeries:
    return TruncatedSeries(y.coeffs, n - 1)


def _exact_mul(a, b, n):
    # clear denominators so the inner loops run on Python ints
    da = math.lcm(*(c.denominator for c in a))
    db = math.lcm(*(c.denominator for c in b))
    ia = [c.numerator * (da // c.denominator) for c in a]
    ib = [c.numerator * (db // c.denominator) for c in b]
    nz_b = [(j, v) for j, v in enumerate(ib) if v]
    out = [0] * n
    for i, x in enumerate(ia):
        if not x:
            continue
        for j, y in nz_b:
            if i + j >= n:
                break
            out[i + j] += x * y
    d = da * db
    return [Fraction(v, d) for v in out]


def _exact_sqrt(c: Fraction) -> Fraction:
    if c <= 0:
        raise DomainError("exact sqrt needs a positive constant term")
    rn, rd = math.isqrt(c.numerator), math.isqrt(c.denominator)
    if rn * rn != c.numerator or rd * rd != c.denominator:
        raise DomainError(f"constant term {c} has no rational square root")
    return Fraction(rn, rd)


def newton_solve(coeffs: Sequence[TruncatedSeries], x0, order: int) -> TruncatedSeries:
    """Series root of ``sum_k coeffs[k] * x^k = 0`` with ``x(0) = x0``.

    Each Newton step doubles the number of correct coefficients; the
    derivative at ``t = 0`` must be nonzero.
    """
    exact = all(c.exact for c in coeffs) and _is_exact(x0)

    def poly(x, n):
        f = TruncatedSeries.constant(0, n - 1, exact=exact)
        df = TruncatedSeries.constant(0, n - 1, exact=exact)
        for k in range(len(coeffs) - 1, -1, -1):
            df = df * x + f
            f = f * x + coeffs[k].truncate(n - 1)
        return f, df

    x = TruncatedSeries.constant(x0, 0, exact=exact)
    if not exact:
        x = x.to_float(any(np.iscomplexobj(c.coeffs) for c in coeffs if not c.exact))
    f, df = poly(x, 1)
    if abs(complex(f[0])) > (0 if exact else 1e-12):
        raise InvariantViolation(f"x0 = {x0} is not a root at t = 0 (residual {f[0]})")
    if df[0] == 0:
        raise InvariantViolation("Newton derivative is not a unit at t = 0")
    prec = 1
    while prec < order + 1:
        prec = min(2 * prec, order + 1)
        x = _extend(x, prec)
        f, df = poly(x, prec)
        x = x - f * df.reciprocal()
    return x


@dataclass(frozen=True)
class MomentTable:
    graph_id: str
    vertex: object
    values: tuple

    def __post_init__(self):
        if self.values and self.values[0] != 1:
            raise InvariantViolation("p^(0) must be 1")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, n):
        return self.values[n]

    def as_series(self) -> TruncatedSeries:
        return TruncatedSeries(list(self.values))

    def hankel_min_eigenvalue(self) -> float:
        """Smallest eigenvalue of the Hankel matrix of moments (>= 0 up to rounding for measures)."""
        m = (len(self.values) + 1) // 2
        h = np.array([[float(self.values[i + j]) for j in range(m)] for i in range(m)])
        scale = np.max(np.abs(np.diag(h)))
        return float(np.linalg.eigvalsh(h / scale)[0]) if scale else 0.0

    def to_json(self) -> dict:
        vals = [f"{Fraction(v).numerator}/{Fraction(v).denominator}" if _is_exact(v) else float(v) for v in self.values]
        return {"graph": self.graph_id, "vertex": str(self.vertex), "moments": vals}

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def moments_bruteforce(source: BallTruncation | RootedWeightedGraph, n_max: int, vertex=None) -> MomentTable:
    """``p^(n) = (H^n delta_v, delta_v)`` for ``n <= n_max`` by repeated sparse application of H.

    A ball of radius r is exact up to ``n = 2r``; finite graphs are exact at any order.
    Rational weights give exact rationals.
    """
    if n_max < 0:
        raise DomainError("n_max must be non-negative")
    if isinstance(source, BallTruncation):
        need = -(-n_max // 2)
        if source.radius < need:
            raise PreconditionError(f"radius {source.radius} < ceil({n_max}/2) = {need}: moments would be wrong")
        graph = source.graph
    else:
        graph = source
    v0 = graph.root if vertex is None else graph.index[vertex]
    ws = [w for *_, w in graph.edges]
    if all(_is_exact(w) for w in ws):
        values = _exact_moments(graph, v0, n_max)
    else:
        values = _float_moments(graph, v0, n_max)
    return MomentTable(graph.name, graph.labels[v0], tuple(values))


def _distances_from(graph: RootedWeightedGraph, v0: int) -> list[int]:
    if v0 == graph.root:
        return graph.distances
    dist = [-1] * len(graph)
    dist[v0] = 0
    frontier = [v0]
    while frontier:
        nxt = []
        for u in frontier:
            for w in graph.neighbors[u]:
                if dist[w] < 0:
                    dist[w] = dist[u] + 1
                    nxt.append(w)
        frontier = nxt
    return dist


def _exact_moments(graph, v0, n_max):
    den = math.lcm(*(Fraction(w).denominator for *_, w in graph.edges)) if graph.edges else 1
    iw = [(s, d, int(Fraction(w) * den)) for s, d, w in graph.edges]
    dist = _distances_from(graph, v0)
    n = len(graph)
    vec = [0] * n
    vec[v0] = 1
    out = [Fraction(1)]
    for k in range(1, n_max + 1):
        new = [0] * n
        for s, d, w in iw:
            x = vec[s]
            if x:
                new[d] += w * x
        # entries farther than the remaining steps cannot come back
        horizon = n_max - k
        vec = [x if 0 <= dist[i] <= horizon else 0 for i, x in enumerate(new)]
        out.append(Fraction(new[v0], den**k))
    return out


def _float_moments(graph, v0, n_max):
    h = sparse.csr_matrix(graph.matrix())
    vec = np.zeros(len(graph), dtype=h.dtype)
    vec[v0] = 1
    out = [1.0]
    for _ in range(n_max):
        vec = h @ vec
        out.append(vec[v0])
    return out


def _scalar(x, exact):
    return Fraction(x) if exact else x


def _params_exact(*xs) -> bool:
    return all(_is_exact(x) for x in xs)


def qp_series(alpha, beta, order: int, exact: bool | None = None) -> tuple[TruncatedSeries, TruncatedSeries]:
    """Taylor series of ``q`` and ``p`` at 0, both with constant term -1."""
    if order < 0:
        raise DomainError("order must be non-negative")
    if exact is None:
        exact = _params_exact(alpha, beta)
    a, b = _scalar(alpha, exact), _scalar(beta, exact)
    half = Fraction(1, 2) if exact else 0.5
    one = TruncatedSeries.constant(1, order, exact=True)
    if not exact:
        one = one.to_float(isinstance(a, complex) or isinstance(b, complex))
    t = one.shift(1)
    q_rad = one - t * (4 * b) + t.shift(1) * (4 * (b * b - a * a))
    p_rad = one - t.shift(1) * (4 * (a + b) ** 2)
    q = -half * one - t * b - q_rad.sqrt() * half
    p = -half * one - p_rad.sqrt() * half
    return q, p


def cubic_coefficients(alpha, beta, order: int, exact: bool | None = None) -> list[TruncatedSeries]:
    """Series coefficients ``[a0, a1, a2, a3]`` of the cubic satisfied by ``x(t)``."""
    if exact is None:
        exact = _params_exact(alpha, beta)
    a, b = _scalar(alpha, exact), _scalar(beta, exact)
    q, p = qp_series(alpha, beta, order, exact)
    t2 = TruncatedSeries.constant(1, order, exact=True).shift(2)
    if not exact:
        t2 = t2.to_float(np.iscomplexobj(q.coeffs))
    a3 = t2.shift(2) * b**4
    a2 = (p + q) * t2 * b**2
    a1 = p * q + t2 * (b * b - a * a)
    return [p, a1, a2, a3]


def solve_cubic_series(alpha, beta, order: int, exact: bool | None = None) -> TruncatedSeries:
    """The series ``x(t) = P_Delta(t)`` with ``x(0) = 1`` solving the cubic (Newton in the series ring)."""
    if order < 0:
        raise DomainError("order must be non-negative")
    if alpha == 0 and beta == 0:
        raise DomainError("alpha and beta cannot both vanish")
    if exact is None:
        exact = _params_exact(alpha, beta)
    coeffs = cubic_coefficients(alpha, beta, order, exact)
    return newton_solve(coeffs, Fraction(1) if exact else 1.0, order)


def cubic_residual(alpha, beta, x: TruncatedSeries) -> TruncatedSeries:
    coeffs = cubic_coefficients(alpha, beta, x.order, x.exact)
    out = coeffs[3]
    for c in reversed(coeffs[:3]):
        out = out * x + c
    return out


def upsilon_series(alpha, beta, order: int, exact: bool | None = None) -> tuple[TruncatedSeries, TruncatedSeries]:
    """First-return series ``F`` and return series ``P = 1/(1 - F)`` at the vertex 1/2."""
    if exact is None:
        exact = _params_exact(alpha, beta)
    b = _scalar(beta, exact)
    x = solve_cubic_series(alpha, beta, order, exact)
    t = TruncatedSeries.variable(order, exact=True)
    if not exact:
        t = t.to_float(np.iscomplexobj(x.coeffs))
    f = 1 + t * (2 * b) - t.shift(1) * x * b**2 - x.reciprocal()
    p_series = (1 - f).reciprocal()
    return f, p_series


def f_from_p(p_series: TruncatedSeries) -> TruncatedSeries:
    return 1 - p_series.reciprocal()


def appendix_series(order: int) -> dict[str, tuple[TruncatedSeries, TruncatedSeries]]:
    """Exact ``(F, P)`` for the half-line, the half-line with loops, the branch and the tree with rays."""
    one = TruncatedSeries.constant(1, order)
    t = TruncatedSeries.variable(order)
    half = Fraction(1, 2)
    root = (one - t.shift(1) * 4).sqrt()
    f_n = (one - root) * half
    f_gamma = t * 4 + f_n
    # a tree edge followed by a whole branch: 3 g^2 - (1 - F_N) g + t^2 = 0, g(0) = 0
    g = newton_solve([t.shift(1), f_n - 1, one * 3], Fraction(0), order)
    f_tilde = g * 4 + f_n
    out = {}
    for name, f in (("gamma_n", f_n), ("gamma_loops", f_gamma), ("gamma_prime", g), ("gamma_tilde", f_tilde)):
        out[name] = (f, (1 - f).reciprocal())
    return out


def gamma_tilde_closed_form(order: int) -> TruncatedSeries:
    """``(5 - sqrt(1 - 4t^2) - 2 sqrt(2 - 52 t^2 + 2 sqrt(1 - 4t^2))) / 6``."""
    one = TruncatedSeries.constant(1, order)
    t2 = one.shift(2)
    r = (one - t2 * 4).sqrt()
    inner = (one * 2 - t2 * 52 + r * 2).sqrt()
    return (one * 5 - r - inner * 2) * Fraction(1, 6)


def series_from_graph(source, order: int, vertex=None) -> tuple[TruncatedSeries, TruncatedSeries]:
    """``(F, P)`` of a rooted graph from brute-force moments."""
    p_series = moments_bruteforce(source, order, vertex).as_series()
    return f_from_p(p_series), p_series
