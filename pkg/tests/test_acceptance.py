"""Acceptance suite: one PASS/FAIL line per criterion.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
The lines are collected again in the terminal summary.
"""

import math
import time
from fractions import Fraction

import numpy as np

from thompson_spectra.asymptotics import edge_constants, integrated_density_edge, return_probability_fit
from thompson_spectra.finite_spectra import eig, vertex_measure
from thompson_spectra.graphs import GraphBuilder, attach_delta, finite_examples, graph_union, schreier_ball, star
from thompson_spectra.series import moments_bruteforce, series_from_graph, upsilon_series
from thompson_spectra.stieltjes import (
    appendix_spectra,
    density,
    f_gamma_exact,
    integrate_density,
    measure_moments,
    stieltjes_of_graph_series,
    stieltjes_w,
    support,
    v_arrays,
)

PAIRS = [(Fraction(1, 4), Fraction(1, 4)), (Fraction(1), Fraction(2)), (Fraction(-1), Fraction(1)), (Fraction(3), Fraction(-2))]


def test_criterion_01_series_equals_bruteforce(record):
    start = time.perf_counter()
    bad = []
    for alpha, beta in PAIRS:
        brute = moments_bruteforce(schreier_ball(alpha, beta, "1/2", 16), 29).values
        _, p = upsilon_series(alpha, beta, 29)
        if list(brute) != list(p):
            bad.append((alpha, beta))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 120
    record(1, "cubic series = radius-16 path sums, 30 coefficients, 4 pairs", ok, f"mismatches={bad} time={elapsed:.1f}s")


def test_criterion_02_support_alpha_minus_one(record):
    s = support(-1, 1)
    quartic = np.polynomial.Polynomial([1, 16, -2, 0, 1])
    ok = len(s.intervals) == 2 and not s.atoms
    (z1, z2), (lo, hi) = s.intervals
    res = max(abs(quartic(z1)), abs(quartic(z2)))
    ok = ok and res < 1e-9 and abs(z1 + 2.766) < 1e-3 and abs(z2 + 0.062) < 1e-3 and abs(lo) < 1e-12 and abs(hi - 4) < 1e-12
    record(2, "support for (-1, 1) = [z1, z2] u [0, 4]", ok, f"z1={z1:.12f} z2={z2:.12f} [{lo:g}, {hi:g}] residual={res:.1e}")


def test_criterion_03_same_sign_interval(record):
    pairs = [(0.25, 0.25), (1, 2), (0.1, 3), (-1, -0.5), (-2, -0.7)]
    worst_edge, min_density, shapes = 0.0, math.inf, []
    for a, b in pairs:
        s = support(a, b)
        c = 2 * abs(a + b)
        shapes.append(len(s.intervals) == 1 and not s.atoms)
        lo, hi = s.intervals[0]
        worst_edge = max(worst_edge, abs(lo + c), abs(hi - c))
        min_density = min(min_density, float(density(a, b, np.linspace(-c, c, 13)[1:-1]).min()))
    ok = all(shapes) and worst_edge < 1e-6 and min_density > 0
    record(3, "same-sign support is [-2|a+b|, 2|a+b|]", ok, f"edge error={worst_edge:.1e} min interior density={min_density:.3e}")


def test_criterion_04_normalization_and_moments(record):
    worst_mass, worst_scaled, worst_abs = 0.0, 0.0, 0.0
    for alpha, beta in PAIRS:
        a, b = float(alpha), float(beta)
        q = measure_moments(a, b, 9)
        s = support(a, b)
        mass = sum(integrate_density(a, b, lo, hi) for lo, hi in s.intervals) + sum(m for _, m in s.atoms)
        worst_mass = max(worst_mass, abs(mass - 1))
        _, p = upsilon_series(alpha, beta, 9)
        big = 2 * (abs(a) + abs(b))
        for n in range(10):
            err = abs(q.moments[n] - float(p[n]))
            worst_abs = max(worst_abs, err)
            worst_scaled = max(worst_scaled, err / max(1.0, big**n))
    ok = worst_mass < 1e-6 and worst_scaled < 1e-6
    record(
        4, "density integrates to 1, quadrature moments = series moments", ok,
        f"mass error={worst_mass:.1e} moment error/max(1, R^n)={worst_scaled:.1e} (absolute {worst_abs:.1e})",
    )


def test_criterion_05_return_probability_exponent(record):
    fit = return_probability_fit(2000, 500)
    const = edge_constants()
    ratio = fit.A_hat / const.half_sum
    ok = 1.45 <= fit.exponent <= 1.55 and fit.spread_top_half < 0.02 and abs(ratio - 1) < 0.03
    record(
        5, "p_2n ~ n^-3/2 on n in [500, 2000]", ok,
        f"exponent={fit.exponent:.4f} spread={100 * fit.spread_top_half:.2f}% "
        f"p_2n n^1.5={fit.A_hat:.3f} vs -(C2t+C4t)/2={const.half_sum:.3f}; "
        f"extrapolated {fit.A_extrapolated:.3f} vs transfer {const.transfer_even:.3f}",
    )


def test_criterion_06_integrated_density(record):
    fit = integrated_density_edge(np.logspace(-3, -1, 9))
    ratio = fit.C_hat / fit.C_predicted
    ok = 1.45 <= fit.exponent <= 1.55 and abs(ratio - 1) < 0.03
    record(
        6, "N(s) ~ C s^3/2 on s in [1e-3, 1e-1]", ok,
        f"slope={fit.exponent:.4f} C_hat={fit.C_hat:.4f} predicted={fit.C_predicted:.4f}",
    )


def test_criterion_07_edge_constants(record):
    c = edge_constants()
    c1 = 4 * (2 - math.sqrt(2))
    c3 = 6 + 2 * math.sqrt(2) - 2 * math.sqrt(11 + 2 * math.sqrt(2))
    ok = abs(c.C1 - c1) < 1e-12 and abs(c.C3 - c3) < 1e-12 and abs(c.C2 + 9.657) < 5e-3 and abs(c.C4 + 0.6) < 5e-2
    record(7, "edge constants C1..C4", ok, f"C1={c.C1:.15f} C2={c.C2:.6f} C3={c.C3:.15f} C4={c.C4:.6f}")


def test_criterion_08_finite_examples(record):
    d = eig(finite_examples("path5"))
    s3 = math.sqrt(3)
    eig_err = float(np.max(np.abs(d.eigenvalues - [-s3, -1, 0, 1, s3])))
    patterns = [len(vertex_measure(d, v).support) for v in (0, 1, -1, 2, -2)]
    h = eig(finite_examples("hanoi2"))
    lam, mult = h.distinct()[0]
    m00 = vertex_measure(h, "00").mass_at(-2 / 3)
    m10 = vertex_measure(h, "10").mass_at(-2 / 3)
    ok = eig_err < 1e-10 and patterns == [3, 4, 4, 5, 5] and abs(lam + 2 / 3) < 1e-12 and mult == 1 and m00 < 1e-12 and m10 > 0
    record(
        8, "path5 spectrum and vertex supports, hanoi2 eigenvalue -2/3", ok,
        f"path5 error={eig_err:.1e} support sizes={patterns} mu_00={m00:.1e} mu_10={m10:.4f}",
    )


def test_criterion_09_appendix(record):
    rep = appendix_spectra()
    loops, tilde = rep["gamma_loops"], rep["gamma_tilde"]
    edge_err = abs(tilde["edge"] - 13 * math.sqrt(3) / 6)
    ok = (
        f_gamma_exact(Fraction(4, 17)) == 1
        and loops["poles_detected"] == [4.25]
        and loops["mass_residue"] > 0
        and edge_err < 1e-9
        and not rep["pole_in_gamma_tilde_spectrum"]
    )
    record(
        9, "F(4/17) = 1, pole at 17/4, tilde edge 13 sqrt3/6", ok,
        f"residue={loops['mass_residue']:.9f} edge error={edge_err:.1e}; {rep['conclusion']}",
    )


def _random_graph(rng, n):
    def w():
        return Fraction(int(rng.choice([-3, -2, -1, 1, 2, 3])), int(rng.integers(1, 5)))

    b = GraphBuilder()
    for i in range(n):
        v = b.add_vertex(i)
        if i:
            b.add_edge(int(rng.integers(0, i)), v, w(), w() if rng.random() < 0.5 else None)
        if rng.random() < 0.4:
            b.add_loop(v, w())
    return b.build(0)


def test_criterion_10_property_suites(record):
    rng = np.random.default_rng(20)
    z = rng.uniform(-4, 4, 500) + 1j * 10 ** rng.uniform(-5, 1, 500)
    unique = True
    positive = True
    for a, b in PAIRS:
        v, sel, roots = v_arrays(float(a), float(b), z)
        unique &= bool(((roots.imag > 1e-9).sum(axis=1) <= 1).all() and sel.all())
        positive &= bool((v.imag > 0).all() and (stieltjes_w(float(a), float(b), z).imag > 0).all())

    order, identities = 10, 0
    for _ in range(30):
        g1, g2 = _random_graph(rng, int(rng.integers(1, 7))), _random_graph(rng, int(rng.integers(1, 7)))
        w_out, w_in = Fraction(int(rng.integers(1, 4))), Fraction(-1, int(rng.integers(1, 4)))
        f1, p1 = series_from_graph(g1, order)
        f2, p2 = series_from_graph(g2, order)
        identities += series_from_graph(graph_union(g1, g2), order)[0] == f1 + f2
        identities += series_from_graph(attach_delta(g1, w_out, w_in), order)[0] == p1.shift(2) * (w_out * w_in)
        identities += series_from_graph(star(g1, g2, w_out), order)[0] == f1 + p2.shift(2) * (w_out * w_out)

    _, p = upsilon_series(Fraction(1, 4), Fraction(1, 4), 150)
    p = p.to_float()
    conj = 0.0
    for _ in range(100):
        zz = rng.uniform(2, 4) * np.exp(1j * rng.uniform(0, np.pi))
        conj = max(conj, abs(stieltjes_of_graph_series(p, zz.conjugate(), 1.0) - stieltjes_of_graph_series(p, zz, 1.0).conjugate()))

    ok = unique and positive and identities == 90 and conj < 1e-10
    record(
        10, "root uniqueness, Im V > 0, graph-sum identities, conjugate symmetry", ok,
        f"unique={unique} positive={positive} identities={identities}/90 conj error={conj:.1e}",
    )


if __name__ == "__main__":
    import sys

    import pytest

    sys.exit(pytest.main([__file__, "-v", "-s"]))
