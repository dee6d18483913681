import math
from fractions import Fraction

import numpy as np
import pytest

from thompson_spectra import DiagnosticError, DomainError, PreconditionError
from thompson_spectra.cardano import cubic_residuals, cubic_roots
from thompson_spectra.series import appendix_series, solve_cubic_series, upsilon_series
from thompson_spectra.stieltjes import (
    appendix_spectra,
    density,
    density_curve,
    eval_pq_star,
    eval_v,
    f_gamma_exact,
    integrate_density,
    measure_moments,
    stieltjes_of_graph_series,
    stieltjes_w,
    support,
    v_arrays,
    v_beta_zero,
)

Q = Fraction(1, 4)


def test_cardano_residuals():
    rng = np.random.default_rng(3)
    c = rng.normal(size=(4, 200)) + 1j * rng.normal(size=(4, 200))
    roots = cubic_roots(*c)
    assert np.max(cubic_residuals(tuple(c), roots)) < 1e-12


def test_pq_star_examples():
    p, q = eval_pq_star(0.25, 0.25, 0)
    assert p.value == pytest.approx(0.5j) and p.branch == "positive_imag"
    for z in (7.0, -7.0, 1e4):
        p, _ = eval_pq_star(1, 2, z)
        assert p.value * (z - p.value) == pytest.approx(9)
        assert np.sign(p.value.real) == np.sign(z)
    p, _ = eval_pq_star(1, 2, 6.0)
    assert p.value == pytest.approx(3.0)
    with pytest.raises(DomainError):
        eval_pq_star(1, 1, 1 - 1j)


def test_v_examples():
    r = eval_v(0, 1, 0)
    assert r.value == pytest.approx(1j, abs=1e-12)
    assert max(r.residuals) < 1e-12
    x = solve_cubic_series(0.25, 0.25, 200)
    r = eval_v(0.25, 0.25, 20)
    # real z beyond the support: no root is selected, the series picks one of the three real roots
    assert r.value is None
    target = -x.evaluate(1 / 20) / 20
    assert min(abs(v - target) for v in r.roots) < 1e-10
    with pytest.raises(PreconditionError):
        eval_v(1, 0, 1j)


def test_beta_zero_closed_form():
    # x = 1/sqrt(1 - 4 a^2 t^2)  gives  V = -1/sqrt(z^2 - 4 a^2) at large z
    z = 5.0 + 0.3j
    assert v_beta_zero(0.5, z) == pytest.approx(-1 / (z * np.sqrt(1 - 1 / z**2)))


@pytest.mark.parametrize("alpha,beta", [(0.25, 0.25), (1, 2), (-1, 1), (3, -2), (0.7, -0.2)])
def test_upper_half_plane(alpha, beta):
    rng = np.random.default_rng(11)
    r = 2 * (abs(alpha) + abs(beta))
    z = rng.uniform(-1.5 * r, 1.5 * r, 500) + 1j * 10 ** rng.uniform(-4, 1, 500)
    v, sel, roots = v_arrays(alpha, beta, z)
    assert sel.all()
    assert ((roots.imag > 1e-9).sum(axis=1) <= 1).all()
    assert (v.imag > 0).all()
    assert (stieltjes_w(alpha, beta, z).imag > 0).all()


def test_w_agrees_with_series_off_axis():
    _, p = upsilon_series(Q, Q, 300)
    p = p.to_float()
    for z in (3 + 2j, -2.5 + 0.1j, 1.2j + 0.4):
        assert stieltjes_w(0.25, 0.25, z)[0] == pytest.approx(stieltjes_of_graph_series(p, z, 1.0), abs=1e-10)
    with pytest.raises(DomainError):
        stieltjes_of_graph_series(p, 0.5j, 1.0)


def test_series_route_conjugate_symmetry():
    _, p = upsilon_series(1, 2, 200)
    p = p.to_float()
    rng = np.random.default_rng(5)
    for _ in range(100):
        z = rng.uniform(9, 14) * np.exp(1j * rng.uniform(0, np.pi))
        s, sc = stieltjes_of_graph_series(p, z, 6.0), stieltjes_of_graph_series(p, z.conjugate(), 6.0)
        assert abs(sc - s.conjugate()) < 1e-10


def test_large_z_is_minus_one_over_z():
    z = 1e8j
    assert stieltjes_w(1, 2, z)[0] * z == pytest.approx(-1, abs=1e-7)


def test_half_line_series_against_closed_form():
    p = appendix_series(80)["gamma_n"][1].to_float()
    z = 3.0
    f = (1 - math.sqrt(1 - 4 / z**2)) / 2
    assert stieltjes_of_graph_series(p, z, 2.0) == pytest.approx(-1 / (z * (1 - f)), abs=1e-10)


def test_density_quarter_quarter():
    z = np.linspace(-1.5, 1.5, 301)
    d = density(0.25, 0.25, z)
    assert (d >= 0).all()
    assert (d[np.abs(z) > 1] == 0).all()
    assert (d[np.abs(z) < 0.99] > 0).all()
    assert integrate_density(0.25, 0.25, -1, 1) == pytest.approx(1, abs=1e-10)


@pytest.mark.parametrize("alpha,beta", [(0.25, 0.25), (1, 2), (-1, 1)])
def test_density_routes_agree(alpha, beta):
    r = 2 * (abs(alpha) + abs(beta))
    curve = density_curve(alpha, beta, np.linspace(-r, r, 801))
    assert curve.route_max_deviation < 1e-6
    assert curve.route_checked.sum() > 300
    assert not curve.flagged


def test_route_check_raises_when_tolerance_is_impossible():
    with pytest.raises(DiagnosticError):
        density_curve(1, 2, np.linspace(-5, 5, 101), route_tol=1e-18)


def test_support_co11():
    s = support(-1, 1)
    (z1, z2), (lo, hi) = s.intervals
    roots = sorted(r.real for r in np.roots([1, 0, -2, 16, 1]) if abs(r.imag) < 1e-9)
    assert (z1, z2) == pytest.approx(roots, abs=1e-9)
    assert (lo, hi) == pytest.approx((0, 4), abs=1e-12)
    assert s.atoms == []
    assert not s.contains(-0.03) and s.contains(-1.0)


@pytest.mark.parametrize("alpha,beta", [(0.25, 0.25), (1, 2), (0.1, 3), (-1, -0.5), (-2, -2)])
def test_same_sign_single_interval_no_atoms(alpha, beta):
    s = support(alpha, beta)
    c = 2 * abs(alpha + beta)
    assert len(s.intervals) == 1
    assert s.intervals[0] == pytest.approx((-c, c), abs=1e-9)
    assert s.atoms == []


def test_support_scales():
    base = support(1, 1)
    for c in (0.5, 3.0):
        scaled = support(c, c)
        assert np.allclose(np.array(scaled.intervals), c * np.array(base.intervals))
    a = np.array(support(-1, 1).intervals)
    assert np.allclose(np.array(support(-2.5, 2.5).intervals), 2.5 * a)


@pytest.mark.parametrize("alpha,beta", [(0.25, 0.25), (1, 2), (-1, 1), (3, -2)])
def test_normalization_and_moments(alpha, beta):
    q = measure_moments(alpha, beta, 9)
    assert q.total_mass == pytest.approx(1, abs=1e-10)
    _, p = upsilon_series(Fraction(alpha), Fraction(beta), 9)
    big = 2 * (abs(alpha) + abs(beta))
    for n in range(10):
        assert abs(q.moments[n] - float(p[n])) <= 1e-9 * big**n


def test_appendix_report():
    rep = appendix_spectra()
    loops = rep["gamma_loops"]
    assert f_gamma_exact(Fraction(4, 17)) == 1
    assert loops["pole"] == Fraction(17, 4)
    assert loops["poles_detected"] == pytest.approx([4.25], abs=1e-12)
    assert loops["mass_exact"] == Fraction(15, 16)
    assert loops["mass_residue"] == pytest.approx(15 / 16, abs=1e-6)
    assert loops["mass_eigenvector"] == pytest.approx(15 / 16, abs=1e-12)
    tilde = rep["gamma_tilde"]
    assert tilde["edge"] == pytest.approx(13 * math.sqrt(3) / 6, abs=1e-9)
    assert tilde["real_outside"] and tilde["complex_inside"] and tilde["no_pole"]
    assert not rep["pole_in_gamma_tilde_spectrum"]
    with pytest.raises(DomainError):
        f_gamma_exact(Fraction(1, 3))
