import math

import numpy as np
import pytest

from thompson_spectra import PreconditionError
from thompson_spectra.asymptotics import (
    edge_constants,
    edge_mass,
    integrated_density_edge,
    return_moments,
    return_probability_fit,
    root_selection_check,
    x_real_branch,
)

C1 = 4 * (2 - math.sqrt(2))
C3 = 6 + 2 * math.sqrt(2) - 2 * math.sqrt(11 + 2 * math.sqrt(2))


@pytest.fixture(scope="module")
def const():
    return edge_constants()


@pytest.fixture(scope="module")
def long_fit():
    return return_probability_fit(20000)


@pytest.fixture(scope="module")
def deep_edge():
    return integrated_density_edge(np.logspace(-8, -6, 9))


def test_edge_constants(const):
    assert const.C1 == pytest.approx(C1, abs=1e-12)
    assert const.C3 == pytest.approx(C3, abs=1e-12)
    assert const.C2 == pytest.approx(-9.657, abs=5e-3)
    assert const.C4 == pytest.approx(-0.6, abs=5e-2)
    # the other two roots at each edge are far from the chosen one
    assert sorted(const.plus.roots_at_edge) == pytest.approx([C1, 4.0, 13.65685424949238], rel=1e-9)
    assert min(const.minus.roots_at_edge) == pytest.approx(C3)


def test_transfer_constants(const):
    assert const.transfer_even == pytest.approx(21.507, abs=1e-3)
    assert const.half_sum / const.transfer_even == pytest.approx(2 * math.sqrt(2 * math.pi), rel=1e-12)


def test_root_selection(const):
    rep = root_selection_check(60)
    assert rep["coefficients_nonnegative"] and rep["branch_nondecreasing"]
    assert rep["series_matches_branch"] < 1e-12
    assert rep["x_near_plus1"] == pytest.approx(C1, abs=1e-3)
    assert rep["x_near_minus1"] == pytest.approx(C3, abs=1e-3)
    assert rep["relative_gap_0.9999"] < 0.01
    assert min(abs(rep["d_dx_plus"]), abs(rep["d_dx_minus"])) > 1e-6
    with pytest.raises(PreconditionError):
        root_selection_check(10)


def test_branch_starts_at_one():
    assert x_real_branch([0.0])[0] == pytest.approx(1.0)


def test_moments_positive_and_normalised():
    p = return_moments(400)
    assert p[0] == pytest.approx(1, abs=1e-14)
    assert (p[2::2] > 0).all()


def test_moment_fit_in_asymptotic_regime(long_fit, const):
    assert 1.45 <= long_fit.exponent <= 1.55
    assert long_fit.spread_top_half < 0.02
    assert long_fit.all_positive
    assert long_fit.A_extrapolated == pytest.approx(const.transfer_even, rel=0.01)
    assert long_fit.B_extrapolated == pytest.approx(const.transfer_odd, rel=0.01)


def test_edge_mass_in_asymptotic_regime(deep_edge):
    assert 1.45 <= deep_edge.exponent <= 1.55
    assert deep_edge.C_hat == pytest.approx(deep_edge.C_predicted, rel=0.03)
    assert deep_edge.ratio_spread < 1.01
    assert not deep_edge.flagged


def test_two_routes_to_c2_tilde(long_fit, deep_edge, const):
    from_moments = -2 * math.sqrt(2 * math.pi) * (long_fit.A_extrapolated + long_fit.B_extrapolated)
    from_density = -1.5 * math.pi * deep_edge.C_hat
    assert from_moments == pytest.approx(from_density, rel=0.03)
    assert from_moments == pytest.approx(const.C2t, rel=0.03)


def test_edge_mass_vanishes_at_zero():
    assert edge_mass(0.0) == 0.0
    assert 0 < edge_mass(1e-4) < edge_mass(1e-2) < 1


def test_short_window_is_rejected():
    with pytest.raises(PreconditionError):
        return_probability_fit(100)
