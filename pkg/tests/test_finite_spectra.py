import math
from fractions import Fraction

import numpy as np
import pytest

from thompson_spectra import DomainError, PreconditionError
from thompson_spectra.finite_spectra import (
    ball_spectrum_flow,
    eig,
    exact_weights,
    gamma_eigenvector_residual,
    hausdorff_to_support,
    moment_crosscheck,
    symmetric_difference_in_spectrum,
    to_report,
    vertex_measure,
)
from thompson_spectra.graphs import GraphBuilder, attach_delta, finite_examples, upsilon_ball
from thompson_spectra.series import moments_bruteforce
from thompson_spectra.stieltjes import SupportDescription

S3 = math.sqrt(3)


@pytest.fixture(scope="module")
def path5():
    return eig(finite_examples("path5"))


@pytest.fixture(scope="module")
def hanoi():
    return eig(finite_examples("hanoi2"))


def test_path5_eigenvalues(path5):
    assert np.allclose(path5.eigenvalues, [-S3, -1, 0, 1, S3], atol=1e-10)
    assert path5.residual() < 1e-12


def test_path5_vertex_patterns(path5):
    centre = vertex_measure(path5, 0)
    assert centre.support == pytest.approx([-S3, 0, S3])
    assert [m for _, m in centre.atoms] == pytest.approx([1 / 3] * 3)
    for v in (1, -1):
        assert vertex_measure(path5, v).support == pytest.approx([-S3, -1, 1, S3])
    for v in (2, -2):
        assert len(vertex_measure(path5, v).support) == 5
    for v in (-2, -1, 0, 1, 2):
        assert sum(m for _, m in vertex_measure(path5, v).atoms) == pytest.approx(1)


def test_hanoi_eigenvalue_minus_two_thirds(hanoi):
    distinct = hanoi.distinct()
    assert distinct[0][0] == pytest.approx(-2 / 3, abs=1e-12)
    assert distinct[0][1] == 1
    assert [m for _, m in distinct] == [1, 2, 3, 2, 1]
    assert vertex_measure(hanoi, "00").mass_at(-2 / 3) < 1e-12
    assert vertex_measure(hanoi, "10").mass_at(-2 / 3) > 0.1
    assert vertex_measure(hanoi, "01").mass_at(-2 / 3) == pytest.approx(1 / 6)


def test_hanoi_moment_crosscheck():
    g = finite_examples("hanoi2")
    ref = moments_bruteforce(g, 12, vertex="00")
    res = moment_crosscheck(g, "00", 12, ref)
    assert res.ok and res.first_failure is None and res.max_deviation < 1e-12


def test_crosscheck_reports_failure():
    g = finite_examples("path5")
    ref = moments_bruteforce(finite_examples("hanoi2"), 6, vertex="00")
    res = moment_crosscheck(g, 0, 6, ref)
    assert not res.ok and res.first_failure == 1


def test_symmetric_difference_in_spectrum(path5, hanoi):
    assert symmetric_difference_in_spectrum(path5, 0, 1)
    assert symmetric_difference_in_spectrum(hanoi, "00", "12")


def test_non_symmetric_rejected():
    b = GraphBuilder()
    b.add_vertex(0)
    g = attach_delta(b.build(), 1, 2)
    with pytest.raises(DomainError):
        eig(g)


def test_ball_measure_matches_moments():
    g = upsilon_ball(Fraction(1, 4), Fraction(1, 4), 6).graph
    ref = moments_bruteforce(g, 12)
    assert moment_crosscheck(g, g.root_label, 12, ref, tol=1e-12).ok


def test_hausdorff():
    supp = SupportDescription([(-1.0, 1.0)], [(3.0, 0.1)], [])
    assert hausdorff_to_support([-1, 0, 1, 3], supp) == pytest.approx(0.5)
    assert hausdorff_to_support([-1, 1, 3, 5], supp) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        hausdorff_to_support([], supp)


def test_flow_shrinks_towards_support():
    rows = ball_spectrum_flow("upsilon", [(0.25, 0.25)], [0, 2, 4, 8])
    assert [r.size for r in rows] == [1, 6, 19, 142]
    h = [r.hausdorff for r in rows]
    assert all(a > b for a, b in zip(h, h[1:]))
    assert all(r.max_abs_eigenvalue <= 1 + 1e-12 for r in rows)
    with pytest.raises(DomainError):
        ball_spectrum_flow("upsilon", [(1, 1)], [2, 1])


def test_gamma_eigenvector_residual_decays():
    r = [gamma_eigenvector_residual(n) for n in (4, 8, 12)]
    assert r[0] > r[1] > r[2]
    assert r[2] < 1e-6


def test_report_and_exact_weights(hanoi):
    rep = to_report(hanoi, ["00"])
    assert list(rep["measures"]) == ["00"]
    assert len(rep["eigenvalues"]) == 9
    assert exact_weights(finite_examples("hanoi2"))


def test_dense_limit():
    g = upsilon_ball(1, 1, 20).graph
    if len(g) <= 10_000:
        pytest.skip("ball too small for the dense limit")
    with pytest.raises(PreconditionError):
        eig(g)
