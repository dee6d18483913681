"""Eigendecompositions of finite graphs and the atomic spectral measures of their vertices."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DomainError, PreconditionError
from .graphs import RootedWeightedGraph, appendix_graphs, delta_ball, upsilon_ball
from .series import MomentTable
from .stieltjes import SupportDescription, support

CLUSTER_TOL = 1e-9
MASS_FLOOR = 1e-12
MAX_VERTICES = 10_000


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    graph: RootedWeightedGraph

    def clusters(self, tol: float = CLUSTER_TOL) -> list[np.ndarray]:
        """Index groups of numerically equal eigenvalues."""
        groups, start = [], 0
        ev = self.eigenvalues
        for i in range(1, len(ev) + 1):
            if i == len(ev) or ev[i] - ev[i - 1] > tol:
                groups.append(np.arange(start, i))
                start = i
        return groups

    def distinct(self, tol: float = CLUSTER_TOL) -> list[tuple[float, int]]:
        """``(eigenvalue, multiplicity)`` pairs."""
        return [(float(self.eigenvalues[g].mean()), len(g)) for g in self.clusters(tol)]

    def residual(self) -> float:
        h = self.graph.matrix(float)
        return float(np.max(np.abs(h @ self.eigenvectors - self.eigenvectors * self.eigenvalues)))


@dataclass(frozen=True)
class AtomicSpectralMeasure:
    vertex: object
    atoms: tuple[tuple[float, float], ...]
    dropped: tuple[tuple[float, float], ...] = ()

    @property
    def support(self) -> list[float]:
        return [x for x, _ in self.atoms]

    def mass_at(self, x: float, tol: float = 1e-8) -> float:
        return sum(m for y, m in self.atoms + self.dropped if abs(x - y) <= tol)

    def moment(self, n: int) -> float:
        return float(sum(m * x**n for x, m in self.atoms))


def eig(graph: RootedWeightedGraph) -> EigenDecomposition:
    """Full symmetric eigendecomposition of ``H``."""
    if len(graph) > MAX_VERTICES:
        raise PreconditionError(f"{len(graph)} vertices exceeds the dense limit {MAX_VERTICES}")
    if not (graph.symmetric_real or graph.is_symmetric_real()):
        raise DomainError("eig needs symmetric real weights")
    vals, vecs = np.linalg.eigh(graph.matrix(float))
    return EigenDecomposition(vals, vecs, graph)


def vertex_measure(decomp: EigenDecomposition, vertex=None) -> AtomicSpectralMeasure:
    """``mu_v({lambda}) = (E_lambda delta_v, delta_v)`` using eigenspace projectors."""
    g = decomp.graph
    v = g.root if vertex is None else g.index[vertex]
    row = decomp.eigenvectors[v]
    atoms, dropped = [], []
    for grp in decomp.clusters():
        lam = float(decomp.eigenvalues[grp].mean())
        mass = float(np.sum(row[grp] ** 2))
        (atoms if mass >= MASS_FLOOR else dropped).append((lam, mass))
    return AtomicSpectralMeasure(g.labels[v], tuple(atoms), tuple(dropped))


@dataclass
class CrosscheckResult:
    ok: bool
    first_failure: int | None
    max_deviation: float


def moment_crosscheck(graph: RootedWeightedGraph, vertex, n_max: int, reference: MomentTable, tol: float = 1e-9) -> CrosscheckResult:
    """Compare ``sum lambda^n mass`` with reference moments, relative to ``max(1, |ref|)``."""
    mu = vertex_measure(eig(graph), vertex)
    worst, first = 0.0, None
    for n in range(min(n_max, len(reference) - 1) + 1):
        ref = float(reference[n])
        dev = abs(mu.moment(n) - ref) / max(1.0, abs(ref))
        worst = max(worst, dev)
        if dev > tol and first is None:
            first = n
    return CrosscheckResult(first is None, first, worst)


def hausdorff_to_support(points, supp: SupportDescription) -> float:
    """Hausdorff distance between a finite point set and a union of intervals and atoms."""
    pts = np.sort(np.asarray(points, dtype=float))
    if len(pts) == 0:
        raise DomainError("empty point set")
    pieces = list(supp.intervals) + [(a, a) for a, _ in supp.atoms]

    def dist_to_support(x):
        return min(0.0 if lo <= x <= hi else min(abs(x - lo), abs(x - hi)) for lo, hi in pieces)

    forward = max(dist_to_support(x) for x in pts)
    backward = 0.0
    for lo, hi in pieces:
        cands = [lo, hi]
        inside = pts[(pts > lo) & (pts < hi)]
        edges = np.concatenate([[lo], inside, [hi]])
        cands += list((edges[:-1] + edges[1:]) / 2)
        for c in cands:
            backward = max(backward, float(np.min(np.abs(pts - c))))
    return max(forward, backward)


FAMILIES = {"upsilon": upsilon_ball, "delta": delta_ball}


@dataclass
class FlowRow:
    family: str
    alpha: float
    beta: float
    radius: int
    size: int
    max_abs_eigenvalue: float
    hausdorff: float
    max_root_atom: float
    eigenvalues: list[float] = field(repr=False, default_factory=list)


def ball_spectrum_flow(family: str, alphas_betas, radii) -> list[FlowRow]:
    """Spectra of growing balls compared with the analytic support of the measure at 1/2."""
    radii = list(radii)
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise DomainError("radii must be increasing")
    if family not in FAMILIES:
        raise DomainError(f"unknown family {family!r}")
    rows = []
    for alpha, beta in alphas_betas:
        supp = support(float(alpha), float(beta))
        for r in radii:
            g = FAMILIES[family](alpha, beta, r).graph
            d = eig(g)
            mu = vertex_measure(d)
            rows.append(
                FlowRow(
                    family, float(alpha), float(beta), r, len(g),
                    float(np.max(np.abs(d.eigenvalues))),
                    hausdorff_to_support(d.eigenvalues, supp),
                    max(m for _, m in mu.atoms),
                    [float(x) for x in d.eigenvalues],
                )
            )
    return rows


def gamma_eigenvector_residual(length: int) -> float:
    """``||(H - 17/4) f|| / ||f||`` for ``f(j) = 4^-j`` on the half-line with loops cut at ``length``."""
    g = appendix_graphs("gamma_loops", length - 1).graph
    h = g.matrix(float)
    j = np.array([g.labels[i] for i in range(len(g))], dtype=float)
    f = 4.0**-j
    return float(np.linalg.norm(h @ f - 4.25 * f) / np.linalg.norm(f))


def symmetric_difference_in_spectrum(decomp: EigenDecomposition, v, w, tol: float = 1e-8) -> bool:
    """Every point of ``supp mu_v`` xor ``supp mu_w`` is an eigenvalue."""
    sv = vertex_measure(decomp, v).support
    sw = vertex_measure(decomp, w).support

    def member(x, xs):
        return any(abs(x - y) <= tol for y in xs)

    diff = [x for x in sv if not member(x, sw)] + [x for x in sw if not member(x, sv)]
    return all(member(x, decomp.eigenvalues) for x in diff)


def to_report(decomp: EigenDecomposition, vertices=None) -> dict:
    g = decomp.graph
    labels = g.labels if vertices is None else vertices
    out = {"eigenvalues": [float(x) for x in decomp.eigenvalues], "measures": {}}
    for lab in labels:
        mu = vertex_measure(decomp, lab)
        out["measures"][str(lab)] = [[x, m] for x, m in mu.atoms]
    return out


def exact_weights(graph: RootedWeightedGraph) -> bool:
    return all(isinstance(w, (int, Fraction)) for *_, w in graph.edges)
