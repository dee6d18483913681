"""Weighted rooted graphs: Schreier graphs of F, self-similar blocks, examples.

Every graph here is directed in the sense that each undirected edge carries two
weights, one per direction.  The Laplace-type operator acts by

    (H f)(v) = sum over directed edges e ending at v of  w(e) * f(source(e)),

so a loop contributes its weight to the diagonal once per directed copy.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict, deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product
from numbers import Number
from typing import Hashable, Iterable

import numpy as np

from .dyadic import GENERATORS, DyadicRational
from .errors import DomainError

Edge = tuple[int, int, Number]


@dataclass(frozen=True)
class RootedWeightedGraph:
    labels: tuple
    edges: tuple[Edge, ...]
    root: int = 0
    symmetric_real: bool = False
    name: str = ""

    def __post_init__(self):
        n = len(self.labels)
        if not 0 <= self.root < n:
            raise DomainError("root index out of range")
        for s, d, _ in self.edges:
            if not (0 <= s < n and 0 <= d < n):
                raise DomainError(f"edge ({s}, {d}) references a missing vertex")

    def __len__(self):
        return len(self.labels)

    @cached_property
    def index(self) -> dict:
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def in_edges(self) -> list[list[tuple[int, Number]]]:
        """``in_edges[v]`` lists ``(source, weight)`` for edges ending at ``v``."""
        adj = [[] for _ in self.labels]
        for s, d, w in self.edges:
            adj[d].append((s, w))
        return adj

    @cached_property
    def neighbors(self) -> list[tuple[int, ...]]:
        nb = [set() for _ in self.labels]
        for s, d, _ in self.edges:
            if s != d:
                nb[s].add(d)
                nb[d].add(s)
        return [tuple(sorted(x)) for x in nb]

    @cached_property
    def distances(self) -> list[int]:
        """Graph distance from the root (-1 for unreachable vertices)."""
        dist = [-1] * len(self)
        dist[self.root] = 0
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for v in self.neighbors[u]:
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    queue.append(v)
        return dist

    @property
    def root_label(self):
        return self.labels[self.root]

    def is_connected(self) -> bool:
        return all(d >= 0 for d in self.distances)

    def loop_weight_sum(self, vertex: int) -> Number:
        return sum((w for s, d, w in self.edges if s == d == vertex), 0)

    def in_weight_sum(self, vertex: int) -> Number:
        return sum((w for _, w in self.in_edges[vertex]), 0)

    def row_abs_bound(self) -> float:
        """Max over vertices of the summed |weights| of incoming edges (bounds ||H||)."""
        sums = [0.0] * len(self)
        for _, d, w in self.edges:
            sums[d] += abs(complex(w))
        return max(sums) if sums else 0.0

    def is_symmetric_real(self) -> bool:
        """Check that the summed weight on (u, v) equals that on (v, u) and is real."""
        total = defaultdict(int)
        for s, d, w in self.edges:
            if isinstance(w, complex) and w.imag != 0:
                return False
            total[(s, d)] += w
        return all(total[(s, d)] == total.get((d, s), 0) for s, d in total)

    def asymmetric_pairs(self) -> list[tuple[int, int]]:
        """Directed edges whose weight multiset differs from the reverse direction."""
        fwd = defaultdict(list)
        for s, d, w in self.edges:
            fwd[(s, d)].append(w)
        bad = []
        for (s, d), ws in fwd.items():
            if s == d:
                continue
            if sorted(ws, key=_weight_key) != sorted(fwd.get((d, s), []), key=_weight_key):
                bad.append((s, d))
        return bad

    def matrix(self, dtype=None) -> np.ndarray:
        """Dense matrix of H with ``H[target, source]`` summing parallel edges."""
        if dtype is None:
            dtype = complex if any(isinstance(w, complex) for *_, w in self.edges) else float
        h = np.zeros((len(self), len(self)), dtype=dtype)
        for s, d, w in self.edges:
            h[d, s] += w
        return h

    def bfs_order(self) -> list[int]:
        """Vertex indices in BFS order from the root, ties broken by label."""
        key = _label_sort_key(self.labels)
        seen = {self.root}
        order = [self.root]
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for v in sorted(self.neighbors[u], key=key):
                if v not in seen:
                    seen.add(v)
                    order.append(v)
                    queue.append(v)
        return order

    def relabeled(self, fn) -> RootedWeightedGraph:
        return RootedWeightedGraph(
            tuple(fn(lab) for lab in self.labels), self.edges, self.root, self.symmetric_real, self.name
        )

    def to_json(self) -> dict:
        order = self.bfs_order()
        order += [i for i in range(len(self)) if i not in set(order)]
        pos = {v: k for k, v in enumerate(order)}
        edges = sorted((pos[s], pos[d], w) for s, d, w in self.edges)
        return {
            "vertices": [_label_to_json(self.labels[v]) for v in order],
            "root": 0,
            "edges": [
                {"src": s, "dst": d, "re": _weight_part(w, "real"), "im": _weight_part(w, "imag")}
                for s, d, w in edges
            ],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


@dataclass(frozen=True)
class BallTruncation:
    graph: RootedWeightedGraph
    radius: int
    boundary: frozenset = field(default_factory=frozenset)

    def labels_at(self, distance: int) -> set:
        g = self.graph
        return {g.labels[v] for v, d in enumerate(g.distances) if d == distance}


def _weight_key(w):
    if isinstance(w, complex):
        return (w.real, w.imag)
    return (w, 0)


def _weight_part(w, part):
    if isinstance(w, Fraction):
        return str(w) if part == "real" else "0"
    if isinstance(w, int):
        return str(w) if part == "real" else "0"
    return float(getattr(complex(w), part))


def _label_to_json(label):
    if isinstance(label, (int, str)):
        return label
    return str(label)


def _label_sort_key(labels):
    try:
        sorted(labels[:64])
        sorted(set(type(x) for x in labels), key=str)
        if len(set(type(x) for x in labels)) == 1:
            return lambda v: labels[v]
    except TypeError:
        pass
    return lambda v: str(labels[v])


def graph_from_json(doc: dict) -> RootedWeightedGraph:
    """Inverse of :meth:`RootedWeightedGraph.to_json` (labels come back as JSON values)."""

    def weight(e):
        re, im = e["re"], e["im"]
        if isinstance(re, str) and im in ("0", 0):
            return Fraction(re)
        return complex(float(re), float(im)) if float(im) else float(re)

    edges = tuple((e["src"], e["dst"], weight(e)) for e in doc["edges"])
    g = RootedWeightedGraph(tuple(doc["vertices"]), edges, doc["root"])
    return RootedWeightedGraph(g.labels, g.edges, g.root, g.is_symmetric_real())


class GraphBuilder:
    """Mutable accumulator used by the builders below."""

    def __init__(self):
        self.labels: list = []
        self.index: dict = {}
        self.edges: list[Edge] = []

    def add_vertex(self, label: Hashable) -> int:
        if label in self.index:
            raise DomainError(f"duplicate vertex label {label!r}")
        self.index[label] = len(self.labels)
        self.labels.append(label)
        return self.index[label]

    def add_edge(self, u: int, v: int, w_uv, w_vu=None):
        """Undirected edge: directed copies ``u->v`` (weight ``w_uv``) and ``v->u``."""
        self.edges.append((u, v, w_uv))
        self.edges.append((v, u, w_uv if w_vu is None else w_vu))

    def add_loop(self, u: int, w, w_back=None):
        """Undirected loop: two directed copies at ``u``."""
        self.edges.append((u, u, w))
        self.edges.append((u, u, w if w_back is None else w_back))

    def add_directed(self, u: int, v: int, w):
        self.edges.append((u, v, w))

    def build(self, root: int = 0, symmetric_real: bool | None = None, name: str = "") -> RootedWeightedGraph:
        g = RootedWeightedGraph(tuple(self.labels), tuple(self.edges), root, False, name)
        if not g.is_connected():
            raise DomainError("graph is not connected from the root")
        sym = g.is_symmetric_real() if symmetric_real is None else symmetric_real
        return RootedWeightedGraph(g.labels, g.edges, root, sym, name)


def restrict_ball(graph: RootedWeightedGraph, radius: int) -> BallTruncation:
    """Induced subgraph on vertices within ``radius`` of the root."""
    if radius < 0:
        raise DomainError("radius must be non-negative")
    dist = graph.distances
    keep = [v for v in range(len(graph)) if 0 <= dist[v] <= radius]
    new = {v: k for k, v in enumerate(keep)}
    edges = tuple((new[s], new[d], w) for s, d, w in graph.edges if s in new and d in new)
    g = RootedWeightedGraph(
        tuple(graph.labels[v] for v in keep), edges, new[graph.root], graph.symmetric_real, graph.name
    )
    boundary = frozenset(new[v] for v in keep if dist[v] == radius)
    return BallTruncation(g, radius, boundary)


# ---------------------------------------------------------------------------
# Schreier graphs of F acting on dyadic rationals


def schreier_ball(alpha, beta, x, radius: int) -> BallTruncation:
    """Ball of the Schreier graph of ``x`` for ``m = alpha(a + a^-1) + beta(b + b^-1)``.

    Vertices are the exact dyadic points of the orbit; each generator ``g``
    contributes the directed edge ``(y, g(y))``, so fixed points become loops.
    """
    if radius < 0:
        raise DomainError("radius must be non-negative")
    if not isinstance(x, DyadicRational):
        x = DyadicRational.from_fraction(x) if not isinstance(x, str) else DyadicRational.parse(x)
    if not x.in_open_unit_interval():
        raise DomainError(f"{x} is not inside (0, 1)")
    for w in (alpha, beta):
        if isinstance(w, float) and not math.isfinite(w):
            raise DomainError("weights must be finite")
    weight = {"a": alpha, "a^-1": alpha, "b": beta, "b^-1": beta}

    dist = {x: 0}
    order = [x]
    frontier = [x]
    for d in range(1, radius + 1):
        nxt = []
        for y in frontier:
            for g in GENERATORS.values():
                z = g(y)
                if z not in dist:
                    dist[z] = d
                    nxt.append(z)
        nxt.sort()
        order.extend(nxt)
        frontier = nxt

    b = GraphBuilder()
    for y in order:
        b.add_vertex(y)
    for y in order:
        i = b.index[y]
        for name, g in GENERATORS.items():
            z = g(y)
            if z in b.index:
                b.add_directed(i, b.index[z], weight[name])
    g = b.build(0, name=f"schreier({x})")
    boundary = frozenset(b.index[y] for y in order if dist[y] == radius)
    return BallTruncation(g, radius, boundary)


# ---------------------------------------------------------------------------
# self-similar blocks


def phi_ray(alpha, beta, length: int, tilde: bool = False) -> RootedWeightedGraph:
    """The ray Phi on ``1..length``: alpha-edges between neighbours, beta-loops at ``i > 1``.

    With ``tilde=True`` vertex 1 carries a beta-loop as well.
    """
    if length < 1:
        raise DomainError("length must be at least 1")
    b = GraphBuilder()
    for i in range(1, length + 1):
        v = b.add_vertex(i)
        if i > 1 or tilde:
            b.add_loop(v, beta)
        if i > 1:
            b.add_edge(v - 1, v, alpha)
    return b.build(0, name="phi_tilde" if tilde else "phi")


def psi_ray(alpha, beta, length: int) -> RootedWeightedGraph:
    """The ray Psi on ``-1..-length``: each neighbouring pair joined by an alpha- and a beta-edge."""
    if length < 1:
        raise DomainError("length must be at least 1")
    b = GraphBuilder()
    for i in range(1, length + 1):
        v = b.add_vertex(-i)
        if i > 1:
            b.add_edge(v - 1, v, alpha)
            b.add_edge(v - 1, v, beta)
    return b.build(0, name="psi")


def graph_union(g1: RootedWeightedGraph, g2: RootedWeightedGraph) -> RootedWeightedGraph:
    """Disjoint union with the two roots identified; labels become ``(0, l)`` / ``(1, l)``."""
    labels = [(0, lab) for lab in g1.labels]
    remap = {}
    for v, lab in enumerate(g2.labels):
        if v == g2.root:
            remap[v] = g1.root
        else:
            remap[v] = len(labels)
            labels.append((1, lab))
    edges = list(g1.edges) + [(remap[s], remap[d], w) for s, d, w in g2.edges]
    sym = g1.symmetric_real and g2.symmetric_real
    return RootedWeightedGraph(tuple(labels), tuple(edges), g1.root, sym, f"({g1.name} U {g2.name})")


def attach_delta(g: RootedWeightedGraph, w_out, w_in) -> RootedWeightedGraph:
    """New root ``"delta"`` joined to the old root with weights ``w(delta, v) = w_out``, ``w(v, delta) = w_in``."""
    labels = ("delta",) + tuple((1, lab) for lab in g.labels)
    edges = [(s + 1, d + 1, w) for s, d, w in g.edges]
    edges += [(0, g.root + 1, w_out), (g.root + 1, 0, w_in)]
    sym = g.symmetric_real and w_out == w_in and not isinstance(w_out, complex)
    return RootedWeightedGraph(labels, tuple(edges), 0, sym, f"d+{g.name}")


def star(g1: RootedWeightedGraph, g2: RootedWeightedGraph, w_out, w_in=None) -> RootedWeightedGraph:
    """``g1 * g2 = g1 U (delta + g2)``; the edge from g1's root to g2's root has weights ``w_out``/``w_in``."""
    return graph_union(g1, attach_delta(g2, w_out, w_out if w_in is None else w_in))


def merge_parallel_edges(graph: RootedWeightedGraph) -> RootedWeightedGraph:
    """Sum the weights of parallel directed edges (H is unchanged)."""
    total: dict[tuple[int, int], Number] = {}
    for s, d, w in graph.edges:
        total[(s, d)] = total.get((s, d), 0) + w
    edges = tuple((s, d, w) for (s, d), w in sorted(total.items()))
    return RootedWeightedGraph(graph.labels, edges, graph.root, graph.symmetric_real, graph.name)


class _SelfSimilarBuilder(GraphBuilder):
    """Grows the Delta graph inductively, cutting every branch at a metric radius."""

    def __init__(self, alpha, beta, radius):
        super().__init__()
        self.alpha, self.beta, self.radius = alpha, beta, radius
        self.depth: dict[int, int] = {}

    def vertex(self, label, depth):
        v = self.add_vertex(label)
        self.depth[v] = depth
        return v

    def phi_branch(self, root, addr, depth):
        prev = root
        for i in range(2, self.radius - depth + 2):
            v = self.vertex((addr, "phi", i), depth + i - 1)
            self.add_edge(prev, v, self.alpha)
            self.add_loop(v, self.beta)
            prev = v

    def psi_branch(self, head, addr, depth):
        """Psi ray whose vertex -1 (``head``) sits at ``depth``; returns nothing."""
        prev = head
        for j in range(2, self.radius - depth + 2):
            v = self.vertex((addr, "psi", -j), depth + j - 1)
            self.add_edge(prev, v, self.alpha)
            self.add_edge(prev, v, self.beta)
            prev = v

    def delta(self, root, addr, depth):
        """Attach Phi, a beta-child Delta, and alpha-Psi with its beta-child Delta at ``root``."""
        r = self.radius
        self.phi_branch(root, addr, depth)
        if depth + 1 > r:
            return
        w1 = self.vertex(addr + "b", depth + 1)
        self.add_edge(root, w1, self.beta)
        self.delta(w1, addr + "b", depth + 1)
        head = self.vertex((addr, "psi", -1), depth + 1)
        self.add_edge(root, head, self.alpha)
        self.psi_branch(head, addr, depth + 1)
        if depth + 2 <= r:
            w2 = self.vertex(addr + "a", depth + 2)
            self.add_edge(head, w2, self.beta)
            self.delta(w2, addr + "a", depth + 2)

    def finish(self, name):
        g = self.build(0, name=name)
        boundary = frozenset(v for v, d in self.depth.items() if d == self.radius)
        return BallTruncation(g, self.radius, boundary)


def delta_ball(alpha, beta, depth: int) -> BallTruncation:
    """Radius-``depth`` ball of the self-similar graph Delta around its root ``"v"``."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    b = _SelfSimilarBuilder(alpha, beta, depth)
    root = b.vertex("v", 0)
    b.delta(root, "v", 0)
    return b.finish("delta")


def upsilon_ball(alpha, beta, depth: int) -> BallTruncation:
    """Ball of ``Upsilon = PhiTilde_1 * (Psi_-1 * Delta_v)``, the Schreier graph of 1/2."""
    if depth < 0:
        raise DomainError("depth must be non-negative")
    b = _SelfSimilarBuilder(alpha, beta, depth)
    root = b.vertex("u", 0)
    b.add_loop(root, beta)
    b.phi_branch(root, "u", 0)
    if depth >= 1:
        head = b.vertex(("u", "psi", -1), 1)
        b.add_edge(root, head, alpha)
        b.psi_branch(head, "u", 1)
        if depth >= 2:
            v = b.vertex("v", 2)
            b.add_edge(head, v, beta)
            b.delta(v, "v", 2)
    return b.finish("upsilon")


def upsilon_by_operations(alpha, beta, depth: int) -> BallTruncation:
    """Same ball as :func:`upsilon_ball`, assembled with ``star`` from truncated pieces."""
    length = depth + 1
    inner = star(psi_ray(alpha, beta, length), delta_ball(alpha, beta, depth).graph, beta)
    whole = star(phi_ray(alpha, beta, length, tilde=True), inner, alpha)
    return restrict_ball(whole, depth)


# ---------------------------------------------------------------------------
# appendix graphs and finite examples


def appendix_graphs(kind: str, radius: int) -> BallTruncation:
    """Balls of the half-line, the half-line with two loops at 1, and the tree with rays."""
    if radius < 0:
        raise DomainError("radius must be non-negative")
    if kind in ("gamma_n", "gamma_loops"):
        b = GraphBuilder()
        for i in range(1, radius + 2):
            v = b.add_vertex(i)
            if i > 1:
                b.add_edge(v - 1, v, 1)
        if kind == "gamma_loops":
            b.add_loop(0, 1)
            b.add_loop(0, 1)
        g = b.build(0, name=kind)
        return BallTruncation(g, radius, frozenset({radius}))
    if kind == "gamma_tilde":
        b = GraphBuilder()
        depth = {}

        def add(label, d):
            v = b.add_vertex(label)
            depth[v] = d
            return v

        root = add(("T", ()), 0)
        frontier = [((), root)]
        tree = [((), root)]
        for d in range(1, radius + 1):
            nxt = []
            for word, u in frontier:
                for letter in range(4):
                    if word and word[-1] == letter:
                        continue
                    w = word + (letter,)
                    v = add(("T", w), d)
                    b.add_edge(u, v, 1)
                    nxt.append((w, v))
            tree.extend(nxt)
            frontier = nxt
        for word, u in tree:
            prev = u
            for j in range(2, radius - len(word) + 2):
                v = add(("R", word, j), len(word) + j - 1)
                b.add_edge(prev, v, 1)
                prev = v
        g = b.build(0, name=kind)
        return BallTruncation(g, radius, frozenset(v for v, d in depth.items() if d == radius))
    raise DomainError(f"unknown appendix graph {kind!r}")


def _hanoi_generator(i, j):
    def act(word):
        head, *tail = word
        if head == i:
            return (j, *tail)
        if head == j:
            return (i, *tail)
        return (head, *act(tail)) if tail else (head,)

    return act


def finite_examples(kind: str) -> RootedWeightedGraph:
    """``path5`` (unit-weight path on -2..2, root 0) or ``hanoi2`` (Hanoi towers, level 2)."""
    if kind == "path5":
        b = GraphBuilder()
        for i in range(-2, 3):
            v = b.add_vertex(i)
            if i > -2:
                b.add_edge(v - 1, v, 1)
        return b.build(2, name="path5")
    if kind == "hanoi2":
        b = GraphBuilder()
        words = list(product(range(3), repeat=2))
        for w in words:
            b.add_vertex("".join(map(str, w)))
        third = Fraction(1, 3)
        for w in words:
            for i, j in ((0, 1), (0, 2), (1, 2)):
                img = _hanoi_generator(i, j)(w)
                b.add_directed(b.index["".join(map(str, w))], b.index["".join(map(str, img))], third)
        return b.build(0, name="hanoi2")
    raise DomainError(f"unknown finite example {kind!r}")


# ---------------------------------------------------------------------------
# isomorphism of tree-like rooted graphs


def _encode(graph: RootedWeightedGraph, make) -> object:
    dist = graph.distances
    if any(d < 0 for d in dist):
        raise DomainError("graph is not connected from the root")
    loops = defaultdict(list)
    down = defaultdict(lambda: defaultdict(lambda: ([], [])))
    parents = defaultdict(set)
    for s, d, w in graph.edges:
        if s == d:
            loops[s].append(_weight_key(w))
        elif dist[d] == dist[s] + 1:
            down[s][d][0].append(_weight_key(w))
            parents[d].add(s)
        elif dist[s] == dist[d] + 1:
            down[d][s][1].append(_weight_key(w))
            parents[s].add(d)
        else:
            raise DomainError("graph is not tree-like (edge inside a distance layer)")
    if any(len(p) > 1 for p in parents.values()):
        raise DomainError("graph is not tree-like (vertex with two parents)")
    code = {}
    for v in sorted(range(len(graph)), key=lambda u: -dist[u]):
        children = sorted(
            (tuple(sorted(fw)), tuple(sorted(bw)), code[c]) for c, (fw, bw) in down[v].items()
        )
        code[v] = make((tuple(sorted(loops[v])), tuple(children)))
    return code[graph.root]


def canonical_form(graph: RootedWeightedGraph) -> tuple:
    """Label-free nested-tuple form of a tree-like rooted weighted graph.

    Parallel edges are kept as multisets of directed weights, so the form
    distinguishes a double edge from its merged single edge.
    """
    return _encode(graph, lambda raw: raw)


def is_isomorphic(g1: RootedWeightedGraph, g2: RootedWeightedGraph) -> bool:
    """Rooted weighted isomorphism for tree-like graphs (AHU-style interning)."""
    table: dict = {}

    def make(raw):
        return table.setdefault(raw, len(table))

    return _encode(g1, make) == _encode(g2, make)


def is_induced_subgraph(small: RootedWeightedGraph, big: RootedWeightedGraph) -> bool:
    """Label-wise check that ``small`` is the subgraph of ``big`` induced on its labels."""
    if not set(small.labels) <= set(big.index):
        return False
    keep = set(small.labels)

    def edge_multiset(g, labels):
        return sorted(
            ((g.labels[s], g.labels[d], _weight_key(w)) for s, d, w in g.edges
             if g.labels[s] in labels and g.labels[d] in labels),
            key=repr,
        )

    return edge_multiset(small, keep) == edge_multiset(big, keep)


def iter_edge_weights(graph: RootedWeightedGraph) -> Iterable[Number]:
    return (w for *_, w in graph.edges)
