"""Ordered graphs, labeled-tree enumeration, walk counts and the φ weights."""

from __future__ import annotations

import functools
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterator, NamedTuple

import networkx as nx
import numpy as np

from paspectra.config import settings

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OrderedGraph:
    """Small multigraph on v_1 < ... < v_t; ordered isomorphism is equality.

    ``edges`` is a sorted tuple of (i, j) with 1 <= i <= j <= t, repeated for
    parallel edges; (i, i) is a loop.
    """

    t: int
    edges: tuple[tuple[int, int], ...]

    @classmethod
    def from_edges(cls, t: int, edges) -> "OrderedGraph":
        norm = []
        for u, v in edges:
            i, j = (u, v) if u <= v else (v, u)
            if not 1 <= i <= j <= t:
                raise ValueError(f"edge ({u},{v}) outside vertices 1..{t}")
            norm.append((i, j))
        return cls(t, tuple(sorted(norm)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> tuple[int, ...]:
        """D(H); a loop adds 2."""
        deg = [0] * self.t
        for i, j in self.edges:
            deg[i - 1] += 1
            deg[j - 1] += 1
        return tuple(deg)

    def in_out_degrees(self) -> tuple[tuple[int, int], ...]:
        """Per vertex (d_in, d_out) with edges pointing from the larger to the smaller endpoint.

        A loop counts once in each direction.
        """
        din = [0] * self.t
        dout = [0] * self.t
        for i, j in self.edges:
            din[i - 1] += 1
            dout[j - 1] += 1
        return tuple(zip(din, dout))

    def multiplicities(self) -> Counter:
        return Counter(self.edges)

    def has_loops(self) -> bool:
        return any(i == j for i, j in self.edges)

    def is_simple(self) -> bool:
        return not self.has_loops() and len(set(self.edges)) == len(self.edges)

    def is_connected(self) -> bool:
        if self.t == 0:
            return False
        graph = nx.MultiGraph()
        graph.add_nodes_from(range(1, self.t + 1))
        graph.add_edges_from(self.edges)
        return nx.is_connected(graph)

    def is_tree(self) -> bool:
        return self.is_simple() and self.num_edges == self.t - 1 and self.is_connected()

    def adjacency(self) -> np.ndarray:
        """Integer adjacency with loops counted once on the diagonal."""
        mat = np.zeros((self.t, self.t), dtype=np.int64)
        for i, j in self.edges:
            mat[i - 1, j - 1] += 1
            if i != j:
                mat[j - 1, i - 1] += 1
        return mat

    def without(self, positions: tuple[int, ...]) -> "OrderedGraph":
        drop = set(positions)
        return OrderedGraph(self.t, tuple(e for k, e in enumerate(self.edges) if k not in drop))


# common shapes
SINGLE_LOOP = OrderedGraph(1, ((1, 1),))
DOUBLE_LOOP = OrderedGraph(1, ((1, 1), (1, 1)))
SINGLE_EDGE = OrderedGraph(2, ((1, 2),))
DOUBLE_EDGE = OrderedGraph(2, ((1, 2), (1, 2)))
PATH_CENTER_FIRST = OrderedGraph(3, ((1, 2), (1, 3)))
PATH_CENTER_MIDDLE = OrderedGraph(3, ((1, 2), (2, 3)))
PATH_CENTER_LAST = OrderedGraph(3, ((1, 3), (2, 3)))


# --- enumeration -----------------------------------------------------------------------


def iter_labeled_trees(t: int) -> Iterator[OrderedGraph]:
    """All t^{t-2} labeled trees on v_1..v_t by Prüfer decoding."""
    if t < 1:
        raise ValueError(f"tree size must be >= 1, got {t}")
    if t > settings.tree_vertex_cap:
        raise ValueError(f"tree enumeration refused: t={t} exceeds cap {settings.tree_vertex_cap}")
    if t == 1:
        yield OrderedGraph(1, ())
        return
    if t == 2:
        yield SINGLE_EDGE
        return
    for seq in itertools.product(range(t), repeat=t - 2):
        tree = nx.from_prufer_sequence(list(seq))
        yield OrderedGraph.from_edges(t, ((u + 1, v + 1) for u, v in tree.edges()))


def enumerate_labeled_trees(t: int) -> list[OrderedGraph]:
    return list(iter_labeled_trees(t))


def degree_sequences(t: int) -> Iterator[tuple[int, ...]]:
    """Ordered sequences of t positive integers summing to 2(t-1)."""
    if t == 1:
        yield (0,)
        return
    total = 2 * (t - 1)
    # stars and bars over the t-1 cut points of total
    for cuts in itertools.combinations(range(1, total), t - 1):
        bounds = (0, *cuts, total)
        yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


def moon_count(degrees: tuple[int, ...]) -> int:
    """Labeled trees with the given degree sequence: (t-2)! / ∏ (d_i - 1)!."""
    t = len(degrees)
    if t == 1 and tuple(degrees) == (0,):
        return 1
    if t < 2 or sum(degrees) != 2 * (t - 1) or min(degrees) < 1:
        log.warning("degree sequence %s is not a tree sequence", degrees)
        return 0
    value = math.factorial(t - 2)
    for d in degrees:
        value //= math.factorial(d - 1)
    return value


# --- walk counts ----------------------------------------------------------------------


def _trace_power(mat: np.ndarray, k: int) -> int:
    if k == 0:
        return int(mat.shape[0])
    big = mat.sum(axis=1).max(initial=0) if mat.size else 0
    if big and k * math.log2(max(big, 1)) >= 62:
        mat = mat.astype(object)
    power = np.linalg.matrix_power(mat, k) if mat.dtype != object else _object_power(mat, k)
    return int(sum(power[i, i] for i in range(power.shape[0])))


def _object_power(mat: np.ndarray, k: int) -> np.ndarray:
    out = mat.copy()
    for _ in range(k - 1):
        out = out.dot(mat)
    return out


def tree_shape(h: OrderedGraph) -> tuple:
    """Canonical unlabeled shape of a tree (rooted at the lexicographically least center)."""
    graph = nx.Graph()
    graph.add_nodes_from(range(h.t))
    graph.add_edges_from((i - 1, j - 1) for i, j in h.edges)
    if h.t == 1:
        return ()
    return min(nx.to_nested_tuple(graph, c, canonical_form=True) for c in nx.center(graph))


def _inclusion_exclusion(h: OrderedGraph, k: int) -> int:
    total = 0
    for size in range(h.num_edges + 1):
        sign = -1 if size % 2 else 1
        for omitted in itertools.combinations(range(h.num_edges), size):
            total += sign * _trace_power(h.without(omitted).adjacency(), k)
    return total


_TREE_WALKS: dict[tuple[tuple, int], int] = {}


@functools.lru_cache(maxsize=None)
def _graph_walks(h: OrderedGraph, k: int) -> int:
    return _inclusion_exclusion(h, k)


def walk_count_M(h: OrderedGraph, k: int) -> int:
    """Closed k-walks in H whose edge union is all of H (parallel edges distinguished).

    Σ_{F ⊆ E(H)} (-1)^{|F|} tr(A_{H∖F}^k); trees are cached by unlabeled shape.
    """
    if k < 0:
        raise ValueError(f"walk length must be >= 0, got {k}")
    if h.num_edges == 0:
        return 0
    if h.num_edges > k:
        return 0
    if h.is_tree():
        if k % 2:
            return 0
        if k < 2 * h.num_edges:
            return 0
        key = (tree_shape(h), k)
        if key not in _TREE_WALKS:
            _TREE_WALKS[key] = _inclusion_exclusion(h, k)
        else:
            log.debug("walk count cache hit: %d edges, k=%d", h.num_edges, k)
        return _TREE_WALKS[key]
    if not h.is_connected():
        return 0
    return _graph_walks(h, k)


def closed_form_walk_count(tree: OrderedGraph) -> int:
    """Closed walks of length 2|E| covering a tree: 2|E| ∏ (d(v) - 1)!."""
    edges = tree.num_edges
    return 2 * edges * math.prod(math.factorial(d - 1) for d in tree.degrees())


# --- weights ------------------------------------------------------------------------------


def rising(m: int, r: int) -> int:
    """[m]^r = m (m+1) ... (m+r-1)."""
    return math.prod(range(m, m + r))


def falling(m: int, r: int) -> int:
    """[m]_r = m (m-1) ... (m-r+1); zero once r > m."""
    if r > m:
        return 0
    return math.prod(range(m - r + 1, m + 1))


def phi(h: OrderedGraph, m: int) -> int:
    """∏_v [m]^{d_in(v)} [m]_{d_out(v)}."""
    value = 1
    for din, dout in h.in_out_degrees():
        value *= rising(m, din) * falling(m, dout)
        if not value:
            return 0
    return value


class MagnitudeExponents(NamedTuple):
    """E[X(H)] grows like n^{f/2} (log n)^g: f leaves, g degree-two vertices."""

    leaves: int
    degree_two: int

    @property
    def f_half(self) -> float:
        return self.leaves / 2

    @property
    def g(self) -> int:
        return self.degree_two


def magnitude_exponents(h: OrderedGraph) -> MagnitudeExponents:
    deg = h.degrees()
    return MagnitudeExponents(sum(1 for d in deg if d == 1), sum(1 for d in deg if d == 2))
