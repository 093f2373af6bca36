"""Counts X(H, G[V]) of ordered small graphs H inside a sampled multigraph.

A copy of H is an order-preserving injection v_i -> x_i together with a choice of
distinct G-edges for every H-edge: with multiplicities μ_G and μ_H this contributes
∏_{pairs} binom(μ_G(x_a, x_b), μ_H(a, b)). A vertex with two loops therefore holds
two single-loop copies and one double-loop copy.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Callable, Iterator

import numpy as np

from paspectra.config import settings
from paspectra.core.graph import GraphConfig, MultiGraph, generate, replicate_seed
from paspectra.core.trees import (
    DOUBLE_EDGE,
    DOUBLE_LOOP,
    PATH_CENTER_FIRST,
    PATH_CENTER_LAST,
    PATH_CENTER_MIDDLE,
    SINGLE_EDGE,
    SINGLE_LOOP,
    OrderedGraph,
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class VertexWindow:
    """Union of inclusive label ranges, e.g. S ∪ T = [1, s] ∪ [t, n]."""

    ranges: tuple[tuple[int, int], ...]

    @classmethod
    def of(cls, *ranges: tuple[int, int]) -> "VertexWindow":
        for lo, hi in ranges:
            if lo > hi:
                raise ValueError(f"empty window range [{lo}, {hi}]")
        return cls(tuple(sorted(ranges)))

    def contains(self, labels: np.ndarray) -> np.ndarray:
        mask = np.zeros(labels.shape, dtype=bool)
        for lo, hi in self.ranges:
            mask |= (labels >= lo) & (labels <= hi)
        return mask


def restrict(g: MultiGraph, window: VertexWindow | None) -> MultiGraph:
    """G[V]: edges with both endpoints in the window."""
    if window is None:
        return g
    keep = window.contains(g.low) & window.contains(g.high)
    return g.subgraph(keep)


def _check_pattern(h: OrderedGraph) -> None:
    if h.t > settings.census_max_vertices or h.num_edges > settings.census_max_edges:
        raise ValueError(
            f"census refused: H has {h.t} vertices / {h.num_edges} edges "
            f"(cap {settings.census_max_vertices}/{settings.census_max_edges})"
        )
    if h.num_edges == 0:
        raise ValueError("H must have at least one edge")
    if not h.is_connected():
        raise ValueError("H must be connected with no isolated vertices")


# --- multiplicity tables -----------------------------------------------------------


def _pair_multiplicities(g: MultiGraph) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Distinct (low, high) pairs with their multiplicities."""
    if g.num_edges == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty, empty
    pairs = np.stack([g.low, g.high], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    return uniq[:, 0], uniq[:, 1], counts.astype(np.int64)


def _binom_sum(values: np.ndarray, k: int) -> int:
    if k == 1:
        return int(values.sum())
    if k == 2:
        return int((values * (values - 1) // 2).sum())
    return sum(math.comb(int(v), k) for v in values.tolist())


def _count_loops(g: MultiGraph, copies: int) -> int:
    lo, hi, mult = _pair_multiplicities(g)
    return _binom_sum(mult[lo == hi], copies)


def _count_parallel(g: MultiGraph, copies: int) -> int:
    lo, hi, mult = _pair_multiplicities(g)
    return _binom_sum(mult[lo != hi], copies)


def _paths(g: MultiGraph, center: str) -> int:
    """2-edge paths a-b-c with a < b < c; the center is first, middle or last."""
    lo, hi, mult = _pair_multiplicities(g)
    proper = lo != hi
    lo, hi, mult = lo[proper], hi[proper], mult[proper]
    size = g.n + 1
    up = np.bincount(lo, weights=mult, minlength=size).astype(np.int64)  # edges to newer
    down = np.bincount(hi, weights=mult, minlength=size).astype(np.int64)  # edges to older
    if center == "middle":
        return int(np.dot(up, down))
    if center == "first":
        squares = np.bincount(lo, weights=mult * mult, minlength=size).astype(np.int64)
        return int(((up * up - squares) // 2).sum())
    squares = np.bincount(hi, weights=mult * mult, minlength=size).astype(np.int64)
    return int(((down * down - squares) // 2).sum())


_FAST_COUNTERS: dict[OrderedGraph, Callable[[MultiGraph], int]] = {
    SINGLE_LOOP: lambda g: _count_loops(g, 1),
    DOUBLE_LOOP: lambda g: _count_loops(g, 2),
    SINGLE_EDGE: lambda g: _count_parallel(g, 1),
    DOUBLE_EDGE: lambda g: _count_parallel(g, 2),
    PATH_CENTER_FIRST: lambda g: _paths(g, "first"),
    PATH_CENTER_MIDDLE: lambda g: _paths(g, "middle"),
    PATH_CENTER_LAST: lambda g: _paths(g, "last"),
}


# --- generic counting --------------------------------------------------------------------


class _Neighbourhoods:
    """Adjacency lists with multiplicities over original labels."""

    def __init__(self, g: MultiGraph) -> None:
        lo, hi, mult = _pair_multiplicities(g)
        self.mult: dict[tuple[int, int], int] = {}
        self.nbrs: dict[int, list[int]] = defaultdict(list)
        for a, b, c in zip(lo.tolist(), hi.tolist(), mult.tolist()):
            self.mult[(a, b)] = c
            if a != b:
                self.nbrs[a].append(b)
                self.nbrs[b].append(a)
        self.vertices = sorted(set(lo.tolist()) | set(hi.tolist()))

    def multiplicity(self, a: int, b: int) -> int:
        return self.mult.get((a, b) if a <= b else (b, a), 0)


def _copies(h_mult: dict[tuple[int, int], int], image: list[int], tables: _Neighbourhoods) -> int:
    total = 1
    for (i, j), need in h_mult.items():
        have = tables.multiplicity(image[i - 1], image[j - 1])
        if have < need:
            return 0
        total *= math.comb(have, need)
    return total


def _expansion_order(h: OrderedGraph) -> list[tuple[int, int | None]]:
    """BFS over H from v_1: (vertex, already-placed neighbour) pairs."""
    adj: dict[int, set[int]] = defaultdict(set)
    for i, j in h.edges:
        if i != j:
            adj[i].add(j)
            adj[j].add(i)
    order: list[tuple[int, int | None]] = [(1, None)]
    seen = {1}
    queue = [1]
    while queue:
        v = queue.pop(0)
        for w in sorted(adj[v]):
            if w not in seen:
                seen.add(w)
                order.append((w, v))
                queue.append(w)
    return order


def _count_generic(g: MultiGraph, h: OrderedGraph) -> int:
    tables = _Neighbourhoods(g)
    h_mult = dict(h.multiplicities())
    order = _expansion_order(h)
    image = [0] * h.t

    def consistent(v: int, x: int) -> bool:
        # order preserved against everything already placed
        for u, _ in order:
            y = image[u - 1]
            if not y or u == v:
                continue
            if (u < v and not y < x) or (u > v and not y > x):
                return False
        return True

    def extend(pos: int) -> int:
        if pos == len(order):
            return _copies(h_mult, image, tables)
        v, anchor = order[pos]
        candidates = tables.vertices if anchor is None else tables.nbrs[image[anchor - 1]]
        total = 0
        for x in candidates:
            if consistent(v, x):
                image[v - 1] = x
                total += extend(pos + 1)
                image[v - 1] = 0
        return total

    return extend(0)


def count_ordered_subgraphs(
    g: MultiGraph, h: OrderedGraph, window: VertexWindow | None = None
) -> int:
    """X(H, G[V]) with multiplicity over parallel edges and loops."""
    _check_pattern(h)
    if h.t > g.num_vertices:
        return 0
    g = restrict(g, window)
    fast = _FAST_COUNTERS.get(h)
    if fast is not None:
        return fast(g)
    return _count_generic(g, h)


def count_ordered_subgraphs_naive(g: MultiGraph, h: OrderedGraph) -> int:
    """Oracle: every increasing t-tuple of labels, multiplicities multiplied out."""
    _check_pattern(h)
    tables = _Neighbourhoods(g)
    h_mult = dict(h.multiplicities())
    labels = g.labels().tolist()
    return sum(
        _copies(h_mult, list(image), tables) for image in itertools.combinations(labels, h.t)
    )


def enumerate_ordered_graphs(max_vertices: int, max_edges: int) -> Iterator[OrderedGraph]:
    """Connected ordered multigraphs (loops allowed) with no isolated vertex."""
    for t in range(1, max_vertices + 1):
        pairs = [(i, j) for i in range(1, t + 1) for j in range(i, t + 1)]
        for e in range(max(1, t - 1), max_edges + 1):
            for chosen in itertools.combinations_with_replacement(pairs, e):
                h = OrderedGraph(t, tuple(chosen))
                if h.is_connected():
                    yield h


# --- theory comparison -----------------------------------------------------------------------


def expected_path2_count(m: int, n: int) -> float:
    """Leading order of E[X(center-first path)] = m(m+1) n ln n / 2."""
    return m * (m + 1) * n * math.log(n) / 2.0


PATTERNS: dict[str, OrderedGraph] = {
    "loop": SINGLE_LOOP,
    "double-loop": DOUBLE_LOOP,
    "edge": SINGLE_EDGE,
    "double-edge": DOUBLE_EDGE,
    "path-center-first": PATH_CENTER_FIRST,
    "path-center-middle": PATH_CENTER_MIDDLE,
    "path-center-last": PATH_CENTER_LAST,
}


def predicted_count(pattern: OrderedGraph, m: int, n: int) -> tuple[float, str]:
    """(prediction, formula id) for the patterns with a known leading order."""
    if pattern == PATH_CENTER_FIRST:
        return expected_path2_count(m, n), "m(m+1)n·ln(n)/2"
    if pattern == SINGLE_EDGE:
        return float(m * n), "mn"
    # H2/H3 orderings and the rest: only the linear scale is claimed
    return float(n), "n"


@dataclass
class CensusReport:
    pattern: OrderedGraph
    m: int
    n: int
    counts: list[int] = field(default_factory=list)
    seeds: list[int] = field(default_factory=list)
    predicted: float = 0.0
    formula: str = ""

    @property
    def samples(self) -> int:
        return len(self.counts)

    @property
    def mean(self) -> float:
        return float(np.mean(self.counts)) if self.counts else 0.0

    @property
    def ratio(self) -> float:
        return self.mean / self.predicted if self.predicted else math.nan


def census_vs_theory(
    pattern: OrderedGraph, cfg: GraphConfig, replicates: int
) -> CensusReport:
    """Sequential census over seeds cfg.seed + r; the harness parallelizes replicates itself."""
    predicted, formula = predicted_count(pattern, cfg.m, cfg.n)
    report = CensusReport(pattern=pattern, m=cfg.m, n=cfg.n, predicted=predicted, formula=formula)
    for r in range(replicates):
        seed = replicate_seed(cfg.seed, r)
        g = generate(GraphConfig(m=cfg.m, n=cfg.n, seed=seed))
        report.counts.append(count_ordered_subgraphs(g, pattern))
        report.seeds.append(seed)
    log.info("census %s: mean %.4g vs %s = %.4g", pattern.edges, report.mean, formula, predicted)
    return report
