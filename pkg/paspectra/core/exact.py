"""Exact probabilities of labeled edge sets in G_{1,n}, plus a brute-force process atlas.

A labeled edge (j, i) means vertex j chose X_j = i, so i <= j and every vertex has
out-degree at most one. The closed form is

    P[S ⊆ G_{1,n}] = ∏_{i∈V⁻} d_in(i,S) · ∏_{i∈V⁺} 1/(2i-1) · ∏_{i∉V⁺} (1 + C_S(i)/(2i-1))

with C_S(t) the number of edges (j, i) of S with i <= t <= j. All arithmetic is in
``fractions.Fraction`` so atlas comparisons are exact.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Iterator, NamedTuple

import numpy as np

from paspectra.config import settings

log = logging.getLogger(__name__)

Edge = tuple[int, int]  # (out-vertex j, in-vertex i), i <= j

INITIAL_LOOP: Edge = (1, 1)


@dataclass(frozen=True)
class LabeledGraph:
    """A set of labeled edges (j -> i) inside the uncollapsed process."""

    edges: frozenset[Edge]

    @classmethod
    def of(cls, *edges: Edge) -> "LabeledGraph":
        for j, i in edges:
            if not 1 <= i <= j:
                raise ValueError(f"labeled edge ({j}->{i}) must satisfy 1 <= i <= j")
        return cls(frozenset(edges))

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def in_vertices(self) -> set[int]:
        return {i for _, i in self.edges}

    @property
    def out_vertices(self) -> set[int]:
        return {j for j, _ in self.edges}

    @property
    def vertices(self) -> set[int]:
        return self.in_vertices | self.out_vertices

    def in_degree(self, i: int) -> int:
        return sum(1 for _, target in self.edges if target == i)

    def max_out_degree(self) -> int:
        if not self.edges:
            return 0
        counts: dict[int, int] = {}
        for j, _ in self.edges:
            counts[j] = counts.get(j, 0) + 1
        return max(counts.values())

    def crossing(self, t: int) -> int:
        """C_S(t): edges (j -> i) with i <= t <= j."""
        return sum(1 for j, i in self.edges if i <= t <= j)

    def max_vertex(self) -> int:
        return max(self.vertices, default=0)

    def without_initial_loop(self) -> "LabeledGraph":
        return LabeledGraph(self.edges - {INITIAL_LOOP})

    def union(self, other: "LabeledGraph") -> "LabeledGraph":
        return LabeledGraph(self.edges | other.edges)


def _validated(s: LabeledGraph, n: int) -> LabeledGraph | None:
    """Drop the initial loop (it is present with probability 1); None if impossible."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if s.max_vertex() > n:
        raise ValueError(f"labeled graph uses vertex {s.max_vertex()} > n={n}")
    if s.max_out_degree() > 1:
        log.warning("labeled graph has a vertex with out-degree > 1; probability is 0")
        return None
    return s.without_initial_loop()


def labeled_probability_exact(s: LabeledGraph, n: int) -> Fraction:
    """P[S ⊆ G_{1,n}] as an exact rational."""
    s = _validated(s, n)
    if s is None:
        return Fraction(0)
    if not s.edges:
        return Fraction(1)

    # C_S(t) for every t via a difference array over [i, j]
    diff = [0] * (n + 2)
    for j, i in s.edges:
        diff[i] += 1
        diff[j + 1] -= 1
    crossing = list(itertools.accumulate(diff))

    out = s.out_vertices
    value = Fraction(1)
    for i in s.in_vertices:
        value *= math.factorial(s.in_degree(i))
    for i in range(1, n + 1):
        if i in out:
            value /= 2 * i - 1
        elif crossing[i]:
            value *= 1 + Fraction(crossing[i], 2 * i - 1)
    return value


class ApproxProbability(NamedTuple):
    value: float
    lower: float
    upper: float

    def contains(self, x: float) -> bool:
        return self.lower <= x <= self.upper


def labeled_probability_approx(
    s: LabeledGraph, n: int, band_constant: float = 1.0
) -> ApproxProbability:
    """∏ d_in! · ∏ 1/(2√(ij)) with the multiplicative band exp(±c·Σ C_S(i)²/i)."""
    s = _validated(s, n)
    if s is None:
        return ApproxProbability(0.0, 0.0, 0.0)
    if not s.edges:
        return ApproxProbability(1.0, 1.0, 1.0)

    log_value = sum(math.lgamma(s.in_degree(i) + 1) for i in s.in_vertices)
    log_value -= sum(math.log(2.0) + 0.5 * math.log(i * j) for j, i in s.edges)
    spread = band_constant * sum(s.crossing(i) ** 2 / i for i in s.vertices)
    value = math.exp(log_value)
    return ApproxProbability(value, value * math.exp(-spread), value * math.exp(spread))


# --- brute-force atlas ---------------------------------------------------------------


@dataclass(frozen=True)
class ProcessAtlas:
    """Every choice sequence X_1..X_n of G_{1,n} with its exact probability.

    Probabilities are stored as integer numerators over the common denominator
    ∏_{t=2..n} (2t-1); ``choices[r, t-1]`` is X_t of outcome r (X_1 = 1 always).
    """

    n: int
    choices: np.ndarray
    numerators: np.ndarray
    denominator: int

    def __len__(self) -> int:
        return int(self.choices.shape[0])

    @property
    def outcomes(self) -> list[tuple[tuple[int, ...], Fraction]]:
        """(X_2..X_n, probability) pairs."""
        return [
            (tuple(row[1:]), Fraction(int(num), self.denominator))
            for row, num in zip(self.choices.tolist(), self.numerators.tolist())
        ]

    def total(self) -> Fraction:
        return Fraction(int(self.numerators.sum()), self.denominator)

    def edge_sets(self) -> Iterator[tuple[frozenset[Edge], Fraction]]:
        for row, num in zip(self.choices.tolist(), self.numerators.tolist()):
            edges = frozenset((t, x) for t, x in enumerate(row, start=1))
            yield edges, Fraction(int(num), self.denominator)


def _walk_outcomes(n: int) -> Iterator[tuple[list[int], int]]:
    """Depth-first over choice sequences, carrying integer weights."""
    deg = [0] * (n + 1)
    deg[1] = 2
    choices = [1]

    def step(t: int, weight: int) -> Iterator[tuple[list[int], int]]:
        if t > n:
            yield list(choices), weight
            return
        for x in range(1, t + 1):
            w = 1 if x == t else deg[x]
            if not w:
                continue
            choices.append(x)
            deg[x] += 1
            deg[t] += 1
            yield from step(t + 1, weight * w)
            deg[t] -= 1
            deg[x] -= 1
            choices.pop()

    yield from step(2, 1)


def enumerate_process(n: int) -> ProcessAtlas:
    """Full outcome tree of G_{1,n}; refuses n above the atlas cap."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if n > settings.atlas_cap:
        raise ValueError(f"atlas refused: n={n} exceeds cap {settings.atlas_cap}")

    rows, nums = [], []
    for choices, weight in _walk_outcomes(n):
        rows.append(choices)
        nums.append(weight)
    denominator = math.prod(2 * t - 1 for t in range(2, n + 1))
    atlas = ProcessAtlas(
        n=n,
        choices=np.asarray(rows, dtype=np.int64).reshape(len(rows), n),
        numerators=np.asarray(nums, dtype=np.int64),
        denominator=denominator,
    )
    log.debug("atlas n=%d: %d outcomes", n, len(atlas))
    return atlas


def _mask(atlas: ProcessAtlas, s: LabeledGraph) -> np.ndarray:
    mask = np.ones(len(atlas), dtype=bool)
    for j, i in s.edges:
        if j > atlas.n:
            return np.zeros(len(atlas), dtype=bool)
        mask &= atlas.choices[:, j - 1] == i
    return mask


def marginal(atlas: ProcessAtlas, s: LabeledGraph) -> Fraction:
    """P[S ⊆ G_{1,n}] read off the atlas."""
    return Fraction(int(atlas.numerators[_mask(atlas, s)].sum()), atlas.denominator)


def event_probability(
    atlas: ProcessAtlas, predicate: Callable[[frozenset[Edge]], bool]
) -> Fraction:
    """Probability of an arbitrary event given as a predicate on the edge set."""
    total = 0
    for row, num in zip(atlas.choices.tolist(), atlas.numerators.tolist()):
        if predicate(frozenset((t, x) for t, x in enumerate(row, start=1))):
            total += num
    return Fraction(total, atlas.denominator)


def labeled_graphs(n: int, max_edges: int, include_initial_loop: bool = False) -> Iterator[LabeledGraph]:
    """All labeled graphs in G_{1,n} with 1..max_edges edges and out-degree <= 1."""
    first = 1 if include_initial_loop else 2
    outs = range(first, n + 1)
    for size in range(1, max_edges + 1):
        for sources in itertools.combinations(outs, size):
            for targets in itertools.product(*(range(1, j + 1) for j in sources)):
                yield LabeledGraph(frozenset(zip(sources, targets)))


class CorrelationViolation(NamedTuple):
    first: LabeledGraph
    second: LabeledGraph
    joint: Fraction
    product: Fraction


@dataclass
class CorrelationReport:
    n: int
    max_edges: int
    pairs_checked: int = 0
    violations: list[CorrelationViolation] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_negative_correlation(n: int, max_edges: int = 2) -> CorrelationReport:
    """P[H1 ∪ H2] <= P[H1]·P[H2] for vertex-disjoint labeled graphs, from the atlas."""
    if n > 6:
        raise ValueError(f"negative-correlation sweep refused: n={n} > 6")
    atlas = enumerate_process(n)
    graphs = list(labeled_graphs(n, max_edges))
    masks = [_mask(atlas, h) for h in graphs]
    probs = [int(atlas.numerators[mk].sum()) for mk in masks]
    denom = atlas.denominator

    report = CorrelationReport(n=n, max_edges=max_edges)
    for a, b in itertools.combinations(range(len(graphs)), 2):
        h1, h2 = graphs[a], graphs[b]
        if h1.vertices & h2.vertices:
            continue
        report.pairs_checked += 1
        joint = int(atlas.numerators[masks[a] & masks[b]].sum())
        # joint/denom <= (pa/denom)(pb/denom)  <=>  joint*denom <= pa*pb
        if joint * denom > probs[a] * probs[b]:
            report.violations.append(
                CorrelationViolation(
                    h1, h2, Fraction(joint, denom), Fraction(probs[a] * probs[b], denom**2)
                )
            )
    if report.violations:
        log.error("negative correlation violated in %d pairs", len(report.violations))
    return report


@dataclass
class OracleReport:
    n: int
    max_edges: int
    checked: int = 0
    mismatches: list[tuple[LabeledGraph, Fraction, Fraction]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.mismatches


def oracle_suite(n: int, max_edges: int = 3, graphs: Iterable[LabeledGraph] | None = None) -> OracleReport:
    """Closed form vs atlas for every labeled graph with <= max_edges edges."""
    atlas = enumerate_process(n)
    report = OracleReport(n=n, max_edges=max_edges)
    source = graphs if graphs is not None else labeled_graphs(n, max_edges, include_initial_loop=True)
    for s in source:
        report.checked += 1
        exact = labeled_probability_exact(s, n)
        seen = marginal(atlas, s)
        if exact != seen:
            report.mismatches.append((s, exact, seen))
    log.info("oracle n=%d: %d graphs, %d mismatches", n, report.checked, len(report.mismatches))
    return report
