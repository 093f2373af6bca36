"""Preferential-attachment graphs: generation, collapsing, truncation, degrees, edge-list IO.

Sampling mechanism for G_{1,n}: a flat endpoint array holds both endpoints of every edge
created so far. At step t the new vertex t adds one phantom slot, so there are 2t-1 slots
in total. Drawing one slot uniformly picks vertex i with probability d(i, G_{1,t-1})/(2t-1),
and the phantom slot (probability 1/(2t-1)) gives a loop at t. The whole run is O(n).
"""

from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, TextIO

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

log = logging.getLogger(__name__)

SEED_MODULUS = 2**64


class GraphConfig(BaseModel):
    """Parameters of G_{m,n}."""

    model_config = ConfigDict(frozen=True)

    m: int = Field(ge=1, description="edges added per step")
    n: int = Field(ge=1, description="vertex count")
    seed: int = Field(default=0, ge=0, lt=SEED_MODULUS)


class TruncationSpec(BaseModel):
    """Deletes the oldest ceil(epsilon*n) vertices."""

    model_config = ConfigDict(frozen=True)

    epsilon: float = Field(gt=0.0, lt=1.0)

    def cut(self, n: int) -> int:
        # the 1e-9 slack keeps products like 0.3*10 from rounding up to 4
        return max(0, math.ceil(self.epsilon * n - 1e-9))


@dataclass(frozen=True)
class MultiGraph:
    """Undirected multigraph with loops on the labels [vertex_offset, n].

    Edges are stored in birth order as two parallel arrays with low <= high;
    ``high`` is the vertex whose step created the edge in the uncollapsed process.
    """

    n: int
    low: np.ndarray
    high: np.ndarray
    m: int = 1
    seed: int = 0
    vertex_offset: int = 1

    def __post_init__(self) -> None:
        if self.low.shape != self.high.shape:
            raise ValueError("edge endpoint arrays differ in length")
        if self.low.size and (
            self.low.min() < self.vertex_offset or self.high.max() > self.n
        ):
            raise ValueError(
                f"edge endpoint outside [{self.vertex_offset}, {self.n}]"
            )
        self.low.setflags(write=False)
        self.high.setflags(write=False)

    @property
    def num_vertices(self) -> int:
        return self.n - self.vertex_offset + 1

    @property
    def num_edges(self) -> int:
        return int(self.low.size)

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.low.tolist(), self.high.tolist()))

    def loops(self) -> int:
        return int(np.count_nonzero(self.low == self.high))

    def labels(self) -> np.ndarray:
        return np.arange(self.vertex_offset, self.n + 1, dtype=np.int64)

    def degree_array(self) -> np.ndarray:
        """Degrees indexed by ``label - vertex_offset``; a loop adds 2."""
        size = self.num_vertices
        return np.bincount(self.low - self.vertex_offset, minlength=size) + np.bincount(
            self.high - self.vertex_offset, minlength=size
        )

    def subgraph(self, keep: np.ndarray, vertex_offset: int | None = None) -> "MultiGraph":
        """Edges selected by a boolean mask, same label space."""
        return MultiGraph(
            n=self.n,
            low=self.low[keep].copy(),
            high=self.high[keep].copy(),
            m=self.m,
            seed=self.seed,
            vertex_offset=self.vertex_offset if vertex_offset is None else vertex_offset,
        )


def empty_graph(n: int, m: int = 1, vertex_offset: int = 1) -> MultiGraph:
    none = np.empty(0, dtype=np.int64)
    return MultiGraph(n=n, low=none, high=none.copy(), m=m, vertex_offset=vertex_offset)


def graph_from_edges(
    n: int,
    edges: list[tuple[int, int]],
    m: int = 1,
    seed: int = 0,
    vertex_offset: int = 1,
) -> MultiGraph:
    """Build a MultiGraph from (u, v) pairs in any orientation."""
    if not edges:
        return empty_graph(n, m, vertex_offset)
    arr = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    return MultiGraph(
        n=n,
        low=arr.min(axis=1),
        high=arr.max(axis=1),
        m=m,
        seed=seed,
        vertex_offset=vertex_offset,
    )


def replicate_seed(base_seed: int, r: int) -> int:
    """Seed of replicate r: base_seed + r, wrapped to 64 bits."""
    return (base_seed + r) % SEED_MODULUS


def generate_g1(n: int, seed: int) -> MultiGraph:
    """Sample G_{1,n}; step t attaches vertex t to X_t with P[X_t = i] = d(i)/(2t-1)."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")

    rng = np.random.default_rng(seed)
    # draws[t-1] is uniform on the 2t-1 slots {0, ..., 2t-2}
    draws = rng.integers(0, np.arange(1, 2 * n, 2, dtype=np.int64)).tolist()

    ends = [0] * (2 * n)
    targets = [0] * n
    for t in range(1, n + 1):
        r = draws[t - 1]
        phantom = 2 * t - 2
        target = t if r == phantom else ends[r]
        ends[phantom] = t
        ends[phantom + 1] = target
        targets[t - 1] = target

    new = np.arange(1, n + 1, dtype=np.int64)
    old = np.asarray(targets, dtype=np.int64)
    g = MultiGraph(n=n, low=old, high=new, m=1, seed=seed)
    if not verify_degree_sums(g):
        raise RuntimeError(f"G_(1,t) degree sum differs from 2t (n={n}, seed={seed})")
    return g


def collapse(g1: MultiGraph, m: int) -> MultiGraph:
    """Merge vertices (a-1)m+1 .. am of G_{1,mn} into vertex a."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if g1.vertex_offset != 1:
        raise ValueError("collapse expects an untruncated graph")
    if g1.n % m:
        raise ValueError(f"vertex count {g1.n} is not divisible by m={m}")
    if m == 1:
        return g1
    return MultiGraph(
        n=g1.n // m,
        low=(g1.low - 1) // m + 1,
        high=(g1.high - 1) // m + 1,
        m=m,
        seed=g1.seed,
    )


def generate(cfg: GraphConfig) -> MultiGraph:
    """G_{m,n}: sample G_{1,mn} and collapse."""
    g = collapse(generate_g1(cfg.m * cfg.n, cfg.seed), cfg.m)
    log.debug("generated G_{%d,%d} seed=%d (%d edges)", cfg.m, cfg.n, cfg.seed, g.num_edges)
    return g


def truncate_first(g: MultiGraph, cut: int) -> MultiGraph:
    """Remove vertices 1..cut with their edges; labels are kept."""
    if cut < 0:
        raise ValueError(f"cut must be >= 0, got {cut}")
    if cut == 0:
        return g
    if cut >= g.n:
        # kept labels [cut+1, n] are empty
        log.warning("cut %d removes every vertex of an n=%d graph", cut, g.n)
        return empty_graph(g.n, g.m, vertex_offset=g.n + 1)
    keep = g.low > cut
    return g.subgraph(keep, vertex_offset=max(g.vertex_offset, cut + 1))


def truncate(g: MultiGraph, spec: TruncationSpec | float) -> MultiGraph:
    """G_{eps,m,n}: delete the first ceil(eps*n) vertices."""
    if not isinstance(spec, TruncationSpec):
        if not 0.0 < float(spec) < 1.0:
            raise ValueError(f"epsilon must lie in (0, 1), got {spec}")
        spec = TruncationSpec(epsilon=float(spec))
    return truncate_first(g, spec.cut(g.n))


# --- degrees -----------------------------------------------------------------


def degrees(g: MultiGraph) -> list[tuple[int, int]]:
    """(vertex, degree) for every live vertex; loops count 2."""
    return list(zip(g.labels().tolist(), g.degree_array().tolist()))


class TopDegrees(NamedTuple):
    values: list[int]
    vertices: list[int]
    truncated: bool


def top_degrees(g: MultiGraph, k: int) -> TopDegrees:
    """Delta_1 >= ... >= Delta_K; equal degrees go to the smaller label first."""
    if k < 0:
        raise ValueError(f"K must be >= 0, got {k}")
    deg = g.degree_array()
    labels = g.labels()
    order = np.lexsort((labels, -deg))
    truncated = k > g.num_vertices
    if truncated:
        log.warning("asked for %d top degrees of a %d-vertex graph", k, g.num_vertices)
    order = order[:k]
    return TopDegrees(deg[order].tolist(), labels[order].tolist(), truncated)


def scaled_vertex_degree(g: MultiGraph, i: int) -> float:
    """d(i)·sqrt(i/n), which stays of order one as n grows."""
    if not g.vertex_offset <= i <= g.n:
        raise ValueError(f"vertex {i} not in graph")
    return float(g.degree_array()[i - g.vertex_offset]) * math.sqrt(i / g.n)


def second_degree_moment(g: MultiGraph) -> int:
    deg = g.degree_array().astype(np.int64)
    return int(np.dot(deg, deg))


# --- replay checks -------------------------------------------------------------


def verify_degree_sums(g1: MultiGraph) -> bool:
    """Replay check: the degree sum of G_{1,t}, vertices [1, t] and edges born by step t, is 2t.

    Edge index e (0-based) is born at step e+1. An endpoint v of that edge is counted in
    G_{1,t} from step max(v, e+1) on, so binning endpoints by that step and taking prefix
    sums gives every G_{1,t} degree sum at once.
    """
    if g1.m != 1 or g1.vertex_offset != 1 or g1.num_edges != g1.n:
        return False
    birth = np.arange(1, g1.n + 1, dtype=np.int64)
    seen = np.concatenate([np.maximum(g1.low, birth), np.maximum(g1.high, birth)])
    prefix = np.cumsum(np.bincount(seen, minlength=g1.n + 1)[1:])
    return bool(np.array_equal(prefix, 2 * birth))


def verify_out_degree_cap(g: MultiGraph) -> bool:
    """Each vertex a sends exactly m edges to vertices <= a, in birth order."""
    if g.vertex_offset != 1 or g.num_edges != g.m * g.n:
        return False
    expected = np.repeat(np.arange(1, g.n + 1, dtype=np.int64), g.m)
    return bool(np.array_equal(g.high, expected) and np.all(g.low <= g.high))


# --- edge-list IO ----------------------------------------------------------------


def write_edge_list(g: MultiGraph, dest: Path | str | TextIO) -> None:
    """Header ``pa m n seed vertex_offset`` then one ``u v`` line per edge."""
    lines = [f"pa {g.m} {g.n} {g.seed} {g.vertex_offset}"]
    lines.extend(f"{u} {v}" for u, v in zip(g.low.tolist(), g.high.tolist()))
    text = "\n".join(lines) + "\n"
    if isinstance(dest, (str, Path)):
        Path(dest).write_text(text, encoding="utf-8")
    else:
        dest.write(text)


def edge_list_text(g: MultiGraph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()


def read_edge_list(src: Path | str | TextIO) -> MultiGraph:
    if isinstance(src, (str, Path)):
        text = Path(src).read_text(encoding="utf-8")
    else:
        text = src.read()
    lines = text.splitlines()
    if not lines:
        raise ValueError("empty edge-list file")
    header = lines[0].split()
    if len(header) != 5 or header[0] != "pa":
        raise ValueError(f"line 1: bad edge-list header {lines[0]!r}")
    m, n, seed, offset = (int(x) for x in header[1:])
    pairs = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ValueError(f"line {lineno}: expected 'u v', got {line!r}")
        pairs.append((int(parts[0]), int(parts[1])))
    if not pairs:
        return empty_graph(n, m, offset)
    arr = np.asarray(pairs, dtype=np.int64)
    if np.any(arr[:, 0] > arr[:, 1]):
        raise ValueError("edge-list pairs must be written as u <= v")
    # stored orientation is kept verbatim so that the round trip is byte-exact
    return MultiGraph(n=n, low=arr[:, 0], high=arr[:, 1], m=m, seed=seed, vertex_offset=offset)

