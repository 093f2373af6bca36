"""Top eigenpairs, the four-piece star decomposition, and perturbation certificates.

With S = [1, s] and T = [t+1, n]:

* G1 = G[1, t], every edge with both endpoints among the first t vertices;
* G2 = G[s, n];
* G(S, T) is split by T-vertex: a vertex of T with two or more S-edges (parallel
  edges included) sends all of them to G3, the rest form G4.

G4 is a forest of stars centred in S, so λ_i(G4) = √(i-th star size). Every edge
of G outside G4 lies in G1, G3 or G[s+1, n] ⊆ G2, which gives the Weyl sandwich
|λ_i(G) - λ_i(G4)| <= ||G1|| + ||G2|| + ||G3||, and for u in S the degree splits as
d(u, G) = d(u, G4) + L(u) with L(u) = d(u, G1) + d(u, G3).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.sparse.linalg import eigsh

from paspectra.config import settings
from paspectra.core.graph import MultiGraph, top_degrees
from paspectra.core.spectra import (
    AdjacencyMatrix,
    EigenPair,
    _as_dense,
    _check_symmetric,
    _descending,
    adjacency,
    graph_norm,
    norm_upper_bound,
)

log = logging.getLogger(__name__)

EigenMethod = Literal["lanczos", "power"]

DENSE_SOLVE_LIMIT = 500


def _ceil_power(n: int, exponent: float) -> int:
    # slack keeps exact powers (128^(1/7) = 2) from rounding up
    return max(1, math.ceil(n**exponent - 1e-9))


class DecompositionParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    s: int = Field(ge=1)
    t_thresh: int = Field(ge=1)
    k: int = Field(ge=1)
    b: int = Field(ge=1)

    @model_validator(mode="after")
    def _ordered(self) -> "DecompositionParams":
        if not self.s < self.t_thresh:
            raise ValueError(f"thresholds out of order: need s < t_thresh, got s={self.s}, t_thresh={self.t_thresh}")
        return self

    @classmethod
    def defaults(cls, n: int, **overrides: int) -> "DecompositionParams":
        """s = n^{1/7}, t = n^{13/25}, k = n^{1/25}, b = n^{1/20}, all rounded up."""
        values = {
            "s": _ceil_power(n, 1 / 7),
            "t_thresh": _ceil_power(n, 13 / 25),
            "k": _ceil_power(n, 1 / 25),
            "b": _ceil_power(n, 1 / 20),
        }
        values.update({key: v for key, v in overrides.items() if v is not None})
        return cls(**values)

    def check(self, n: int) -> None:
        if self.t_thresh > n:
            raise ValueError(f"t_thresh={self.t_thresh} exceeds n={n}")


# --- top eigenpairs --------------------------------------------------------------------


def _normalize_sign(vector: np.ndarray) -> np.ndarray:
    """Make the largest-magnitude coordinate positive."""
    if vector.size and vector[int(np.argmax(np.abs(vector)))] < 0:
        return -vector
    return vector


def _check_residuals(mat: sp.csr_matrix, values: np.ndarray, vectors: np.ndarray) -> None:
    if not values.size:
        return
    scale = max(abs(float(values[0])), 1.0)
    residuals = np.linalg.norm(mat @ vectors - vectors * values, axis=0)
    worst = float(residuals.max())
    if worst > settings.lanczos_residual_tol * scale:
        raise RuntimeError(
            f"eigenpairs did not converge: residuals {np.array2string(residuals, precision=3)} "
            f"exceed {settings.lanczos_residual_tol:g} * lambda_1 = {settings.lanczos_residual_tol * scale:.3e}"
        )


def _power_pairs(mat: sp.csr_matrix, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Shifted power iteration, each new vector kept orthogonal to the converged ones.

    For a nonnegative matrix λ_1 is the spectral radius, so any positive shift makes
    λ_1 + σ dominate |λ_min + σ|; σ = √(max row sum) / 2 is a lower bound on λ_1 / 2.
    """
    n = mat.shape[0]
    sigma = 0.5 * math.sqrt(max(float(np.abs(mat).sum(axis=1).max()), 1.0))
    rng = np.random.default_rng(0)
    found: list[np.ndarray] = []
    values: list[float] = []
    tol = settings.lanczos_residual_tol
    for i in range(K):
        basis = np.column_stack(found) if found else np.empty((n, 0))
        v = rng.standard_normal(n)
        v -= basis @ (basis.T @ v)
        v /= np.linalg.norm(v)
        residual = math.inf
        for it in range(settings.power_max_iter):
            w = mat @ v + sigma * v
            w -= basis @ (basis.T @ w)
            norm = np.linalg.norm(w)
            if norm == 0.0:
                break
            v = w / norm
            av = mat @ v
            lam = float(v @ av)
            residual = float(np.linalg.norm(av - lam * v))
            scale = max(abs(values[0]) if values else abs(lam), 1.0)
            if residual <= tol * scale:
                log.debug("power pair %d converged after %d iterations", i + 1, it + 1)
                break
        else:
            raise RuntimeError(
                f"power iteration for pair {i + 1} stopped after {settings.power_max_iter} "
                f"iterations with residual {residual:.3e}"
            )
        found.append(v)
        values.append(float(v @ (mat @ v)))
    vectors = np.column_stack(found) if found else np.empty((n, 0))
    return np.asarray(values), vectors


def top_eigenpairs(
    g: MultiGraph | AdjacencyMatrix | np.ndarray | sp.spmatrix,
    K: int,
    method: EigenMethod = "lanczos",
) -> list[EigenPair]:
    """The K algebraically largest eigenpairs, descending, unit vectors."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    if isinstance(g, MultiGraph):
        mat = adjacency(g).matrix.astype(float)
    elif isinstance(g, AdjacencyMatrix):
        mat = g.matrix.astype(float)
    else:
        mat = sp.csr_matrix(np.asarray(g, dtype=float) if not sp.issparse(g) else g, dtype=float)
    n = mat.shape[0]
    if K > n:
        raise ValueError(f"asked for {K} eigenpairs of a {n}x{n} matrix")

    if method == "power":
        values, vectors = _power_pairs(mat, K)
    elif method == "lanczos":
        if n <= DENSE_SOLVE_LIMIT or K >= n - 1:
            dense = mat.toarray()
            _check_symmetric(dense)
            values, vectors = np.linalg.eigh(dense)
            values, vectors = values[-K:], vectors[:, -K:]
        else:
            values, vectors = eigsh(mat, k=K, which="LA", tol=0.0)
    else:
        raise ValueError(f"unknown eigen method {method!r}")

    values, vectors = _descending(np.asarray(values), np.asarray(vectors))
    _check_residuals(mat, values, vectors)
    return [EigenPair(float(v), _normalize_sign(vectors[:, i].copy())) for i, v in enumerate(values)]


# --- edge law and localization -----------------------------------------------------------


@dataclass
class EdgeLawRow:
    i: int
    eigenvalue: float
    sqrt_degree: float
    ratio: float


@dataclass
class EdgeLawReport:
    rows: list[EdgeLawRow]

    @property
    def ratios(self) -> list[float]:
        return [r.ratio for r in self.rows]

    @property
    def summary(self) -> dict[str, float]:
        if not self.rows:
            return {}
        arr = np.asarray(self.ratios)
        return {"min": float(arr.min()), "max": float(arr.max()), "median": float(np.median(arr))}

    def within(self, lo: float, hi: float) -> bool:
        return all(lo <= r <= hi for r in self.ratios)


def edge_law_report(
    g: MultiGraph, K: int, pairs: list[EigenPair] | None = None, method: EigenMethod = "lanczos"
) -> EdgeLawReport:
    """λ_i against √Δ_i for i = 1..K."""
    if K > _ceil_power(g.n, 1 / 25):
        log.info("K=%d is past n^(1/25) for n=%d; ratios there carry no guarantee", K, g.n)
    pairs = pairs if pairs is not None else top_eigenpairs(g, K, method)
    top = top_degrees(g, K)
    rows = []
    for i, (pair, delta) in enumerate(zip(pairs, top.values), start=1):
        root = math.sqrt(delta)
        rows.append(EdgeLawRow(i, pair.value, root, pair.value / root if root else math.nan))
    return EdgeLawReport(rows)


@dataclass
class LocalizationRow:
    i: int
    inf_norm: float
    second: float
    argmax_vertex: int
    hub_vertex: int

    @property
    def on_hub(self) -> bool:
        return self.argmax_vertex == self.hub_vertex


@dataclass
class LocalizationReport:
    rows: list[LocalizationRow]

    def hub_hits(self, upto: int) -> int:
        return sum(1 for r in self.rows[:upto] if r.on_hub)


def localization_report(
    g: MultiGraph, K: int, pairs: list[EigenPair] | None = None, method: EigenMethod = "lanczos"
) -> LocalizationReport:
    """||v_i||_∞, the runner-up |coordinate|, and whether the peak sits on the Δ_i hub."""
    pairs = pairs if pairs is not None else top_eigenpairs(g, K, method)
    labels = g.labels()
    hubs = top_degrees(g, K).vertices
    rows = []
    for i, (pair, hub) in enumerate(zip(pairs, hubs), start=1):
        mags = np.abs(pair.vector)
        order = np.argsort(-mags, kind="stable")
        second = float(mags[order[1]]) if mags.size > 1 else 0.0
        rows.append(LocalizationRow(i, float(mags[order[0]]), second, int(labels[order[0]]), int(hub)))
    return LocalizationReport(rows)


def write_eigenvector_csv(
    pairs: list[EigenPair], labels: np.ndarray, path: Path, **header: Any
) -> None:
    """vertex, v_1, ..., v_K per row under ``# key=value`` lines."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(header):
            fh.write(f"# {key}={header[key]}\n")
        fh.write("# eigenvalues=" + " ".join(repr(p.value) for p in pairs) + "\n")
        writer = csv.writer(fh)
        writer.writerow(["vertex", *(f"v{i}" for i in range(1, len(pairs) + 1))])
        columns = np.column_stack([p.vector for p in pairs]) if pairs else np.empty((labels.size, 0))
        for label, row in zip(labels.tolist(), columns.tolist()):
            writer.writerow([label, *(repr(x) for x in row)])


# --- star decomposition ---------------------------------------------------------------


@dataclass
class StarDecomposition:
    g: MultiGraph
    params: DecompositionParams
    G1: MultiGraph
    G2: MultiGraph
    G3: MultiGraph
    G4: MultiGraph
    losses: np.ndarray  # L(u) for u = 1..s

    def star_sizes(self) -> np.ndarray:
        """d(u, G4) for u in S, descending."""
        sizes = np.bincount(self.G4.low, minlength=self.params.s + 1)[1:]
        return np.sort(sizes)[::-1]

    def is_star_forest(self) -> bool:
        s, t = self.params.s, self.params.t_thresh
        g4 = self.G4
        if not g4.num_edges:
            return True
        leaves_once = np.unique(g4.high).size == g4.num_edges
        return bool(leaves_once and g4.low.max() <= s and g4.high.min() > t)

    def degree_identity(self) -> bool:
        """d(u, G) = d(u, G4) + L(u) for every u in S."""
        s = self.params.s
        full = self.g.degree_array()[:s]
        star = self.G4.degree_array()[:s]
        return bool(np.array_equal(full, star + self.losses))


def decompose(g: MultiGraph, params: DecompositionParams | None = None) -> StarDecomposition:
    if g.vertex_offset != 1:
        raise ValueError("star decomposition needs the untruncated graph (labels from 1)")
    params = params or DecompositionParams.defaults(g.n)
    params.check(g.n)
    s, t = params.s, params.t_thresh
    low, high = g.low, g.high

    g1_mask = high <= t
    g2_mask = low >= s
    st_mask = (low <= s) & (high > t)
    per_leaf = np.bincount(high[st_mask], minlength=g.n + 1)
    g3_mask = st_mask & (per_leaf[high] > 1)
    g4_mask = st_mask & ~g3_mask

    G1, G2, G3, G4 = (g.subgraph(mask) for mask in (g1_mask, g2_mask, g3_mask, g4_mask))
    losses = G1.degree_array()[:s] + G3.degree_array()[:s]
    log.debug(
        "decomposed n=%d (s=%d, t=%d): |G1|=%d |G2|=%d |G3|=%d |G4|=%d",
        g.n, s, t, G1.num_edges, G2.num_edges, G3.num_edges, G4.num_edges,
    )
    return StarDecomposition(g, params, G1, G2, G3, G4, losses.astype(np.int64))


def step3_weights(n: int, s: int) -> np.ndarray:
    """Row weights for labels s..n: (n/i)^{1/4} up to r = √(ns), then 1."""
    if not 1 <= s <= n:
        raise ValueError(f"need 1 <= s <= n, got s={s}, n={n}")
    labels = np.arange(s, n + 1, dtype=float)
    r = math.sqrt(n * s)
    return np.where(labels <= r, (n / labels) ** 0.25, 1.0)


@dataclass
class DecompositionReport:
    norm_g1: float
    norm_g2: float
    norm_g3: float
    g2_weighted_bound: float
    max_loss: int
    star_sizes: list[int]
    g4_eigenvalues: list[float]
    graph_eigenvalues: list[float]
    star_forest: bool
    degree_identity: bool
    weyl_gaps: list[float] = field(default_factory=list)

    @property
    def noise(self) -> float:
        return self.norm_g1 + self.norm_g2 + self.norm_g3

    @property
    def weyl_holds(self) -> bool:
        tol = settings.lanczos_residual_tol * max(self.graph_eigenvalues[:1] + [1.0])
        return all(gap <= self.noise + tol for gap in self.weyl_gaps)


def decomposition_report(
    dec: StarDecomposition, K: int | None = None, pairs: list[EigenPair] | None = None
) -> DecompositionReport:
    """Norms, losses and the star spectrum; the exact identities are hard failures."""
    K = K or dec.params.k
    sizes = dec.star_sizes()
    top_sizes = [int(x) for x in sizes[:K]] + [0] * max(0, K - sizes.size)
    g4_values = [math.sqrt(x) for x in top_sizes]

    g2_restricted = dec.G2.subgraph(np.ones(dec.G2.num_edges, dtype=bool), vertex_offset=dec.params.s)
    weighted = norm_upper_bound(
        adjacency(g2_restricted), step3_weights(dec.g.n, dec.params.s), verify=False
    )

    pairs = pairs if pairs is not None else top_eigenpairs(dec.g, min(K, dec.g.n))
    graph_values = [p.value for p in pairs[:K]]
    report = DecompositionReport(
        norm_g1=graph_norm(adjacency(dec.G1)),
        norm_g2=graph_norm(adjacency(dec.G2)),
        norm_g3=graph_norm(adjacency(dec.G3)),
        g2_weighted_bound=weighted,
        max_loss=int(dec.losses.max(initial=0)),
        star_sizes=top_sizes,
        g4_eigenvalues=g4_values,
        graph_eigenvalues=graph_values,
        star_forest=dec.is_star_forest(),
        degree_identity=dec.degree_identity(),
        weyl_gaps=[abs(a - b) for a, b in zip(graph_values, g4_values)],
    )
    if report.g2_weighted_bound < report.norm_g2 * (1 - 1e-9):
        raise RuntimeError(
            f"weighted row-sum bound {report.g2_weighted_bound} is below ||G2|| = {report.norm_g2}"
        )
    if not report.star_forest:
        raise RuntimeError("G4 is not a disjoint union of stars centred in S")
    if not report.degree_identity:
        raise RuntimeError("d(u, G) != d(u, G4) + L(u) for some u in S")
    if not report.weyl_holds:
        raise RuntimeError(
            f"Weyl sandwich violated: max gap {max(report.weyl_gaps):.6g} > noise {report.noise:.6g}"
        )
    return report


def decomposition_adjacencies(dec: StarDecomposition) -> tuple[np.ndarray, np.ndarray]:
    """Dense A(G) and A(G4) on the same label rows, for perturbation checks."""
    return adjacency(dec.g).dense().astype(float), adjacency(dec.G4).dense().astype(float)


# --- Davis-Kahan -------------------------------------------------------------------------


@dataclass(frozen=True)
class DavisKahanCertificate:
    sin_theta: float
    bound: float
    noise: float
    gap: float

    @property
    def holds(self) -> bool:
        return self.sin_theta <= self.bound + 1e-9


def davis_kahan_certificate(
    A: np.ndarray | AdjacencyMatrix, B: np.ndarray | AdjacencyMatrix, i: int
) -> DavisKahanCertificate:
    """sin∠(v_i(A), v_i(B)) against ||A - B|| / min_{j != i} |λ_j(A) - λ_i(B)|; i is 1-based."""
    da, db = _as_dense(A), _as_dense(B)
    _check_symmetric(da)
    _check_symmetric(db)
    if da.shape != db.shape:
        raise ValueError(f"matrix shapes differ: {da.shape} vs {db.shape}")
    n = da.shape[0]
    if not 1 <= i <= n:
        raise ValueError(f"eigen index {i} outside 1..{n}")

    la, va = _descending(*np.linalg.eigh(da))
    lb, vb = _descending(*np.linalg.eigh(db))
    v, w = va[:, i - 1], vb[:, i - 1]
    # |<v, w>| quotients out the sign; the residual norm avoids sqrt(1 - c^2) cancellation
    c = float(v @ w)
    sin_theta = float(np.linalg.norm(w - c * v))
    noise = float(np.abs(np.linalg.eigvalsh(da - db)).max(initial=0.0))
    others = np.delete(la, i - 1)
    gap = float(np.abs(others - lb[i - 1]).min()) if others.size else math.inf
    tol = 1e-9 * max(1.0, float(np.abs(la).max(initial=0.0)))

    bound = noise / gap if gap > 10 * tol else math.inf
    cert = DavisKahanCertificate(sin_theta, bound, noise, gap)
    if math.isfinite(bound) and not cert.holds:
        raise RuntimeError(f"Davis-Kahan bound violated: sin={sin_theta:.6g} > {bound:.6g}")
    return cert


# --- degree gaps ----------------------------------------------------------------------


@dataclass
class DegreeGapReport:
    degrees: list[int]
    normalized_gaps: list[float]
    delta1_bound: float

    @property
    def delta1_ok(self) -> bool:
        return bool(self.degrees) and self.degrees[0] <= self.delta1_bound

    def gaps_at_least(self, threshold: float, upto: int) -> bool:
        return all(gap >= threshold for gap in self.normalized_gaps[:upto])


def degree_gap_report(g: MultiGraph, K: int) -> DegreeGapReport:
    """(Δ_i - Δ_{i+1}) log n / √n for i = 1..K, and Δ_1 against √n log n."""
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    n = g.n
    top = top_degrees(g, min(K + 1, g.num_vertices)).values
    norm = math.log(n) / math.sqrt(n) if n > 1 else 0.0
    gaps = [(a - b) * norm for a, b in zip(top, top[1:])]
    return DegreeGapReport(top[:K], gaps, math.sqrt(n) * math.log(n))
