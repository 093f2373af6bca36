"""Adjacency matrices, eigendecompositions, ESDs, walk counts and matrix inequalities."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from paspectra.config import settings
from paspectra.core.graph import MultiGraph

log = logging.getLogger(__name__)

INT64_SAFE = 2**62


@dataclass(frozen=True)
class AdjacencyMatrix:
    """A_ij = multiplicity of {i, j}; A_ii = number of loops at i (not 2x).

    Rows are indexed densely; ``labels[r]`` is the vertex label of row r.
    """

    matrix: sp.csr_matrix
    labels: np.ndarray

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def index_of(self, label: int) -> int:
        return int(label - self.labels[0]) if self.labels.size else -1

    def edge_count(self) -> int:
        upper = sp.triu(self.matrix)
        return int(upper.sum())


def adjacency(g: MultiGraph) -> AdjacencyMatrix:
    n = g.num_vertices
    rows = g.low - g.vertex_offset
    cols = g.high - g.vertex_offset
    off = rows != cols
    r = np.concatenate([rows[off], cols[off], rows[~off]])
    c = np.concatenate([cols[off], rows[off], rows[~off]])
    data = np.ones(r.size, dtype=np.int64)
    # duplicates are summed by the COO -> CSR conversion
    mat = sp.coo_matrix((data, (r, c)), shape=(n, n), dtype=np.int64).tocsr()
    mat.sum_duplicates()
    return AdjacencyMatrix(matrix=mat, labels=g.labels())


def _as_dense(a: AdjacencyMatrix | np.ndarray | sp.spmatrix) -> np.ndarray:
    if isinstance(a, AdjacencyMatrix):
        return a.dense().astype(float)
    if sp.issparse(a):
        return a.toarray().astype(float)
    return np.asarray(a, dtype=float)


def _as_sparse(a: AdjacencyMatrix | np.ndarray | sp.spmatrix) -> sp.csr_matrix:
    if isinstance(a, AdjacencyMatrix):
        return a.matrix
    if sp.issparse(a):
        return sp.csr_matrix(a)
    return sp.csr_matrix(np.asarray(a))


def _check_symmetric(a: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")


@dataclass(frozen=True)
class SpectralMeasure:
    """Uniform atomic measure on eigenvalues, atoms in descending order."""

    atoms: np.ndarray
    scale: float = 1.0
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def n(self) -> int:
        return int(self.atoms.size)

    @property
    def weights(self) -> np.ndarray:
        return np.full(self.n, 1.0 / self.n) if self.n else np.empty(0)

    def moment(self, k: int) -> float:
        return esd_moment(self, k)


@dataclass(frozen=True)
class EigenPair:
    value: float
    vector: np.ndarray


def _descending(values: np.ndarray, vectors: np.ndarray | None = None):
    # stable on the negated values: equal eigenvalues keep solver order
    order = np.argsort(-values, kind="stable")
    if vectors is None:
        return values[order]
    return values[order], vectors[:, order]


def binomial_scale(m: int, n: int) -> float:
    """1/sqrt(n p (1-p)) with edge density p = 2m/n."""
    p = 2.0 * m / n
    if not 0.0 < p < 1.0:
        raise ValueError(f"edge density 2m/n={p} outside (0, 1)")
    return 1.0 / math.sqrt(n * p * (1.0 - p))


def esd(a: AdjacencyMatrix | np.ndarray, scale: float = 1.0, **metadata: Any) -> SpectralMeasure:
    """Eigenvalues only, scaled."""
    dense = _as_dense(a)
    _check_symmetric(dense)
    if dense.shape[0] > settings.dense_eigen_limit:
        raise ValueError(
            f"dense eigensolve refused for n={dense.shape[0]} > {settings.dense_eigen_limit}"
        )
    if dense.shape[0] == 0:
        # every vertex truncated away
        return SpectralMeasure(atoms=np.empty(0), scale=scale, metadata=dict(metadata))
    values = _descending(np.linalg.eigvalsh(dense))
    return SpectralMeasure(atoms=values * scale, scale=scale, metadata=dict(metadata))


def eigen_full(
    a: AdjacencyMatrix | np.ndarray, scale: float = 1.0, check_residuals: bool = True
) -> tuple[SpectralMeasure, np.ndarray]:
    """Full symmetric eigendecomposition; columns of the returned matrix are unit vectors."""
    dense = _as_dense(a)
    _check_symmetric(dense)
    values, vectors = np.linalg.eigh(dense)
    values, vectors = _descending(values, vectors)
    if check_residuals and values.size:
        norm = max(abs(values[0]), abs(values[-1]), 1.0)
        residual = np.linalg.norm(dense @ vectors - vectors * values, axis=0).max()
        if residual > settings.eigen_residual_tol * norm:
            raise RuntimeError(f"eigensolve residual {residual:.3e} exceeds tolerance")
    return SpectralMeasure(atoms=values * scale, scale=scale), vectors


def esd_moment(measure: SpectralMeasure, k: int) -> float:
    """(1/n) Σ λ_i^k over the scaled atoms."""
    if k < 0:
        raise ValueError(f"moment order must be >= 0, got {k}")
    if k == 0:
        return 1.0
    if measure.n == 0:
        return 0.0
    return math.fsum((measure.atoms**k).tolist()) / measure.n


# --- closed walks ------------------------------------------------------------------


def _bigint_trace(mat: sp.csr_matrix, k: int) -> int:
    if mat.shape[0] > settings.bigint_fallback_limit:
        raise OverflowError(
            f"closed {k}-walk count overflows int64 and n={mat.shape[0]} is too large "
            f"for the exact fallback (limit {settings.bigint_fallback_limit})"
        )
    log.warning("closed %d-walk count exceeds int64, using exact big integers", k)
    base = mat.toarray().astype(object)
    power = base.copy()
    for _ in range(k - 1):
        power = power.dot(base)
    return int(sum(power[i, i] for i in range(power.shape[0])))


def trace_power_walks(g: MultiGraph | AdjacencyMatrix | sp.spmatrix | np.ndarray, k: int) -> int:
    """Exact number of closed k-walks, tr(A^k), by row-block walk propagation.

    For a block of start vertices the walk counts after h steps are the rows of A^h;
    tr(A^{2h}) sums their squares and tr(A^{2h+1}) pairs them with one more step.
    """
    if k < 0:
        raise ValueError(f"walk length must be >= 0, got {k}")
    mat = adjacency(g).matrix if isinstance(g, MultiGraph) else _as_sparse(g)
    mat = mat.astype(np.int64)
    n = mat.shape[0]
    if k == 0:
        return n
    if k == 1:
        return int(mat.diagonal().sum())

    half = k // 2
    max_row = int(np.abs(mat).sum(axis=1).max()) if n else 0
    if max_row and (half + 1) * math.log2(max_row) >= 61:
        return _bigint_trace(mat, k)

    total = 0
    chunk = settings.walk_chunk_rows
    for start in range(0, n, chunk):
        rows = mat[start : start + chunk]
        for _ in range(half - 1):
            rows = rows @ mat
        if k % 2:
            nxt = rows @ mat
            part_f = float(rows.astype(float).multiply(nxt.astype(float)).sum())
            part = rows.multiply(nxt).sum()
        else:
            part_f = float(rows.astype(float).multiply(rows.astype(float)).sum())
            part = rows.multiply(rows).sum()
        if abs(part_f) + abs(total) >= INT64_SAFE:
            return _bigint_trace(mat, k)
        total += int(part)
    return total


def walk_moment(g: MultiGraph, k: int) -> float:
    """(1/|V|) tr(A^k): the k-th ESD moment without an eigensolve."""
    if g.num_vertices == 0:
        return 1.0 if k == 0 else 0.0
    return trace_power_walks(g, k) / g.num_vertices


# --- distances between atomic measures --------------------------------------------------


def _signed_masses(mu: SpectralMeasure, eta: SpectralMeasure, tol: float | None) -> np.ndarray:
    values = np.concatenate([mu.atoms, eta.atoms])
    masses = np.concatenate([mu.weights, -eta.weights])
    order = np.argsort(values, kind="stable")
    values, masses = values[order], masses[order]
    if tol is None:
        tol = 1e-9 * max(1.0, float(np.abs(values).max(initial=0.0)))
    # atoms closer than tol are one atom (numerically repeated eigenvalues)
    starts = np.concatenate([[True], np.diff(values) > tol]) if values.size else np.empty(0, bool)
    groups = np.cumsum(starts) - 1
    return np.bincount(groups, weights=masses) if values.size else np.empty(0)


def interval_distance(mu: SpectralMeasure, eta: SpectralMeasure, tol: float | None = None) -> float:
    """sup over intervals I of |mu(I) - eta(I)|.

    With net masses w_1..w_r on the merged sorted atoms, any interval picks out a
    contiguous run (open or closed ends select which boundary atoms count), so the
    supremum is max_prefix - min_prefix of the partial sums including the empty one.
    """
    net = _signed_masses(mu, eta, tol)
    prefix = np.concatenate([[0.0], np.cumsum(net)])
    return float(min(1.0, prefix.max() - prefix.min()))


def interlacing_distance_bound(n: int, cut: int) -> float:
    """Largest interval distance between the ESD of an n×n matrix and that of a principal
    submatrix with ``cut`` rows removed.

    Interlacing keeps every interval count within ``cut`` of the other, which gives 2·cut/n.
    This holds at every n; the eps bound on truncation is only its large-n limit.
    """
    if not 0 <= cut <= n:
        raise ValueError(f"cut must lie in [0, n], got cut={cut}, n={n}")
    return min(1.0, 2.0 * cut / n) if n else 0.0


def kolmogorov_distance(mu: SpectralMeasure, eta: SpectralMeasure, tol: float | None = None) -> float:
    """sup over half-lines (-inf, x] of |mu - eta|; never exceeds interval_distance."""
    net = _signed_masses(mu, eta, tol)
    prefix = np.cumsum(net)
    return float(np.abs(prefix).max(initial=0.0))


# --- matrix inequalities --------------------------------------------------------------


def _eig_tol(values: np.ndarray) -> float:
    return 1e-9 * max(1.0, float(np.abs(values).max(initial=0.0)))


def check_interlacing(a: AdjacencyMatrix | np.ndarray, keep: np.ndarray | list[int]) -> bool:
    """Cauchy interlacing λ_j(A) >= β_j(B) >= λ_{j+n-m}(A) for a principal submatrix B."""
    dense = _as_dense(a)
    _check_symmetric(dense)
    keep = np.asarray(keep, dtype=np.int64)
    n, m = dense.shape[0], keep.size
    if m == 0:
        return True
    lam = _descending(np.linalg.eigvalsh(dense))
    beta = _descending(np.linalg.eigvalsh(dense[np.ix_(keep, keep)]))
    tol = _eig_tol(lam)
    upper_ok = np.all(lam[:m] >= beta - tol)
    lower_ok = np.all(beta >= lam[n - m :] - tol)
    return bool(upper_ok and lower_ok)


def check_weyl(a: AdjacencyMatrix | np.ndarray, b: AdjacencyMatrix | np.ndarray) -> bool:
    """|λ_i(A) - λ_i(B)| <= ||A - B||_2 for every i."""
    da, db = _as_dense(a), _as_dense(b)
    _check_symmetric(da)
    _check_symmetric(db)
    la = _descending(np.linalg.eigvalsh(da))
    lb = _descending(np.linalg.eigvalsh(db))
    delta = np.abs(np.linalg.eigvalsh(da - db)).max(initial=0.0)
    return bool(np.all(np.abs(la - lb) <= delta + _eig_tol(np.concatenate([la, lb]))))


def graph_norm(a: AdjacencyMatrix | np.ndarray | sp.spmatrix) -> float:
    """Spectral norm of a symmetric matrix; Lanczos when large and sparse."""
    mat = _as_sparse(a).astype(float)
    n = mat.shape[0]
    if mat.nnz == 0:
        return 0.0
    if n <= 500:
        return float(np.abs(np.linalg.eigvalsh(mat.toarray())).max())
    top = eigsh(mat, k=1, which="LA", return_eigenvectors=False)[0]
    bottom = eigsh(mat, k=1, which="SA", return_eigenvectors=False)[0]
    return float(max(abs(top), abs(bottom)))


def norm_upper_bound(
    a: AdjacencyMatrix | np.ndarray | sp.spmatrix, c: np.ndarray | list[float], verify: bool = True
) -> float:
    """max_i (1/c_i) Σ_j c_j a_ij, an upper bound on ||A||_2 for nonnegative A."""
    mat = _as_sparse(a).astype(float)
    c = np.asarray(c, dtype=float)
    if c.shape != (mat.shape[0],):
        raise ValueError(f"weight vector has shape {c.shape}, expected ({mat.shape[0]},)")
    if np.any(c <= 0):
        raise ValueError("weights must be strictly positive")
    if mat.nnz and mat.data.min() < 0:
        raise ValueError("row-sum bound needs a nonnegative matrix")
    if mat.shape[0] == 0:
        return 0.0
    bound = float(((mat @ c) / c).max())
    if verify and mat.shape[0] <= settings.dense_eigen_limit:
        actual = graph_norm(mat)
        if actual > bound * (1 + 1e-9) + 1e-12:
            raise RuntimeError(f"row-sum bound {bound} below spectral norm {actual}")
    return bound


# --- export ------------------------------------------------------------------------------


def write_eigenvalues_csv(measure: SpectralMeasure, path: Path, **header: Any) -> None:
    """One eigenvalue per line under ``# key=value`` metadata lines."""
    meta = {"scale": measure.scale, "n": measure.n, **measure.metadata, **header}
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(meta):
            fh.write(f"# {key}={meta[key]}\n")
        fh.write("eigenvalue\n")
        for value in measure.atoms.tolist():
            fh.write(f"{value!r}\n")


def histogram(measure: SpectralMeasure, bins: int | np.ndarray = 100) -> tuple[np.ndarray, np.ndarray]:
    counts, edges = np.histogram(measure.atoms, bins=bins)
    return edges, counts


def write_histogram_csv(measure: SpectralMeasure, path: Path, bins: int | np.ndarray = 100) -> None:
    edges, counts = histogram(measure, bins)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"# scale={measure.scale}\n")
        writer = csv.writer(fh)
        writer.writerow(["left", "right", "count"])
        for left, right, count in zip(edges[:-1].tolist(), edges[1:].tolist(), counts.tolist()):
            writer.writerow([repr(left), repr(right), count])
