"""Limiting spectral moments C(k, ε, m) of the ε-truncated preferential-attachment graph.

C(2k, ε, m) = 1/(1-ε) Σ_T φ(T, m) M_{2k}(T) ψ(D(T), ε), summed over labeled trees T on
2..k+1 vertices; odd moments are zero and C(0) = 1.
"""

from __future__ import annotations

import functools
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import integrate

from paspectra.config import settings
from paspectra.core.symbolic import SymbolicFn
from paspectra.core.trees import (
    OrderedGraph,
    closed_form_walk_count,
    iter_labeled_trees,
    phi,
    tree_shape,
    walk_count_M,
)

log = logging.getLogger(__name__)


def _check_degrees(degrees: tuple[int, ...], eps: float) -> None:
    t = len(degrees)
    if t < 2:
        raise ValueError(f"psi needs at least two vertices, got D={degrees}")
    if min(degrees) < 1 or sum(degrees) != 2 * (t - 1):
        raise ValueError(f"D={degrees} is not a tree degree sequence")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")


@functools.lru_cache(maxsize=None)
def psi(degrees: tuple[int, ...], eps: float, m: int) -> float:
    """(2m)^{-(t-1)} ∫_{ε<y_1<...<y_t<1} ∏ y_i^{-d_i/2} dy, integrated innermost-out exactly."""
    degrees = tuple(degrees)
    _check_degrees(degrees, eps)
    f = SymbolicFn.constant(1.0)
    for d in degrees:
        f = f.mul_power(-d).integrate_from(eps)
    return f.evaluate(1.0) / (2 * m) ** (len(degrees) - 1)


def psi_quadrature(degrees: tuple[int, ...], eps: float, m: int) -> float:
    """Adaptive quadrature of the same ordered-simplex integral (slow oracle)."""
    degrees = tuple(degrees)
    _check_degrees(degrees, eps)
    t = len(degrees)
    powers = np.asarray(degrees, dtype=float) / 2.0

    def integrand(*ys: float) -> float:
        return math.prod(y ** (-p) for y, p in zip(ys, powers))

    # nquad orders variables innermost first: y_1 in (eps, y_2), ..., y_t in (eps, 1)
    def bounds(i: int):
        if i == t - 1:
            return lambda *rest: (eps, 1.0)
        return lambda *rest: (eps, rest[0])

    ranges = [bounds(i) for i in range(t)]
    opts = {"epsabs": 1e-15, "epsrel": 1e-12, "limit": 200}
    value, _ = integrate.nquad(integrand, ranges, opts=[opts] * t)
    return value / (2 * m) ** (t - 1)


class _TreeClass(NamedTuple):
    directions: tuple[tuple[int, int], ...]
    shape: tuple


def _classify(k_half: int) -> dict[_TreeClass, tuple[int, OrderedGraph]]:
    """Group trees on 2..k_half+1 vertices by per-vertex (d_in, d_out) and, when walks
    may reuse edges, by unlabeled shape. Value: (count, representative)."""
    groups: dict[_TreeClass, list] = {}
    for t in range(2, k_half + 2):
        for tree in iter_labeled_trees(t):
            shape = () if tree.num_edges == k_half else tree_shape(tree)
            key = _TreeClass(tree.in_out_degrees(), shape)
            entry = groups.get(key)
            if entry is None:
                groups[key] = [1, tree]
            else:
                entry[0] += 1
    return {key: (count, rep) for key, (count, rep) in groups.items()}


@functools.lru_cache(maxsize=None)
def _tree_classes(k_half: int) -> tuple[tuple[int, OrderedGraph], ...]:
    classes = _classify(k_half)
    log.debug("C(%d): %d tree classes", 2 * k_half, len(classes))
    return tuple(classes[key] for key in sorted(classes))


def limit_moment_C(k: int, eps: float, m: int) -> float:
    """C(k, ε, m); odd k gives exactly 0 and k = 0 gives 1."""
    if k < 0:
        raise ValueError(f"moment order must be >= 0, got {k}")
    if k > settings.moment_order_cap:
        raise ValueError(f"moment order {k} exceeds cap {settings.moment_order_cap}")
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if not 0.0 < eps < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {eps}")
    if k % 2:
        return 0.0
    if k == 0:
        return 1.0

    k_half = k // 2
    terms = []
    for count, tree in _tree_classes(k_half):
        weight = phi(tree, m)
        if not weight:
            continue
        if tree.num_edges == k_half:
            walks = closed_form_walk_count(tree)
        else:
            walks = walk_count_M(tree, k)
        if not walks:
            continue
        terms.append(count * weight * walks * psi(tree.degrees(), eps, m))
    return math.fsum(terms) / (1.0 - eps)


@dataclass
class MomentTable:
    epsilon: float
    m: int
    entries: dict[int, float] = field(default_factory=dict)

    @property
    def K(self) -> int:
        return max(self.entries, default=-1)

    def moments(self, upto: int | None = None) -> list[float]:
        upto = self.K if upto is None else upto
        missing = [k for k in range(upto + 1) if k not in self.entries]
        if missing:
            raise ValueError(f"moment table lacks orders {missing}")
        return [self.entries[k] for k in range(upto + 1)]

    def normalized(self, factor: float) -> list[float]:
        """C_k / factor^k, e.g. factor = sqrt(m) for the 1/sqrt(m)-scaled adjacency."""
        return [c / factor**k for k, c in enumerate(self.moments())]

    def to_json(self) -> str:
        return json.dumps(
            {"epsilon": self.epsilon, "m": self.m, "K": self.K, "moments": self.moments()},
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "MomentTable":
        data = json.loads(text)
        return cls(
            epsilon=float(data["epsilon"]),
            m=int(data["m"]),
            entries={k: float(v) for k, v in enumerate(data["moments"])},
        )

    def save(self, path: Path) -> None:
        Path(path).write_text(self.to_json() + "\n", encoding="utf-8")


def build_moment_table(K: int, eps: float, m: int) -> MomentTable:
    table = MomentTable(epsilon=eps, m=m)
    for k in range(K + 1):
        table.entries[k] = limit_moment_C(k, eps, m)
    log.info("moment table eps=%g m=%d K=%d built", eps, m, K)
    return table


def hankel(moments: list[float]) -> np.ndarray:
    half = (len(moments) - 1) // 2
    return np.array([[moments[r + s] for s in range(half + 1)] for r in range(half + 1)])


def check_hamburger(table: MomentTable | list[float], K: int) -> bool:
    """Hankel matrix [C_{r+s}]_{r,s <= K/2} is positive semidefinite."""
    moments = table.moments(K) if isinstance(table, MomentTable) else list(table)[: K + 1]
    h = hankel(moments)
    eig = np.linalg.eigvalsh(h)
    norm = max(abs(eig[0]), abs(eig[-1]))
    ok = bool(eig[0] >= -1e-9 * norm)
    if not ok:
        log.warning("Hankel matrix has eigenvalue %.3e (norm %.3e)", eig[0], norm)
    return ok


@dataclass
class CarlemanReport:
    ratios: list[float]

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a * (1 + 1e-12) for a, b in zip(self.ratios, self.ratios[1:]))

    @property
    def max_ratio(self) -> float:
        return max(self.ratios, default=0.0)

    def bounded(self, factor: float = 10.0) -> bool:
        """Stays within a fixed multiple of the first ratio."""
        return not self.ratios or self.max_ratio <= factor * max(self.ratios[0], 1e-300)


def carleman_report(table: MomentTable | list[float], K: int) -> CarlemanReport:
    """C_{2k}^{1/(2k)} / (2k) for k = 1..K/2."""
    moments = table.moments(K) if isinstance(table, MomentTable) else list(table)[: K + 1]
    ratios = []
    for k in range(1, K // 2 + 1):
        c = moments[2 * k]
        ratios.append(c ** (1.0 / (2 * k)) / (2 * k) if c > 0 else 0.0)
    return CarlemanReport(ratios)


def untruncated_moment_asymptotics(k: int, m: int, n: int) -> float | None:
    """Leading order of E[tr(A^k)]/n without truncation; None when no formula applies."""
    if k % 2:
        return 0.0
    if k == 0:
        return 1.0
    if k == 2:
        return 2.0 * m
    if k == 4:
        return 2.0 * m * (m + 1) * math.log(n)
    return None
