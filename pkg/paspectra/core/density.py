"""Approximate densities from finite moment tables by inverting a damped characteristic function.

The characteristic function is built from C_0..C_K in one of two ways:

* ``taylor``   Σ_k (it)^k C_k / k!, the truncated moment series itself;
* ``cumulant`` exp(Σ_k κ_k (it)^k / k!), the same series re-expanded through its
  logarithm (κ are the cumulants of C_0..C_K). Both agree to order K at t = 0, but the
  exponentiated form stays bounded where the raw polynomial grows like t^K.

Either is multiplied by exp(-σ²t²/2) and inverted on a symmetric grid by the trapezoid
rule; negative values are clipped and the result renormalized to unit mass.
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal

import numpy as np
from scipy import integrate

from paspectra.core.spectra import SpectralMeasure

log = logging.getLogger(__name__)

Method = Literal["cumulant", "taylor"]

MAX_ORDER = 8


@dataclass
class DensityEstimate:
    grid: np.ndarray
    values: np.ndarray
    K: int
    sigma: float
    method: str = "cumulant"
    diverged: bool = False
    suggested_sigma: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def step(self) -> float:
        return float(self.grid[1] - self.grid[0]) if self.grid.size > 1 else 1.0

    @property
    def half_width(self) -> float:
        return float(self.grid[-1] + self.step / 2)

    def mass(self) -> float:
        return float(self.values.sum() * self.step)

    def moment(self, k: int) -> float:
        return float((self.grid**k * self.values).sum() * self.step)

    @classmethod
    def from_measure(
        cls, measure: SpectralMeasure, L: float, gridsize: int = 2048
    ) -> "DensityEstimate":
        """Histogram density of an atomic measure on the same kind of grid."""
        grid = symmetric_grid(L, gridsize)
        return cls(grid=grid, values=_binned_density(measure, grid), K=0, sigma=0.0, method="histogram")

    def write_csv(self, path: Path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(f"# K={self.K} sigma={self.sigma} method={self.method}\n")
            writer = csv.writer(fh)
            writer.writerow(["x", "density"])
            for x, v in zip(self.grid.tolist(), self.values.tolist()):
                writer.writerow([repr(x), repr(v)])


def symmetric_grid(L: float, gridsize: int) -> np.ndarray:
    """gridsize points spanning [-L, L], mirror-symmetric bit for bit."""
    if gridsize < 2:
        raise ValueError(f"gridsize must be >= 2, got {gridsize}")
    h = 2.0 * L / (gridsize - 1)
    return h * (np.arange(gridsize) - (gridsize - 1) / 2.0)


def _binned_density(measure: SpectralMeasure, grid: np.ndarray) -> np.ndarray:
    h = float(grid[1] - grid[0])
    edges = np.concatenate([grid - h / 2, [grid[-1] + h / 2]])
    counts, _ = np.histogram(measure.atoms, bins=edges)
    return counts / (measure.n * h)


def cumulants(moments: list[float]) -> list[float]:
    """κ_0..κ_K from raw moments C_0 = 1, C_1..C_K."""
    if not moments or moments[0] == 0:
        raise ValueError("moment table must start with C_0 != 0")
    c = [m / moments[0] for m in moments]
    kappa = [0.0] * len(c)
    for n in range(1, len(c)):
        kappa[n] = c[n] - math.fsum(
            math.comb(n - 1, j - 1) * kappa[j] * c[n - j] for j in range(1, n)
        )
    return kappa


def _log_cf(series: list[float], t: np.ndarray) -> np.ndarray:
    out = np.zeros(t.shape, dtype=complex)
    for k, a in enumerate(series):
        if a:
            out += a * (1j * t) ** k / math.factorial(k)
    return out


def characteristic_function(moments: list[float], t: np.ndarray, method: Method = "cumulant") -> np.ndarray:
    if method == "taylor":
        return _log_cf(moments, t)
    if method == "cumulant":
        return np.exp(_log_cf(cumulants(moments), t))
    raise ValueError(f"unknown characteristic-function model {method!r}")


def reconstruct_density(
    moments: list[float],
    L: float | None = None,
    gridsize: int = 2048,
    sigma: float | None = None,
    method: Method = "cumulant",
    t_points: int = 4097,
) -> DensityEstimate:
    """Density on [-L, L] whose damped characteristic function matches C_0..C_K."""
    moments = [float(c) for c in moments]
    K = len(moments) - 1
    if K > MAX_ORDER:
        raise ValueError(f"reconstruction uses at most {MAX_ORDER} moments, got K={K}")
    c2 = moments[2] if K >= 2 else 0.0
    if sigma is None:
        sigma = 0.15 * math.sqrt(c2) if c2 > 0 else 0.15
    if L is None:
        L = 4.0 * math.sqrt(c2) if c2 > 0 else 1.0
    if sigma <= 0 or L <= 0:
        raise ValueError(f"sigma and L must be positive, got sigma={sigma}, L={L}")

    # the Gaussian damping is below e^-32 past 8/sigma
    t_max = 8.0 / sigma
    t = np.linspace(0.0, t_max, t_points)
    cf = characteristic_function(moments, t, method) * np.exp(-0.5 * sigma**2 * t**2)

    diverged = False
    suggested = None
    magnitude = np.abs(cf)
    running_min = np.minimum.accumulate(magnitude)
    blowup = np.nonzero(magnitude > 10.0 * running_min + 1e-8)[0]
    if magnitude[-1] > 1e-8 or magnitude.max() > 1.0 + 1e-9 or blowup.size:
        diverged = True
        end = int(blowup[0]) if blowup.size else t.size
        cut = int(np.argmin(magnitude[:end]))
        cf = cf[: cut + 1]
        t = t[: cut + 1]
        suggested = 2.0 * sigma
        log.warning(
            "characteristic function of the %s model outgrows the damping (sigma=%.3g); "
            "integration stopped at t=%.3g, try sigma >= %.3g",
            method,
            sigma,
            t[-1],
            suggested,
        )

    grid = symmetric_grid(L, gridsize)
    if t.size < 2:
        values = np.zeros_like(grid)
    else:
        # f(x) = (1/π) ∫_0^T Re[φ(t) e^{-itx}] dt for a real density
        phase = np.outer(grid, t)
        integrand = cf.real[None, :] * np.cos(phase) + cf.imag[None, :] * np.sin(phase)
        values = integrate.trapezoid(integrand, t, axis=1) / math.pi

    values = np.clip(values, 0.0, None)
    h = float(grid[1] - grid[0])
    mass = values.sum() * h
    if mass > 0:
        values = values / mass
    else:
        log.warning("reconstructed density vanished on [-%g, %g]", L, L)

    return DensityEstimate(
        grid=grid,
        values=values,
        K=K,
        sigma=sigma,
        method=method,
        diverged=diverged,
        suggested_sigma=suggested,
    )


def compare_density_to_esd(
    est: DensityEstimate, measure: SpectralMeasure, bins: np.ndarray | None = None
) -> float:
    """L1 distance Σ|p - q|·h on the estimate's grid; ESD mass off the grid counts in full."""
    grid = est.grid if bins is None else np.asarray(bins, dtype=float)
    if bins is not None and grid.shape != est.grid.shape:
        raise ValueError("bins must match the estimate's grid")
    h = float(grid[1] - grid[0])
    q = _binned_density(measure, grid)
    outside = max(0.0, 1.0 - float(q.sum() * h))
    return float(np.abs(est.values - q).sum() * h + outside)
