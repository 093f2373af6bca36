"""Density reconstruction from C(0..K) compared with sampled truncated spectra."""

from __future__ import annotations

import logging

from paspectra.builtin_experiments.graphs import esd_scale, sample
from paspectra.config import settings
from paspectra.core.density import compare_density_to_esd, reconstruct_density
from paspectra.core.experiments import ExperimentConfig, ReplicateContext, experiment
from paspectra.core.graph import truncate
from paspectra.core.moments import build_moment_table
from paspectra.core.spectra import adjacency, esd
from paspectra.reports import numeric_summary

log = logging.getLogger(__name__)


def _summarize(cfg: ExperimentConfig, records: list[dict]) -> dict:
    summary = numeric_summary(records, ["l1_distance"])
    summary["diverged"] = records[0]["diverged"]
    summary["suggested_sigma"] = records[0]["suggested_sigma"]
    return summary


@experiment(
    "reconstruct",
    "Density from the limiting moments, with the L1 distance to each sample's truncated ESD",
    summarize=_summarize,
)
def reconstruct(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    scale = esd_scale(cfg)
    table = build_moment_table(cfg.K, cfg.eps, cfg.m)
    moments = [c * scale**k for k, c in enumerate(table.moments())]
    est = reconstruct_density(moments, gridsize=cfg.gridsize, sigma=cfg.sigma, method=cfg.method)
    if ctx.r == 0:
        est.write_csv(ctx.path("density.csv"))

    g = truncate(sample(cfg, ctx.seed), cfg.eps)
    if g.num_vertices > settings.dense_eigen_limit:
        raise ValueError(
            f"truncated graph has {g.num_vertices} vertices, above the dense limit {settings.dense_eigen_limit}"
        )
    measure = esd(adjacency(g), scale)
    distance = compare_density_to_esd(est, measure)
    log.info("seed %d: L1(density, ESD) = %.4g", ctx.seed, distance)
    return {
        "l1_distance": distance,
        "sigma": est.sigma,
        "half_width": est.half_width,
        "diverged": est.diverged,
        "suggested_sigma": est.suggested_sigma,
        "density": "density.csv",
    }
