"""Edge eigenvalues, eigenvector localization and the star decomposition."""

from __future__ import annotations

import logging

import numpy as np

from paspectra.builtin_experiments.graphs import sample
from paspectra.config import settings
from paspectra.core.experiments import ExperimentConfig, ReplicateContext, experiment
from paspectra.core.localize import (
    DecompositionParams,
    davis_kahan_certificate,
    decompose,
    decomposition_adjacencies,
    decomposition_report,
    degree_gap_report,
    edge_law_report,
    localization_report,
    top_eigenpairs,
    write_eigenvector_csv,
)

log = logging.getLogger(__name__)

RATIO_BAND = (0.85, 1.15)


def _fraction(flags: list[bool]) -> float:
    return sum(flags) / len(flags) if flags else 0.0


def _summarize_edge(cfg: ExperimentConfig, records: list[dict]) -> dict:
    ratios = np.asarray([r["ratios"] for r in records], dtype=float)
    lo, hi = RATIO_BAND
    return {
        "median_ratio": np.median(ratios, axis=0).tolist(),
        "within_band": _fraction([bool(np.all((row >= lo) & (row <= hi))) for row in ratios]),
        "band": list(RATIO_BAND),
        "delta1_ok": _fraction([r["delta1_ok"] for r in records]),
        "gaps_at_least_one": _fraction([all(g >= 1.0 for g in r["normalized_gaps"][:3]) for r in records]),
    }


@experiment(
    "edge",
    "lambda_i against sqrt(Delta_i) and normalized degree gaps for i = 1..K",
    summarize=_summarize_edge,
)
def edge(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    g = sample(cfg, ctx.seed)
    report = edge_law_report(g, cfg.K, method=cfg.eigen_method)
    gaps = degree_gap_report(g, cfg.K)
    return {
        "eigenvalues": [row.eigenvalue for row in report.rows],
        "sqrt_degrees": [row.sqrt_degree for row in report.rows],
        "ratios": report.ratios,
        "summary": report.summary,
        "degrees": gaps.degrees,
        "normalized_gaps": gaps.normalized_gaps,
        "delta1_ok": gaps.delta1_ok,
    }


def _summarize_localize(cfg: ExperimentConfig, records: list[dict]) -> dict:
    upto = min(3, cfg.K)
    return {
        "inf_norm_v1": [r["inf_norms"][0] for r in records],
        "in_band": _fraction([0.60 <= r["inf_norms"][0] <= 0.78 and r["second"][0] <= 0.2 for r in records]),
        "hub_hits": _fraction([r["hub_hits"] == upto for r in records]),
        "weyl_and_degree_identity": all(r["weyl_holds"] and r["degree_identity"] for r in records),
    }


@experiment(
    "localize",
    "Top eigenvector localization, the star decomposition and its certificates",
    summarize=_summarize_localize,
)
def localize(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    g = sample(cfg, ctx.seed)
    pairs = top_eigenpairs(g, cfg.K, cfg.eigen_method)
    loc = localization_report(g, cfg.K, pairs)

    params = DecompositionParams.defaults(cfg.n, **cfg.threshold_overrides())
    dec = decompose(g, params)
    rep = decomposition_report(dec, cfg.K, pairs)

    vec_path = ctx.path(f"eigenvectors-{ctx.seed}.csv")
    write_eigenvector_csv(pairs, g.labels(), vec_path, **ctx.header)

    record = {
        "inf_norms": [row.inf_norm for row in loc.rows],
        "second": [row.second for row in loc.rows],
        "argmax_vertices": [row.argmax_vertex for row in loc.rows],
        "hub_vertices": [row.hub_vertex for row in loc.rows],
        "hub_hits": loc.hub_hits(min(3, cfg.K)),
        "params": params.model_dump(),
        "norms": {"G1": rep.norm_g1, "G2": rep.norm_g2, "G3": rep.norm_g3},
        "g2_weighted_bound": rep.g2_weighted_bound,
        "max_loss": rep.max_loss,
        "star_sizes": rep.star_sizes,
        "g4_eigenvalues": rep.g4_eigenvalues,
        "weyl_gaps": rep.weyl_gaps,
        "weyl_holds": rep.weyl_holds,
        "degree_identity": rep.degree_identity,
        "eigenvectors": vec_path.name,
    }
    if g.num_vertices <= settings.dense_eigen_limit:
        A, B = decomposition_adjacencies(dec)
        cert = davis_kahan_certificate(A, B, 1)
        record["davis_kahan"] = {"sin_theta": cert.sin_theta, "bound": cert.bound, "gap": cert.gap}
    return record
