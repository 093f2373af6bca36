"""Limiting moment tables and their empirical counterparts."""

from __future__ import annotations

import logging
import math

from paspectra.core.experiments import ExperimentConfig, ReplicateContext, experiment
from paspectra.core.moments import build_moment_table, carleman_report, check_hamburger
from paspectra.reports import (
    artifact_header,
    config_hash,
    empirical_moments,
    moment_comparison_report,
    write_json,
    write_moment_table_csv,
)

log = logging.getLogger(__name__)


def _summarize_table(cfg: ExperimentConfig, records: list[dict]) -> dict:
    record = records[0]
    return {"passed": record["hamburger"], "K": cfg.K}


@experiment(
    "moments",
    "C(k, eps, m) for k = 0..K with Hankel and Carleman checks",
    replicated=False,
    summarize=_summarize_table,
)
def moment_table(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    table = build_moment_table(cfg.K, cfg.eps, cfg.m)
    carleman = carleman_report(table, cfg.K)
    payload = {
        **ctx.header,
        "epsilon": table.epsilon,
        "m": table.m,
        "K": table.K,
        "moments": table.moments(),
    }
    if cfg.normalize == "sqrt-m":
        payload["normalized"] = table.normalized(math.sqrt(cfg.m))
    path = ctx.path("moments.json")
    write_json(path, payload)
    return {
        "moments": table.moments(),
        "hamburger": check_hamburger(table, cfg.K),
        "carleman_ratios": carleman.ratios,
        "carleman_nonincreasing": carleman.nonincreasing,
        "table": path.name,
    }


def _summarize_comparison(cfg: ExperimentConfig, records: list[dict]) -> dict:
    rows = moment_comparison_report(cfg, [r["moments"] for r in records])
    path = cfg.resolved_output_dir(config_hash(cfg)) / "moment-comparison.csv"
    write_moment_table_csv(path, cfg, rows)
    return {
        **artifact_header(cfg),
        "table": [row._asdict() for row in rows],
        "csv": path.name,
    }


@experiment(
    "truncate-compare",
    "Walk-count moments of G_{eps,m,n} (or G_{m,n}) against the limiting constants",
    summarize=_summarize_comparison,
)
def truncate_compare(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    return {"moments": empirical_moments(cfg, ctx.seed)}
