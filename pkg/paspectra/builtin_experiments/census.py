"""Ordered-subgraph census against its leading-order prediction."""

from __future__ import annotations

from paspectra.builtin_experiments.graphs import sample
from paspectra.core.census import PATTERNS, count_ordered_subgraphs, predicted_count
from paspectra.core.experiments import ExperimentConfig, ReplicateContext, experiment
from paspectra.core.graph import truncate
from paspectra.core.trees import magnitude_exponents
from paspectra.reports import numeric_summary


def _summarize(cfg: ExperimentConfig, records: list[dict]) -> dict:
    pattern = PATTERNS[cfg.pattern]
    predicted, formula = predicted_count(pattern, cfg.m, cfg.n)
    summary = numeric_summary(records, ["count"])
    mean = summary["count"]["mean"]
    exponents = magnitude_exponents(pattern)
    summary.update(
        {
            "pattern": cfg.pattern,
            "edges": [list(e) for e in pattern.edges],
            "predicted": predicted,
            "formula": formula,
            "ratio": mean / predicted if predicted else None,
            "growth": {"sqrt_n_power": exponents.leaves, "log_power": exponents.g},
        }
    )
    return summary


@experiment("census", "Count copies of an ordered pattern H in G_{m,n}", summarize=_summarize)
def census(cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    g = sample(cfg, ctx.seed)
    if cfg.eps is not None:
        g = truncate(g, cfg.eps)
    return {"count": count_ordered_subgraphs(g, PATTERNS[cfg.pattern])}
