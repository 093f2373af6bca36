"""Artifacts on disk: versioned JSON reports, CSV tables and the moment comparison table."""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, NamedTuple

import numpy as np

from paspectra.config import settings
from paspectra.core.experiments import ExperimentConfig
from paspectra.core.graph import GraphConfig, generate, replicate_seed, truncate
from paspectra.core.moments import limit_moment_C, untruncated_moment_asymptotics
from paspectra.core.spectra import walk_moment

log = logging.getLogger(__name__)


def _hashable_config(cfg: ExperimentConfig) -> dict[str, Any]:
    # where artifacts go does not change what they contain
    return cfg.model_dump(mode="json", exclude={"output_dir"})


def config_hash(cfg: ExperimentConfig) -> str:
    canonical = json.dumps(_hashable_config(cfg), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


def artifact_header(cfg: ExperimentConfig, seed: int | None = None) -> dict[str, Any]:
    header = {
        "schema_version": settings.schema_version,
        "experiment": cfg.experiment,
        "config_hash": config_hash(cfg),
    }
    if seed is not None:
        header["seed"] = seed
    return header


def jsonable(obj: Any) -> Any:
    """Plain JSON types; non-finite floats become null."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if math.isfinite(value) else None
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, Path):
        return obj.name
    return obj


def write_json(path: Path, payload: dict[str, Any]) -> None:
    text = json.dumps(jsonable(payload), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def write_csv_table(
    path: Path, header: dict[str, Any], columns: list[str], rows: list[tuple | list]
) -> None:
    """``# key=value`` header lines, then a plain CSV table."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        for key in sorted(header):
            fh.write(f"# {key}={header[key]}\n")
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


@dataclass
class RunResult:
    cfg: ExperimentConfig
    output_dir: Path
    records: list[dict[str, Any]] = field(default_factory=list)
    failures: list[dict[str, Any]] = field(default_factory=list)
    aggregate: dict[str, Any] = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        if self.failures:
            return 1
        return 0 if self.aggregate.get("passed", True) else 1

    @property
    def report_path(self) -> Path:
        return self.output_dir / "report.json"

    def payload(self) -> dict[str, Any]:
        return {
            **artifact_header(self.cfg),
            "config": _hashable_config(self.cfg),
            "records": self.records,
            "failures": self.failures,
            "aggregate": self.aggregate,
            "exit_code": self.exit_code,
        }

    def save(self) -> Path:
        write_json(self.report_path, self.payload())
        return self.report_path


def numeric_summary(records: list[dict[str, Any]], keys: list[str]) -> dict[str, dict[str, float]]:
    """mean / stderr / min / max of scalar fields across records."""
    out = {}
    for key in keys:
        values = np.asarray([r[key] for r in records if r.get(key) is not None], dtype=float)
        if not values.size:
            continue
        out[key] = {
            "mean": float(values.mean()),
            "stderr": float(values.std(ddof=1) / math.sqrt(values.size)) if values.size > 1 else math.nan,
            "min": float(values.min()),
            "max": float(values.max()),
        }
    return out


# --- moment comparison ------------------------------------------------------------------


class MomentRow(NamedTuple):
    k: int
    mean: float
    stderr: float
    theory: float | None
    ratio: float | None


def empirical_moments(cfg: ExperimentConfig, seed: int) -> list[float]:
    """(1/|V|) tr(A^k) for k = 1..K of one sample, truncated when eps is set."""
    g = generate(GraphConfig(m=cfg.m, n=cfg.n, seed=seed))
    if cfg.eps is not None:
        g = truncate(g, cfg.eps)
    return [walk_moment(g, k) for k in range(1, cfg.K + 1)]


def theory_moment(cfg: ExperimentConfig, k: int) -> float | None:
    if cfg.eps is not None:
        return limit_moment_C(k, cfg.eps, cfg.m)
    return untruncated_moment_asymptotics(k, cfg.m, cfg.n)


def moment_comparison_report(
    cfg: ExperimentConfig, samples: list[list[float]] | None = None
) -> list[MomentRow]:
    """(k, empirical mean, stderr, theory, ratio) for k = 1..K.

    ``samples`` holds per-replicate moment lists in seed order; without it the
    replicates are drawn here from ``cfg.base_seed``.
    """
    if samples is None:
        samples = [
            empirical_moments(cfg, replicate_seed(cfg.base_seed, r)) for r in range(cfg.replicates)
        ]
    if not samples:
        raise ValueError("moment comparison needs at least one replicate")
    data = np.asarray(samples, dtype=float)
    rows = []
    for k in range(1, cfg.K + 1):
        column = data[:, k - 1]
        mean = float(column.mean())
        stderr = float(column.std(ddof=1) / math.sqrt(column.size)) if column.size > 1 else math.nan
        theory = theory_moment(cfg, k)
        ratio = mean / theory if theory else None
        rows.append(MomentRow(k, mean, stderr, theory, ratio))
    log.info("moment comparison m=%d n=%d eps=%s over %d samples", cfg.m, cfg.n, cfg.eps, data.shape[0])
    return rows


def write_moment_table_csv(path: Path, cfg: ExperimentConfig, rows: list[MomentRow]) -> None:
    write_csv_table(
        path,
        artifact_header(cfg),
        ["k", "empirical_mean", "empirical_stderr", "theory", "ratio"],
        [tuple("" if v is None else v for v in row) for row in rows],
    )
