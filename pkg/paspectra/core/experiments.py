"""Experiment registry: configuration model, discovery and execution."""

from __future__ import annotations

import importlib
import inspect
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Literal

from pydantic import BaseModel, ConfigDict, Field, model_validator

from paspectra.config import settings

log = logging.getLogger(__name__)

EXPERIMENT_IDS = (
    "generate",
    "spectrum",
    "moments",
    "truncate-compare",
    "census",
    "reconstruct",
    "edge",
    "localize",
    "verify-prob",
)

ExperimentId = Literal[
    "generate",
    "spectrum",
    "moments",
    "truncate-compare",
    "census",
    "reconstruct",
    "edge",
    "localize",
    "verify-prob",
]


class ExperimentConfig(BaseModel):
    """Everything that determines an experiment's artifacts (besides the code)."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    experiment: ExperimentId
    m: int = Field(default=2, ge=1)
    n: int = Field(default=1000, ge=1)
    eps: float | None = Field(default=None, gt=0.0, lt=1.0)
    K: int = Field(default=4, ge=0)
    replicates: int = Field(default=1, ge=1)
    base_seed: int = Field(default=0, ge=0, lt=2**64)
    output_dir: Path | None = None

    # spectrum / reconstruct
    normalize: Literal["none", "binomial", "sqrt-m"] = "none"
    bins: int = Field(default=100, ge=1)

    # census
    pattern: str = "path-center-first"

    # reconstruct
    method: Literal["cumulant", "taylor"] = "cumulant"
    sigma: float | None = Field(default=None, gt=0.0)
    gridsize: int = Field(default=2048, ge=2)

    # edge / localize
    eigen_method: Literal["lanczos", "power"] = "lanczos"
    s: int | None = Field(default=None, ge=1)
    t_thresh: int | None = Field(default=None, ge=1)
    k: int | None = Field(default=None, ge=1)
    b: int | None = Field(default=None, ge=1)

    # verify-prob
    max_edges: int = Field(default=3, ge=1)

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if self.experiment in ("moments", "truncate-compare", "reconstruct") and self.K > settings.moment_order_cap:
            raise ValueError(f"K={self.K} exceeds the moment order cap {settings.moment_order_cap}")
        if self.experiment in ("moments", "reconstruct") and self.eps is None:
            raise ValueError(f"experiment {self.experiment!r} needs eps")
        if self.experiment == "verify-prob" and self.n > settings.atlas_cap:
            raise ValueError(f"verify-prob enumerates the process; n={self.n} exceeds cap {settings.atlas_cap}")
        if self.experiment == "census":
            from paspectra.core.census import PATTERNS

            if self.pattern not in PATTERNS:
                raise ValueError(f"unknown census pattern {self.pattern!r}; choose from {sorted(PATTERNS)}")
        return self

    def threshold_overrides(self) -> dict[str, int | None]:
        return {"s": self.s, "t_thresh": self.t_thresh, "k": self.k, "b": self.b}

    def resolved_output_dir(self, digest: str) -> Path:
        return self.output_dir or settings.output_dir / f"{self.experiment}-{digest}"


@dataclass
class ReplicateContext:
    """What a single replicate is told: its index, seed and where to put files."""

    r: int
    seed: int
    output_dir: Path
    header: dict[str, Any] = field(default_factory=dict)

    def path(self, name: str) -> Path:
        return self.output_dir / name


# Global registry
_EXPERIMENTS: dict[str, dict[str, Any]] = {}


def experiment(
    name: str,
    description: str,
    replicated: bool = True,
    summarize: Callable[[ExperimentConfig, list[dict]], dict] | None = None,
):
    """Register a replicate function ``func(cfg, ctx) -> record``.

    Non-replicated experiments run once with the base seed regardless of
    ``cfg.replicates``; ``summarize`` turns the seed-ordered records into the
    aggregate block of the report.
    """
    if name not in EXPERIMENT_IDS:
        raise ValueError(f"unknown experiment id {name!r}")

    def decorator(func: Callable) -> Callable:
        _EXPERIMENTS[name] = {
            "name": name,
            "description": description,
            "replicated": replicated,
            "summarize": summarize,
            "function": func,
        }
        func._experiment_name = name
        return func

    return decorator


def get_all_experiments() -> dict[str, dict[str, Any]]:
    return _EXPERIMENTS.copy()


def get_experiment(name: str) -> dict[str, Any]:
    if name not in _EXPERIMENTS:
        discover_builtin_experiments()
    entry = _EXPERIMENTS.get(name)
    if entry is None:
        raise KeyError(f"unknown experiment {name!r}")
    return entry


def unregister_experiment(name: str) -> bool:
    if name in _EXPERIMENTS:
        del _EXPERIMENTS[name]
        return True
    return False


def run_replicate(name: str, cfg: ExperimentConfig, ctx: ReplicateContext) -> dict:
    """Look up and call one replicate; importable by worker processes."""
    entry = get_experiment(name)
    func = entry["function"]
    if inspect.iscoroutinefunction(func):
        raise TypeError(f"experiment {name!r} must be a plain function")
    record = func(cfg, ctx)
    return {"seed": ctx.seed, **record}


def discover_builtin_experiments() -> None:
    """Import all builtin experiment modules to register their experiments."""
    builtin_dir = Path(__file__).parent.parent / "builtin_experiments"
    for py_file in sorted(builtin_dir.glob("*.py")):
        if py_file.name.startswith("_"):
            continue
        module_name = f"paspectra.builtin_experiments.{py_file.stem}"
        try:
            importlib.import_module(module_name)
            log.debug("Loaded builtin experiments from %s", py_file.name)
        except Exception as e:
            log.error("Failed to load %s: %s", py_file.name, e)
    log.debug("Total experiments registered: %d", len(_EXPERIMENTS))


async def execute_experiment(cfg: ExperimentConfig, workers: int | None = None):
    """Run every replicate of ``cfg`` and write the report; returns the RunResult.

    A replicate that raises is logged and recorded under ``failures``; the run
    goes on and the result's exit code turns to 1.
    """
    from paspectra.core.graph import replicate_seed
    from paspectra.reports import RunResult, artifact_header, config_hash
    from paspectra.scheduler.replicates import ReplicateScheduler

    entry = get_experiment(cfg.experiment)
    out = cfg.resolved_output_dir(config_hash(cfg))
    out.mkdir(parents=True, exist_ok=True)

    count = cfg.replicates if entry["replicated"] else 1
    contexts = []
    for r in range(count):
        seed = replicate_seed(cfg.base_seed, r)
        contexts.append(ReplicateContext(r, seed, out, artifact_header(cfg, seed)))

    async with ReplicateScheduler(workers) as scheduler:
        outcomes = await scheduler.run(cfg.experiment, cfg, contexts)

    result = RunResult(cfg=cfg, output_dir=out)
    for outcome in outcomes:
        if outcome.ok:
            result.records.append(outcome.record)
        else:
            result.failures.append({"seed": outcome.seed, "error": outcome.error})

    summarize = entry["summarize"]
    if summarize is not None and result.records:
        try:
            result.aggregate = summarize(cfg, result.records)
        except Exception as e:
            log.error("Summary of %s failed: %s", cfg.experiment, e, exc_info=True)
            result.failures.append({"seed": None, "error": f"summary: {type(e).__name__}: {e}"})
    result.save()
    log.info(
        "%s finished: %d ok, %d failed -> %s",
        cfg.experiment,
        len(result.records),
        len(result.failures),
        result.report_path,
    )
    return result
