"""Experiment files: ``key = value`` lines read into an ExperimentConfig, and a template writer."""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Any

from pydantic import ValidationError
from rich.console import Console
from rich.panel import Panel

from paspectra.core.experiments import ExperimentConfig

log = logging.getLogger(__name__)

console = Console()

# Template layout; every ExperimentConfig field appears in exactly one section
SECTIONS: dict[str, list[str]] = {
    "experiment": ["experiment", "replicates", "base_seed", "output_dir"],
    "graph": ["m", "n", "eps"],
    "moments": ["K", "normalize", "bins"],
    "census": ["pattern"],
    "reconstruct": ["method", "sigma", "gridsize"],
    "localize": ["eigen_method", "s", "t_thresh", "k", "b"],
    "verify": ["max_edges"],
}

DESCRIPTIONS = {
    "experiment": "generate | spectrum | moments | truncate-compare | census | reconstruct | edge | localize | verify-prob",
    "replicates": "independent samples, seeds base_seed + r",
    "base_seed": "seed of replicate 0",
    "output_dir": "artifact directory (default runs/<experiment>-<config hash>)",
    "m": "edges added per vertex",
    "n": "number of vertices",
    "eps": "truncation fraction in (0, 1); none for the full graph",
    "K": "moment order / number of top eigenpairs",
    "normalize": "none | binomial | sqrt-m",
    "bins": "histogram bins",
    "pattern": "census pattern: loop, double-loop, edge, double-edge, path-center-first|middle|last",
    "method": "cumulant (default, bounded cumulant series) | taylor (truncated Taylor series, may diverge)",
    "sigma": "Gaussian smoothing width; none for 0.15*sqrt(C_2)",
    "gridsize": "density grid points",
    "eigen_method": "lanczos | power",
    "s": "decomposition threshold s (none: ceil(n^(1/7)))",
    "t_thresh": "decomposition threshold t (none: ceil(n^(13/25)))",
    "k": "edge index range k (none: ceil(n^(1/25)))",
    "b": "degree slack b (none: ceil(n^(1/20)))",
    "max_edges": "largest labeled graph checked by verify-prob",
}

_NONE = {"", "none", "null"}

# fields that accept None; elsewhere "none" is an ordinary value (normalize = none)
_OPTIONAL = {name for name, f in ExperimentConfig.model_fields.items() if f.default is None}


class ConfigError(ValueError):
    """Bad experiment file or value; ``line`` is 1-based, None when not tied to a line."""

    def __init__(self, message: str, path: Path | None = None, line: int | None = None):
        self.path = path
        self.line = line
        self.message = message
        where = f"{path}:{line}: " if path is not None and line is not None else (f"{path}: " if path else "")
        super().__init__(f"{where}{message}")


def read_experiment_file(path: Path) -> tuple[dict[str, str], dict[str, int]]:
    """Values and the line each key was set on."""
    path = Path(path)
    if not path.exists():
        raise ConfigError("file not found", path)
    values: dict[str, str] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", path, lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError("missing key before '='", path, lineno)
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"unknown key {key!r}", path, lineno)
        if key in values:
            raise ConfigError(f"{key!r} already set on line {lines[key]}", path, lineno)
        values[key] = value
        lines[key] = lineno
    return values, lines


def load_experiment_config(
    path: Path | None = None, overrides: dict[str, Any] | None = None
) -> ExperimentConfig:
    """defaults < file < overrides; ``None`` overrides are ignored."""
    raw: dict[str, Any] = {}
    lines: dict[str, int] = {}
    if path is not None:
        values, lines = read_experiment_file(path)
        raw.update(
            {k: (None if k in _OPTIONAL and v.lower() in _NONE else v) for k, v in values.items()}
        )
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in ExperimentConfig.model_fields:
            raise ConfigError(f"unknown option {key!r}")
        raw[key] = value
        lines.pop(key, None)

    try:
        return ExperimentConfig(**raw)
    except ValidationError as e:
        first = e.errors()[0]
        loc = first["loc"][0] if first["loc"] else None
        message = f"{loc}: {first['msg']}" if loc else first["msg"]
        raise ConfigError(message, path, lines.get(loc) if loc else None) from e


def template_text(experiment: str = "generate") -> str:
    defaults = ExperimentConfig(experiment="generate").model_dump()
    defaults["experiment"] = experiment
    # the template must load as written
    if experiment in ("moments", "reconstruct"):
        defaults["eps"] = 0.1
    if experiment == "verify-prob":
        defaults["n"] = 6
    out = ["# paspectra experiment file: key = value, '#' starts a comment", ""]
    for section, keys in SECTIONS.items():
        out.append(f"[{section}]")
        for key in keys:
            value = defaults[key]
            out.append(f"# {DESCRIPTIONS[key]}")
            out.append(f"{key} = {'none' if value is None else value}")
        out.append("")
    return "\n".join(out)


def write_template(path: Path, experiment: str = "generate", force: bool = False) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise ConfigError("refusing to overwrite an existing file (use --force)", path)
    path.write_text(template_text(experiment), encoding="utf-8")
    return path


def run_configurator(path: Path, experiment: str = "generate", force: bool = False) -> None:
    """Write a commented template and say what to do next."""
    written = write_template(path, experiment, force)
    console.print(
        Panel(
            f"[bold green]Template written to {written}[/bold green]\n\n"
            f"Edit it, then run [bold cyan]paspectra {experiment} --config {written}[/bold cyan].",
            border_style="green",
        )
    )
