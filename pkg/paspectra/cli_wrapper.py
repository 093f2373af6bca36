"""paspectra CLI: one subcommand per experiment, plus ``config`` and ``list``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

from paspectra.core.experiments import EXPERIMENT_IDS

console = Console()

# flag dest -> ExperimentConfig field
_OVERRIDES = {
    "m": "m",
    "n": "n",
    "eps": "eps",
    "K": "K",
    "replicates": "replicates",
    "seed": "base_seed",
    "output_dir": "output_dir",
    "normalize": "normalize",
    "bins": "bins",
    "pattern": "pattern",
    "method": "method",
    "sigma": "sigma",
    "gridsize": "gridsize",
    "eigen_method": "eigen_method",
    "s": "s",
    "t_thresh": "t_thresh",
    "k": "k",
    "b": "b",
    "max_edges": "max_edges",
}


def _experiment_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="experiment file; flags override its values")
    common.add_argument("-d", "--debug", action="store_true", help="Enable debug logging")
    common.add_argument("--workers", type=int, help="replicate worker processes (default: PASPECTRA_WORKERS or 1)")

    graph = common.add_argument_group("graph")
    graph.add_argument("--m", type=int, help="edges added per vertex")
    graph.add_argument("--n", type=int, help="number of vertices (verify-prob: process length)")
    graph.add_argument("--eps", type=float, help="truncate the first ceil(eps*n) vertices")
    graph.add_argument("--K", type=int, help="moment order / number of top eigenpairs")
    graph.add_argument("--replicates", type=int, help="independent samples")
    graph.add_argument("--seed", type=int, help="base seed; replicate r uses seed + r")
    graph.add_argument("--output-dir", type=Path, help="artifact directory")

    spectra = common.add_argument_group("spectrum / reconstruct")
    spectra.add_argument("--normalize", choices=["none", "binomial", "sqrt-m"], help="eigenvalue scaling")
    spectra.add_argument("--bins", type=int, help="histogram bins")
    spectra.add_argument(
        "--method",
        choices=["cumulant", "taylor"],
        help=(
            "characteristic-function model: taylor is the truncated Taylor series of the moments, "
            "inverted after Gaussian damping; cumulant (default) exponentiates the cumulant series "
            "of the same moments, which stays bounded where the Taylor polynomial blows up"
        ),
    )
    spectra.add_argument("--sigma", type=float, help="Gaussian smoothing width")
    spectra.add_argument("--gridsize", type=int, help="density grid points")

    census = common.add_argument_group("census")
    census.add_argument("--pattern", help="ordered pattern name")

    edges = common.add_argument_group("edge / localize")
    edges.add_argument("--eigen-method", choices=["lanczos", "power"], help="top eigenpair solver")
    edges.add_argument("--s", type=int, help="decomposition threshold s")
    edges.add_argument("--t-thresh", type=int, help="decomposition threshold t")
    edges.add_argument("--k", type=int, help="edge index range k")
    edges.add_argument("--b", type=int, help="degree slack b")

    verify = common.add_argument_group("verify-prob")
    verify.add_argument("--max-edges", type=int, help="largest labeled graph checked")
    return common


def _print_result(result) -> None:
    table = Table(title=f"{result.cfg.experiment} ({len(result.records)} ok, {len(result.failures)} failed)")
    table.add_column("key", style="cyan")
    table.add_column("value")
    for key, value in result.aggregate.items():
        if key == "table":
            continue
        text = json.dumps(value, default=str) if isinstance(value, (dict, list)) else str(value)
        table.add_row(key, text)
    console.print(table)

    rows = result.aggregate.get("table")
    if rows:
        moments = Table(title="moments")
        for col in ("k", "mean", "stderr", "theory", "ratio"):
            moments.add_column(col, justify="right")
        for row in rows:
            moments.add_row(*("-" if row[c] is None else f"{row[c]:.6g}" for c in ("k", "mean", "stderr", "theory", "ratio")))
        console.print(moments)

    for failure in result.failures:
        console.print(f"[bold red]seed {failure['seed']}:[/bold red] {failure['error']}")
    console.print(f"[dim]report: {result.report_path}[/dim]")


def cmd_experiment(args: argparse.Namespace) -> None:
    """Handle every experiment subcommand."""
    from paspectra.configurator import ConfigError, load_experiment_config
    from paspectra.main import configure_logging, start

    configure_logging(args.debug)
    overrides = {field: getattr(args, dest) for dest, field in _OVERRIDES.items()}
    overrides["experiment"] = args.command
    try:
        cfg = load_experiment_config(args.config, overrides)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)

    import asyncio
    import logging

    try:
        result = asyncio.run(start(cfg, args.workers))
    except KeyboardInterrupt:
        sys.exit(130)
    except Exception as e:
        logging.getLogger("paspectra").error("Fatal error: %s", e, exc_info=True)
        sys.exit(1)
    _print_result(result)
    sys.exit(result.exit_code)


def cmd_config(args: argparse.Namespace) -> None:
    """Handle the 'config' subcommand."""
    from paspectra.configurator import ConfigError, run_configurator

    try:
        run_configurator(args.path, args.experiment, args.force)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)


def cmd_list(args: argparse.Namespace) -> None:
    """Handle the 'list' subcommand."""
    from paspectra.core.experiments import discover_builtin_experiments, get_all_experiments

    discover_builtin_experiments()
    table = Table(title="experiments")
    table.add_column("id", style="cyan")
    table.add_column("replicated")
    table.add_column("description")
    for name, entry in sorted(get_all_experiments().items()):
        table.add_row(name, "yes" if entry["replicated"] else "no", entry["description"])
    console.print(table)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="paspectra",
        description="Spectra of preferential-attachment graphs: sampling, limiting moments and edge eigenvalues",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  paspectra generate --m 3 --n 10000 --replicates 5 --seed 7
  paspectra spectrum --m 5 --n 6000 --normalize binomial
  paspectra truncate-compare --m 2 --eps 0.1 --n 200000 --K 4 --replicates 20
  paspectra reconstruct --m 15 --eps 0.1 --K 6 --n 4000 --normalize sqrt-m
  paspectra localize --m 5 --n 50000 --K 3
  paspectra verify-prob --n 6
  paspectra config experiment.conf --experiment census
  paspectra list
""",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    common = _experiment_flags()
    for name in EXPERIMENT_IDS:
        sub = subparsers.add_parser(name, parents=[common], help=f"run the {name} experiment")
        sub.set_defaults(handler=cmd_experiment)

    config_parser = subparsers.add_parser("config", help="write a commented experiment-file template")
    config_parser.add_argument("path", type=Path, help="where to write the template")
    config_parser.add_argument("--experiment", choices=EXPERIMENT_IDS, default="generate")
    config_parser.add_argument("--force", action="store_true", help="overwrite an existing file")
    config_parser.set_defaults(handler=cmd_config)

    list_parser = subparsers.add_parser("list", help="list registered experiments")
    list_parser.set_defaults(handler=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> None:
    """Main CLI entrypoint."""
    args = build_parser().parse_args(argv)
    args.handler(args)


if __name__ == "__main__":
    main()
