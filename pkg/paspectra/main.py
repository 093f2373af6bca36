"""paspectra main entrypoint: configures logging and runs one experiment."""

from __future__ import annotations

import argparse
import asyncio
import logging
import sys

from paspectra.config import settings

log = logging.getLogger("paspectra")


def configure_logging(debug: bool = False) -> None:
    logging.basicConfig(
        level=logging.DEBUG if debug else logging.WARNING,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
        force=True,
    )
    if not debug:
        # our own progress at INFO, third-party libraries only when they warn
        logging.getLogger("paspectra").setLevel(logging.INFO)


async def start(cfg, workers: int | None = None):
    """Discover experiments and execute ``cfg``; returns the RunResult."""
    from paspectra.core.experiments import discover_builtin_experiments, execute_experiment, get_all_experiments

    discover_builtin_experiments()
    log.debug("Registered %d experiments", len(get_all_experiments()))
    return await execute_experiment(cfg, workers=workers or settings.workers)


def run(cfg, workers: int | None = None) -> int:
    """Synchronous wrapper; the exit code is nonzero on any failed replicate or check."""
    try:
        result = asyncio.run(start(cfg, workers))
    except KeyboardInterrupt:
        return 130
    except Exception as e:
        log.error("Fatal error: %s", e, exc_info=True)
        return 1
    return result.exit_code


def main() -> None:
    parser = argparse.ArgumentParser(description="Run one paspectra experiment from a config file")
    parser.add_argument("config", help="experiment file (key = value lines)")
    parser.add_argument("-d", "--debug", action="store_true", help="Enable debug logging")
    args = parser.parse_args()
    configure_logging(args.debug)

    from paspectra.configurator import ConfigError, load_experiment_config

    try:
        cfg = load_experiment_config(args.config)
    except ConfigError as e:
        print(f"Error: {e}", file=sys.stderr)
        sys.exit(1)
    sys.exit(run(cfg))


if __name__ == "__main__":
    main()
