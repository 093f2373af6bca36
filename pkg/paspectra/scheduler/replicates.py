"""Replicate scheduler: runs the seeds of one experiment on a worker pool."""

from __future__ import annotations

import asyncio
import logging
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any

from paspectra.config import settings
from paspectra.core.experiments import ExperimentConfig, ReplicateContext, run_replicate

log = logging.getLogger(__name__)


@dataclass
class ReplicateOutcome:
    r: int
    seed: int
    record: dict[str, Any] | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


class ReplicateScheduler:
    """Fans replicates out to threads (workers == 1) or processes, and collects them in seed order."""

    def __init__(self, workers: int | None = None):
        self.workers = max(1, workers or settings.workers)
        self._executor: Executor | None = None

    def start(self) -> None:
        if self._executor is not None or self.workers == 1:
            return
        self._executor = ProcessPoolExecutor(max_workers=self.workers)
        log.info("Replicate pool started (%d workers)", self.workers)

    def stop(self) -> None:
        if self._executor is not None:
            self._executor.shutdown(wait=True, cancel_futures=True)
            self._executor = None

    async def __aenter__(self) -> "ReplicateScheduler":
        self.start()
        return self

    async def __aexit__(self, *exc: object) -> None:
        self.stop()

    async def _one(self, name: str, cfg: ExperimentConfig, ctx: ReplicateContext) -> ReplicateOutcome:
        log.info("replicate %d (seed %d) of %s started", ctx.r, ctx.seed, name)
        try:
            if self._executor is None:
                record = await asyncio.to_thread(run_replicate, name, cfg, ctx)
            else:
                loop = asyncio.get_running_loop()
                record = await loop.run_in_executor(self._executor, run_replicate, name, cfg, ctx)
        except Exception as e:
            log.error("replicate %d (seed %d) of %s failed: %s", ctx.r, ctx.seed, name, e, exc_info=True)
            return ReplicateOutcome(ctx.r, ctx.seed, error=f"{type(e).__name__}: {e}")
        log.info("replicate %d (seed %d) of %s finished", ctx.r, ctx.seed, name)
        return ReplicateOutcome(ctx.r, ctx.seed, record=record)

    async def run(
        self, name: str, cfg: ExperimentConfig, contexts: list[ReplicateContext]
    ) -> list[ReplicateOutcome]:
        """All replicates; a failing one is recorded and the others keep going."""
        if self._executor is None:
            # one at a time keeps memory flat for large n
            outcomes = [await self._one(name, cfg, ctx) for ctx in contexts]
        else:
            outcomes = await asyncio.gather(*(self._one(name, cfg, ctx) for ctx in contexts))
        return sorted(outcomes, key=lambda o: o.r)
