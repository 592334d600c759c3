"""Seed-deterministic, trial-parallel Monte Carlo harness.

Trials are independent work units. Each writes its row of outputs into a
preallocated array by trial index, so the aggregate never depends on how many
workers ran or in which order they finished.
"""

import asyncio
import logging
import time
from dataclasses import dataclass
from functools import partial
from typing import Callable, Sequence

import numpy as np

from .distributions import DistributionSpec
from .errors import PlanError
from .game import MAX_CENSUS_SUPPORT
from .streams import check_seed, substream
from .utils import gather_bounded, resolve_threads

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 256

Kernel = Callable[[np.random.Generator, "TrialPlan"], Sequence[float]]


@dataclass(frozen=True)
class TrialPlan:
    spec: DistributionSpec
    n: int
    trials: int
    master_seed: int
    max_support: int = 2

    def __post_init__(self):
        if not isinstance(self.spec, DistributionSpec):
            raise TypeError("spec must be an instance of esslab.distributions.DistributionSpec")
        if self.n < 1:
            raise PlanError(f"n must be positive, got {self.n}")
        if self.trials < 1:
            raise PlanError(f"trials must be at least 1, got {self.trials}")
        check_seed(self.master_seed)
        if not 1 <= self.max_support <= MAX_CENSUS_SUPPORT:
            raise PlanError(
                f"max_support must be in 1..{MAX_CENSUS_SUPPORT}, got {self.max_support}"
            )


def _run_chunk(plan: TrialPlan, kernel: Kernel, out: np.ndarray, start: int, stop: int):
    for trial in range(start, stop):
        out[trial] = kernel(substream(plan.master_seed, trial), plan)


async def run_trials_async(
    plan: TrialPlan,
    kernel: Kernel,
    width: int,
    *,
    threads: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    threads = resolve_threads(threads)
    if chunk_size < 1:
        raise PlanError(f"chunk_size must be positive, got {chunk_size}")
    out = np.zeros((plan.trials, width))
    calls = [
        partial(_run_chunk, plan, kernel, out, start, min(start + chunk_size, plan.trials))
        for start in range(0, plan.trials, chunk_size)
    ]
    started = time.perf_counter()
    logger.info(
        "running %s: dist=%s n=%d trials=%d threads=%d",
        getattr(kernel, "__name__", "kernel"), plan.spec, plan.n, plan.trials, threads,
    )
    await gather_bounded(threads, calls)
    logger.info("finished %d trials in %.2fs", plan.trials, time.perf_counter() - started)
    return out


def run_trials(
    plan: TrialPlan,
    kernel: Kernel,
    width: int,
    *,
    threads: int | None = None,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> np.ndarray:
    return asyncio.run(
        run_trials_async(plan, kernel, width, threads=threads, chunk_size=chunk_size)
    )
