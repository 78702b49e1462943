"""Replication harness.

Replications are cut into fixed blocks of ``block_size``; each block runs one
vectorized EulerStepper with its own per-replication streams and writes into
index-addressed arrays, so the result does not depend on the thread count.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from src.asymptotics.online import OnlineDecomposition
from src.asymptotics.predictions import Statistic, normalizer_exponent, predicted_variance
from src.config import settings
from src.core.errors import AllDivergentError, ValidationError
from src.core.grid import TimeGrid
from src.core.rng import streams
from src.engine.stepper import EulerStepper
from src.models.registry import build_model
from src.models.spec import ModelSpec
from src.montecarlo.config import McConfig, StatisticSpec
from src.montecarlo.statistics import McSummary, StatisticSummary, summarize

logger = logging.getLogger(__name__)

ProgressCallback = Callable[[int], None]


def checkpoint_steps(grid: TimeGrid, times) -> List[int]:
    steps = sorted({grid.index_at(t) for t in times} | {grid.n_steps})
    return [s for s in steps if s > 0]


def blocks(replications: int, block_size: int) -> List[range]:
    return [range(s, min(s + block_size, replications)) for s in range(0, replications, block_size)]


def statistic_values(spec: StatisticSpec, snapshot: Dict[str, np.ndarray], K: float,
                     exponent: Optional[float]) -> np.ndarray:
    s = spec.statistic
    with np.errstate(over="ignore", invalid="ignore"):
        if s == Statistic.Z_TERMINAL:
            return (1.0 + K) ** exponent * snapshot["z"]
        if s == Statistic.ZBAR_TERMINAL:
            return (1.0 + K) ** exponent * snapshot["zbar"]
        if s == Statistic.CHI_Z:
            return snapshot["chi"] * snapshot["z"]
        if s == Statistic.ZBAR_EPS:
            return np.sqrt(snapshot["eps_alpha"]) * snapshot["zbar_alpha"]
        if s == Statistic.RATE_MONITOR:
            return snapshot[f"rate_{spec.delta:g}"]
        return snapshot["remainder"]


class _Collector:
    """Index-addressed storage for every statistic at every checkpoint."""

    def __init__(self, config: McConfig, grid: TimeGrid, steps: List[int]):
        n = config.replications
        self.values = {
            (spec.label, step): np.full(n, np.nan) for spec in config.statistics for step in steps
        }
        self.divergence = np.full(n, -1, dtype=np.int64)

    def store(self, indices: range, divergence: np.ndarray, per_block: Dict[Tuple[str, int], np.ndarray]):
        window = slice(indices.start, indices.stop)
        self.divergence[window] = divergence
        for key, values in per_block.items():
            self.values[key][window] = values


def _run_block(model: ModelSpec, grid: TimeGrid, config: McConfig, steps: List[int],
               indices: range) -> Tuple[range, np.ndarray, Dict[Tuple[str, int], np.ndarray]]:
    deltas = [s.delta for s in config.statistics if s.statistic == Statistic.RATE_MONITOR]
    online = OnlineDecomposition(grid, config.weight_kind, config.alpha, deltas, steps)
    result = EulerStepper(model, grid, streams(config.master_seed, indices)).run([online])

    out = {}
    for spec in config.statistics:
        exponent = normalizer_exponent(config.model, spec.statistic)
        for step in steps:
            out[(spec.label, step)] = statistic_values(spec, online.at(step), grid.K[step], exponent)
    logger.debug(f"Block {indices.start}..{indices.stop - 1} done ({result.divergent_count} divergent)")
    return indices, result.divergence, out


def run_replications(config: McConfig, threads: Optional[int] = None,
                     progress: Optional[ProgressCallback] = None) -> McSummary:
    config.validate()
    threads = threads or settings.runner.threads
    if threads < 1:
        raise ValidationError("threads must be >= 1")

    started = time.perf_counter()
    grid = config.grid.build()
    model = build_model(config.model, grid)
    steps = checkpoint_steps(grid, config.checkpoints)
    collector = _Collector(config, grid, steps)
    work = blocks(config.replications, settings.runner.block_size)

    logger.info(
        f"Monte Carlo {config.model.name.value}: {config.replications} replications, "
        f"{len(work)} block(s), {threads} thread(s)"
    )
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(_run_block, model, grid, config, steps, indices) for indices in work]
        for future in as_completed(futures):
            indices, divergence, values = future.result()
            collector.store(indices, divergence, values)
            if progress:
                progress(len(indices))

    divergence = collector.divergence
    if np.all(divergence >= 0):
        raise AllDivergentError(f"all {config.replications} replications diverged")

    rows: List[StatisticSummary] = []
    for spec in config.statistics:
        prediction = predicted_variance(config.model, spec.statistic)
        for step in steps:
            excluded = (divergence >= 0) & (divergence <= step)
            rows.append(
                summarize(spec.label, spec.statistic, float(grid.times[step]),
                          collector.values[(spec.label, step)], excluded, prediction)
            )

    elapsed = time.perf_counter() - started
    logger.info(f"Monte Carlo finished in {elapsed:.2f}s ({int(np.count_nonzero(divergence >= 0))} divergent)")
    return McSummary(
        model=config.model.name.value,
        replications=config.replications,
        master_seed=config.master_seed,
        rows=tuple(rows),
        elapsed=elapsed,
    )
