from src.montecarlo.config import GridMode, GridSpec, McConfig, StatisticSpec, DEFAULT_STATISTICS
from src.montecarlo.statistics import McSummary, StatisticSummary, ks_statistic, summarize
from src.montecarlo.harness import run_replications

__all__ = [
    "GridMode",
    "GridSpec",
    "McConfig",
    "StatisticSpec",
    "DEFAULT_STATISTICS",
    "McSummary",
    "StatisticSummary",
    "ks_statistic",
    "summarize",
    "run_replications",
]
