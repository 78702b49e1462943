import os
from dataclasses import dataclass, fields, replace
from typing import Dict, Tuple
from dotenv import load_dotenv

load_dotenv()


@dataclass(frozen=True)
class NumericsConfig:
    algebraic_tol: float = 1e-12
    reconstruction_tol: float = 1e-10
    excision_tol: float = 1e-12
    overflow_guard: float = 1e12
    noise_chunk: int = 4096
    poisson_normal_cutoff: float = 1e15


@dataclass(frozen=True)
class DiagnosticsConfig:
    flat_tail_ratio: float = 0.01
    growth_ratio: float = 0.10
    persistence_ratio: float = 0.5
    eps_values: Tuple[float, ...] = (0.1, 0.01)
    u_points: int = 40


@dataclass(frozen=True)
class RunnerConfig:
    threads: int
    block_size: int
    output_dir: str
    log_level: str
    log_file: str


@dataclass(frozen=True)
class AppConfig:
    app_name: str
    cli_name: str
    version: str


TUNABLE_THRESHOLDS = ("flat_tail_ratio", "growth_ratio", "persistence_ratio")


class Settings:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super(Settings, cls).__new__(cls)
            cls._instance._initialized = False
        return cls._instance

    def __init__(self):
        if self._initialized:
            return

        self.numerics = NumericsConfig(
            noise_chunk=int(os.getenv("SA_LAB_NOISE_CHUNK", "4096")),
        )

        self.diagnostics = DiagnosticsConfig(
            flat_tail_ratio=float(os.getenv("SA_LAB_FLAT_TAIL_RATIO", "0.01")),
            growth_ratio=float(os.getenv("SA_LAB_GROWTH_RATIO", "0.10")),
            persistence_ratio=float(os.getenv("SA_LAB_PERSISTENCE_RATIO", "0.5")),
        )

        self.runner = RunnerConfig(
            threads=int(os.getenv("SA_LAB_THREADS", "1")),
            block_size=int(os.getenv("SA_LAB_BLOCK_SIZE", "250")),
            output_dir=os.getenv("SA_LAB_OUTPUT_DIR", "out"),
            log_level=os.getenv("LOG_LEVEL", "WARNING").upper(),
            log_file=os.getenv("SA_LAB_LOG_FILE", "sa_lab.log"),
        )

        self.app = AppConfig(
            app_name="SA Lab",
            cli_name="sa-lab",
            version="1.0.0",
        )

        self._initialized = True

    def validate_runner_config(self) -> bool:
        return self.runner.threads >= 1 and self.runner.block_size >= 1

    def validate_diagnostics_config(self) -> bool:
        d = self.diagnostics
        return 0.0 < d.flat_tail_ratio < d.growth_ratio and 0.0 < d.persistence_ratio <= 1.0

    def diagnostics_with(self, overrides: Dict[str, float]) -> DiagnosticsConfig:
        known = {f.name for f in fields(DiagnosticsConfig)}
        unknown = [key for key in overrides if key not in known or key not in TUNABLE_THRESHOLDS]
        if unknown:
            raise KeyError(f"Unknown threshold(s): {', '.join(sorted(unknown))}")
        return replace(self.diagnostics, **overrides)


settings = Settings()
