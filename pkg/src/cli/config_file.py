"""Run configuration files.

Flat ``[section]`` blocks of ``key = value`` lines; ``#`` and ``;`` start
comment lines. Parsing is strict: unknown sections or keys, duplicates, type
mismatches and missing required keys raise ConfigError with the line number.
"""
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

from src.asymptotics.averaging import WeightKind
from src.config import settings
from src.config.settings import TUNABLE_THRESHOLDS
from src.core.errors import ConfigError, LabError
from src.core.rng import validate_seed
from src.models.registry import PARAMETER_DEFAULTS, REQUIRED_PARAMETERS, validate_model_id
from src.models.spec import ModelId, ModelName
from src.montecarlo.config import DEFAULT_STATISTICS, GridMode, GridSpec, McConfig, StatisticSpec

logger = logging.getLogger(__name__)


class Subcommand(str, Enum):
    SIMULATE = "simulate"
    DECOMPOSE = "decompose"
    AVERAGE = "average"
    VERIFY = "verify"
    MC = "mc"


@dataclass(frozen=True)
class McSection:
    replications: Optional[int] = None
    statistics: Tuple[StatisticSpec, ...] = DEFAULT_STATISTICS
    weight: WeightKind = WeightKind.ALPHA_WEIGHT
    alpha: float = 1.0
    checkpoints: Tuple[float, ...] = ()


@dataclass(frozen=True)
class VerifySection:
    delta: Optional[float] = None
    delta0: Optional[float] = None
    epsilon: Optional[float] = None
    u_min: float = 0.01
    u_max: float = 100.0


@dataclass(frozen=True)
class AverageSection:
    weight: WeightKind = WeightKind.ALPHA_WEIGHT
    alpha: float = 1.0


@dataclass(frozen=True)
class RunConfig:
    subcommand: Subcommand
    model: ModelId
    grid: GridSpec
    seed: int = 0
    output: Optional[str] = None
    threads: Optional[int] = None
    mc: McSection = McSection()
    verify: VerifySection = VerifySection()
    average: AverageSection = AverageSection()
    thresholds: Tuple[Tuple[str, float], ...] = ()
    defaults_applied: Tuple[str, ...] = field(default=(), compare=False)

    @property
    def output_dir(self) -> str:
        return self.output or settings.runner.output_dir

    def mc_config(self) -> McConfig:
        return McConfig(
            model=self.model,
            grid=self.grid,
            replications=self.mc.replications,
            master_seed=self.seed,
            statistics=self.mc.statistics,
            weight_kind=self.mc.weight,
            alpha=self.mc.alpha,
            checkpoints=self.mc.checkpoints,
        )

    def diagnostics(self):
        return settings.diagnostics_with(dict(self.thresholds))

    def with_overrides(self, seed: Optional[int] = None, output: Optional[str] = None,
                       threads: Optional[int] = None) -> "RunConfig":
        updates = {}
        if seed is not None:
            updates["seed"] = validate_seed(seed)
        if output is not None:
            updates["output"] = output
        if threads is not None:
            updates["threads"] = threads
        return replace(self, **updates) if updates else self


def _to_int(text: str) -> int:
    return int(text)


def _to_float(text: str) -> float:
    return float(text)


def _to_list(text: str) -> List[str]:
    return [item.strip() for item in text.split(",") if item.strip()]


def _to_floats(text: str) -> Tuple[float, ...]:
    return tuple(float(item) for item in _to_list(text))


def _to_statistics(text: str) -> Tuple[StatisticSpec, ...]:
    # commas inside rate_monitor(...) never occur, δ is a single number
    return tuple(StatisticSpec.parse(item) for item in _to_list(text))


Converter = Callable[[str], object]

SCHEMA: Dict[str, Dict[str, Converter]] = {
    "run": {"subcommand": Subcommand, "seed": _to_int, "output": str, "threads": _to_int},
    "model": {"name": ModelName, "z0": _to_float},
    "grid": {"mode": GridMode, "T": _to_float, "dt": _to_float, "steps": _to_int},
    "mc": {
        "replications": _to_int,
        "statistics": _to_statistics,
        "weight": WeightKind,
        "alpha": _to_float,
        "checkpoints": _to_floats,
    },
    "verify": {
        "delta": _to_float,
        "delta0": _to_float,
        "epsilon": _to_float,
        "u_min": _to_float,
        "u_max": _to_float,
    },
    "average": {"weight": WeightKind, "alpha": _to_float},
    "thresholds": {name: _to_float for name in TUNABLE_THRESHOLDS},
}

MODEL_PARAMETERS = set().union(*PARAMETER_DEFAULTS.values(), *REQUIRED_PARAMETERS.values())


@dataclass
class _Entry:
    value: object
    line: int


class _Parsed:
    def __init__(self):
        self.sections: Dict[str, Tuple[int, Dict[str, _Entry]]] = {}

    def section(self, name: str) -> Dict[str, _Entry]:
        return self.sections.get(name, (0, {}))[1]

    def line_of(self, name: str) -> Optional[int]:
        return self.sections[name][0] if name in self.sections else None

    def get(self, section: str, key: str, default=None):
        entry = self.section(section).get(key)
        return default if entry is None else entry.value


def _read_lines(text: str) -> _Parsed:
    parsed = _Parsed()
    current: Optional[Dict[str, _Entry]] = None
    current_name = None

    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("[") and line.endswith("]"):
            current_name = line[1:-1].strip()
            if current_name not in SCHEMA:
                raise ConfigError(f"unknown section [{current_name}]", number)
            if current_name in parsed.sections:
                raise ConfigError(f"duplicate section [{current_name}]", number)
            current = {}
            parsed.sections[current_name] = (number, current)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", number)
        if current is None:
            raise ConfigError("key outside of a section", number)

        key, _, value = (part.strip() for part in line.partition("="))
        schema = SCHEMA[current_name]
        if current_name == "model" and key in MODEL_PARAMETERS:
            converter = _to_float
        elif key in schema:
            converter = schema[key]
        else:
            raise ConfigError(f"unknown key {key!r} in [{current_name}]", number)
        if key in current:
            raise ConfigError(f"duplicate key {key!r} in [{current_name}]", number)
        try:
            current[key] = _Entry(converter(value), number)
        except (ValueError, LabError) as e:
            raise ConfigError(f"{current_name}.{key}: cannot parse {value!r} ({e})", number) from None
    return parsed


def _require(parsed: _Parsed, section: str, key: str):
    entry = parsed.section(section).get(key)
    if entry is None:
        raise ConfigError(f"missing required key {section}.{key}", parsed.line_of(section))
    return entry.value


def _checked(fn, line: Optional[int]):
    try:
        return fn()
    except LabError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e), line) from None


def parse_text(text: str) -> RunConfig:
    parsed = _read_lines(text)
    defaults: List[str] = []

    def default(section: str, key: str, value):
        if key not in parsed.section(section):
            defaults.append(f"{section}.{key}={value}")
        return parsed.get(section, key, value)

    subcommand = _require(parsed, "run", "subcommand")
    seed_entry = parsed.section("run").get("seed")
    seed = default("run", "seed", 0)
    _checked(lambda: validate_seed(seed), seed_entry.line if seed_entry else None)
    threads = parsed.get("run", "threads")
    if threads is not None and threads < 1:
        raise ConfigError("run.threads must be >= 1", parsed.section("run")["threads"].line)

    name = _require(parsed, "model", "name")
    params = {k: e.value for k, e in parsed.section("model").items() if k not in ("name", "z0")}
    model_id = ModelId(name=name, parameters=tuple(params.items()), z0=default("model", "z0", 0.0))
    name_line = parsed.section("model")["name"].line
    resolved = _checked(lambda: validate_model_id(model_id), name_line)
    for key, value in resolved.items():
        if key not in params:
            defaults.append(f"model.{key}={value!r}")

    grid_line = parsed.line_of("grid")
    mode = default("grid", "mode", GridMode.CONTINUOUS)
    grid = GridSpec(mode=mode, horizon=parsed.get("grid", "T"), dt=parsed.get("grid", "dt"),
                    steps=parsed.get("grid", "steps"))
    if grid_line is None:
        raise ConfigError("missing required section [grid]")
    _checked(grid.validate, grid_line)

    mc = McSection(
        replications=parsed.get("mc", "replications"),
        statistics=default("mc", "statistics", DEFAULT_STATISTICS),
        weight=default("mc", "weight", WeightKind.ALPHA_WEIGHT),
        alpha=default("mc", "alpha", 1.0),
        checkpoints=parsed.get("mc", "checkpoints", ()),
    )
    verify = VerifySection(
        delta=parsed.get("verify", "delta"),
        delta0=parsed.get("verify", "delta0"),
        epsilon=parsed.get("verify", "epsilon"),
        u_min=default("verify", "u_min", 0.01),
        u_max=default("verify", "u_max", 100.0),
    )
    average = AverageSection(
        weight=default("average", "weight", WeightKind.ALPHA_WEIGHT),
        alpha=default("average", "alpha", 1.0),
    )
    thresholds = tuple(sorted((k, e.value) for k, e in parsed.section("thresholds").items()))

    config = RunConfig(
        subcommand=subcommand,
        model=model_id,
        grid=grid,
        seed=seed,
        output=parsed.get("run", "output"),
        threads=threads,
        mc=mc,
        verify=verify,
        average=average,
        thresholds=thresholds,
        defaults_applied=tuple(defaults),
    )
    _validate(config, parsed)
    return config


def _validate(config: RunConfig, parsed: _Parsed) -> None:
    replications = parsed.section("mc").get("replications")
    if replications is not None and replications.value < 2:
        raise ConfigError("mc.replications must be >= 2", replications.line)
    if config.subcommand == Subcommand.MC:
        _require(parsed, "mc", "replications")
        _checked(config.mc_config().validate, parsed.line_of("mc"))
    if config.mc.alpha < 0 or config.average.alpha < 0:
        raise ConfigError("α must be >= 0", parsed.line_of("mc") or parsed.line_of("average"))
    v = config.verify
    if not 0 < v.u_min < v.u_max:
        raise ConfigError("verify requires 0 < u_min < u_max", parsed.line_of("verify"))
    try:
        config.diagnostics()
    except (KeyError, ValueError) as e:
        raise ConfigError(str(e), parsed.line_of("thresholds")) from None


def parse_config(path) -> RunConfig:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    config = parse_text(text)
    logger.info(f"Parsed {path} ({config.subcommand.value}, {len(config.defaults_applied)} default(s) applied)")
    return config


def _fmt(value) -> str:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def emit_config(config: RunConfig) -> str:
    """Canonical text; parse_text(emit_config(c)) == c."""
    lines = ["[run]", f"subcommand = {config.subcommand.value}", f"seed = {config.seed}"]
    if config.output is not None:
        lines.append(f"output = {config.output}")
    if config.threads is not None:
        lines.append(f"threads = {config.threads}")

    lines += ["", "[model]", f"name = {config.model.name.value}", f"z0 = {config.model.z0!r}"]
    lines += [f"{key} = {value!r}" for key, value in config.model.parameters]

    g = config.grid
    lines += ["", "[grid]", f"mode = {g.mode.value}"]
    for key, value in (("T", g.horizon), ("dt", g.dt), ("steps", g.steps)):
        if value is not None:
            lines.append(f"{key} = {_fmt(value)}")

    mc = config.mc
    lines += ["", "[mc]"]
    if mc.replications is not None:
        lines.append(f"replications = {mc.replications}")
    lines.append("statistics = " + ", ".join(s.label for s in mc.statistics))
    lines += [f"weight = {mc.weight.value}", f"alpha = {mc.alpha!r}"]
    if mc.checkpoints:
        lines.append("checkpoints = " + ", ".join(repr(c) for c in mc.checkpoints))

    v = config.verify
    lines += ["", "[verify]"]
    for key in ("delta", "delta0", "epsilon", "u_min", "u_max"):
        value = getattr(v, key)
        if value is not None:
            lines.append(f"{key} = {value!r}")

    lines += ["", "[average]", f"weight = {config.average.weight.value}", f"alpha = {config.average.alpha!r}"]

    if config.thresholds:
        lines += ["", "[thresholds]"] + [f"{key} = {value!r}" for key, value in config.thresholds]
    return "\n".join(lines) + "\n"

