from src.cli.config_file import RunConfig, Subcommand, emit_config, parse_config, parse_text
from src.cli.dispatch import DispatchResult, dispatch

__all__ = [
    "RunConfig",
    "Subcommand",
    "emit_config",
    "parse_config",
    "parse_text",
    "DispatchResult",
    "dispatch",
]
