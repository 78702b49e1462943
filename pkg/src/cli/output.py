import csv
import hashlib
import logging
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from src.config import settings

logger = logging.getLogger(__name__)

HASH_PREFIX = 12

MC_COLUMNS = ["statistic", "mean", "variance", "predicted", "ks", "n", "divergent", "time", "abs_q90"]


def config_hash(canonical_text: str) -> str:
    return hashlib.sha256(canonical_text.encode("utf-8")).hexdigest()[:HASH_PREFIX]


def header_line(canonical_text: str, seed: int) -> str:
    return f"# {settings.app.cli_name} {settings.app.version} config={config_hash(canonical_text)} seed={seed}"


def format_value(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.17g}"
    return str(value)


def write_csv(path: Path, header: str, columns: Sequence[str], rows: Iterable[Mapping]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write(header + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(row.get(column)) for column in columns])
            count += 1
    logger.info(f"Wrote {path} ({count} rows)")
    return path


def write_columns(path: Path, header: str, columns: Mapping[str, np.ndarray]) -> Path:
    """Path export: one row per grid point, ``time`` first."""
    names = list(columns)
    if names[0] != "time":
        raise ValueError("path exports start with the time column")
    arrays = [np.asarray(columns[name]) for name in names]
    rows = ({name: array[k] for name, array in zip(names, arrays)} for k in range(arrays[0].size))
    return write_csv(path, header, names, rows)


def write_text(path: Path, header: str, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(header + "\n" + text, encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path
