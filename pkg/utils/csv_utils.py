"""
CSV emission with a provenance line carrying the resolved run configuration.
"""

import csv
import json
import logging
import math
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel

logger = logging.getLogger(__name__)

CONFIG_PREFIX = "# config: "


def config_comment(config: Optional[BaseModel]) -> str:
    """Single-line JSON of a pydantic config, prefixed for CSV provenance."""
    if config is None:
        return CONFIG_PREFIX + "{}"
    payload = config.model_dump(by_alias=True)
    return CONFIG_PREFIX + json.dumps(payload, separators=(",", ":"), default=str)


def format_value(value: Any) -> str:
    """Stable text form: '%.12g' for floats, 'inf' for infinities."""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return "%.12g" % value
    return str(value)


def write_csv(
    path: Union[str, Path],
    header: Sequence[str],
    rows: Iterable[Sequence[Any]],
    config: Optional[BaseModel] = None,
) -> Path:
    """
    Write rows under a header, preceded by the config provenance line.

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)

    count = 0
    with open(path, "w", newline="", encoding="utf-8") as handle:
        handle.write(config_comment(config) + "\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            count += 1

    logger.info(f"✓ Wrote {count} rows to {path}")
    return path


def read_csv(path: Union[str, Path]) -> Tuple[dict, List[str], List[List[str]]]:
    """Read back (config, header, rows) from a file written by write_csv."""
    with open(path, newline="", encoding="utf-8") as handle:
        first = handle.readline().rstrip("\n")
        config = json.loads(first[len(CONFIG_PREFIX):]) if first.startswith(CONFIG_PREFIX) else {}
        reader = csv.reader(handle)
        header = next(reader)
        rows = [row for row in reader]
    return config, header, rows


__all__ = [
    "CONFIG_PREFIX",
    "config_comment",
    "format_value",
    "write_csv",
    "read_csv",
]
