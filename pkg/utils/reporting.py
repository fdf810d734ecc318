import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, Iterable, List, Sequence, TypeVar, Union

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

PathLike = Union[str, Path]


def _default(value: Any) -> Any:
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value, key=str)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def dumps(data: Any) -> str:
    """Canonical JSON: sorted keys, two-space indent, trailing newline."""
    return json.dumps(data, sort_keys=True, indent=2, default=_default) + "\n"


def write_json(path: PathLike, data: Any) -> Path:
    """Write a report as canonical JSON.

    Args:
        path: Target file; parent directories are created
        data: JSON-able report

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(data))
    logger.debug("wrote %s", path)
    return path


def _cell(value: Any) -> Any:
    if value is None:
        return ""
    if isinstance(value, (Fraction, np.integer, np.floating)):
        return str(_default(value))
    if isinstance(value, (dict, list, tuple)):
        return json.dumps(value, sort_keys=True, default=_default)
    return value


def write_csv(path: PathLike, columns: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    """Write rows with a fixed column order; keys outside columns are dropped.

    Args:
        path: Target file; parent directories are created
        columns: Header, in order
        rows: Row dicts, already in emission order

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.DictWriter(handle, fieldnames=list(columns), extrasaction="ignore", lineterminator="\n")
        writer.writeheader()
        count = 0
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in columns})
            count += 1
    logger.debug("wrote %d rows to %s", count, path)
    return path


def read_csv(path: PathLike) -> List[Dict[str, str]]:
    with Path(path).open(newline="") as handle:
        return list(csv.DictReader(handle))


def map_ordered(func: Callable[[T], R], items: Sequence[T], threads: int = 1) -> List[R]:
    """Apply a pure function to every item, results in input order.

    With threads > 1 the work goes to a process pool; func and items must
    then be picklable.
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    workers = min(threads, len(items))
    logger.debug("fanning %d items out to %d workers", len(items), workers)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
