"""CSV and JSON artifacts: lossless doubles, line-numbered parse errors, config headers."""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from pathlib import Path

import numpy as np

from .errors import Rank1Error


class InputFormatError(Rank1Error, ValueError):
    """Malformed input file; the message names the file and line."""


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path, header, columns) -> Path:
    """Write equal-length columns under a header row, 17 significant digits."""
    path = Path(path)
    cols = [np.asarray(c, dtype=float).ravel() for c in columns]
    if len(cols) != len(header) or len({c.size for c in cols}) > 1:
        raise ValueError("header and columns do not match")
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in zip(*cols):
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path, columns: int | None = None) -> tuple[list[str], list[np.ndarray]]:
    """Read a headed numeric CSV; every problem is reported with its line number."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputFormatError(f"{path}: cannot read ({exc.strerror})") from exc
    rows = list(csv.reader(text.splitlines()))
    if not rows:
        raise InputFormatError(f"{path}:1: empty file, expected a header row")
    header = [h.strip() for h in rows[0]]
    width = len(header) if columns is None else columns
    if len(header) != width:
        raise InputFormatError(f"{path}:1: expected {width} header fields, found {len(header)}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != width:
            raise InputFormatError(f"{path}:{lineno}: expected {width} fields, found {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError:
            raise InputFormatError(f"{path}:{lineno}: non-numeric field in {row!r}") from None
        if not all(math.isfinite(v) for v in vals):
            raise InputFormatError(f"{path}:{lineno}: non-finite value")
        data.append(vals)
    if not data:
        raise InputFormatError(f"{path}:2: no data rows")
    arr = np.array(data)
    if np.any(np.diff(arr[:, 0]) <= 0):
        bad = int(np.nonzero(np.diff(arr[:, 0]) <= 0)[0][0]) + 3
        raise InputFormatError(f"{path}:{bad}: first column must be strictly increasing")
    return header, [arr[:, j] for j in range(width)]


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {k: _jsonable(v) for k, v in dataclasses.asdict(obj).items()}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_json(path, document: dict, config=None) -> Path:
    """One JSON document per run; ``config`` is embedded under ``"config"``."""
    path = Path(path)
    doc = {"config": _jsonable(config)} if config is not None else {}
    doc.update(_jsonable(document))
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except OSError as exc:
        raise InputFormatError(f"{path}: cannot read ({exc.strerror})") from exc
    except json.JSONDecodeError as exc:
        raise InputFormatError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc


def sidecar(path) -> Path:
    path = Path(path)
    return path.with_suffix(path.suffix + ".json")
