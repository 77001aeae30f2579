"""Reading and writing the CLI's plain-text artifacts."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import SpecError

__all__ = ["read_velocity_csv", "write_json", "write_rows_csv", "load_json"]


def read_velocity_csv(path, shape=None) -> np.ndarray:
    """Velocity grid stored as ``nz`` rows of ``nx`` comma-separated values.

    Raises
    ------
    FileNotFoundError
        If ``path`` does not exist.
    SpecError
        If the values are not positive and finite, or the shape is wrong.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"velocity file not found: {path}")
    try:
        v = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise SpecError(f"cannot parse velocity file {path}: {exc}") from exc
    if not np.all(np.isfinite(v)) or np.any(v <= 0):
        raise SpecError(f"velocity file {path} has non-positive or non-finite entries")
    if shape is not None and v.shape != tuple(shape):
        raise SpecError(f"velocity file {path} has shape {v.shape}, expected {tuple(shape)}")
    return v


def load_json(path) -> dict:
    path = Path(path)
    text = path.read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in {path}: {exc}") from exc


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def write_json(path, data) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_plain(data), indent=2, sort_keys=True) + "\n")
    return path


def write_rows_csv(path, rows: list[dict], columns=None) -> Path:
    """One CSV row per dict; nested values are JSON encoded."""
    path = Path(path)
    columns = list(columns or (rows[0].keys() if rows else []))
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(columns)
        for row in rows:
            out = []
            for c in columns:
                v = row.get(c)
                out.append(json.dumps(_plain(v)) if isinstance(v, (dict, list, tuple)) else v)
            w.writerow(out)
    return path
