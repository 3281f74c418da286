"""CSV and JSON emission for experiment runs."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Dict, Mapping

import numpy as np

SUMMARY_SCHEMA_VERSION = 1


def write_csv(path: Path, columns: Mapping[str, np.ndarray], footer: str = "") -> Path:
    """Write equal-length columns; an optional footer becomes a ``#`` line."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(columns)
    cols = [np.asarray(columns[k]) for k in names]
    lengths = {len(c) for c in cols}
    if len(lengths) > 1:
        raise ValueError(f"column lengths differ: {dict(zip(names, map(len, cols)))}")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(names)
        for row in zip(*cols):
            w.writerow([_fmt(v) for v in row])
        if footer:
            fh.write(f"# {footer}\n")
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    return v


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        return f if np.isfinite(f) else str(f)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


def write_summary(path: Path, scenario: str, config: Dict, checks, extra: Dict = None) -> Path:
    payload = {
        "schema_version": SUMMARY_SCHEMA_VERSION,
        "scenario": scenario,
        "config_echo": config,
        "checks": [c.as_dict() for c in checks],
    }
    if extra:
        payload.update(extra)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_jsonable(payload), indent=2, sort_keys=False) + "\n")
    return path
