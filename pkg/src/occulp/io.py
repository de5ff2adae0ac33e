"""CSV/JSON serialization with fixed formatting so reruns are byte-identical."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    """Shortest round-trip decimal, capped at 12 significant digits."""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == 0.0:
        return "0.0"
    short = repr(x)
    capped = f"{x:.12g}"
    return short if float(capped) == x else capped


def write_rows(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else fmt(x)
    return obj


def write_json(path, doc) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(_jsonable(doc), indent=2, sort_keys=True) + "\n")
    return path


def coord_header(dim: int) -> list[str]:
    return [f"y{j + 1}" for j in range(dim)]


def measure_rows(weights: dict, dsys) -> list[list]:
    return [dsys.state_label(s) + [u, w] for (s, u), w in sorted(weights.items())]


def write_measure_csv(path, weights: dict, dsys) -> Path:
    """Rows ``y1..ym, control, weight`` sorted by (state, control); INF coordinates are ``inf``."""
    return write_rows(path, coord_header(dsys.state_dim) + ["control", "weight"], measure_rows(weights, dsys))


def measure_document(mu, dsys) -> dict:
    return {"kind": mu.kind, "param": mu.param, "origin": mu.origin,
            "origin_state": dsys.state_label(mu.origin), "exact": mu.exact,
            "tail_tol": mu.tail_tol, "total": mu.total,
            "weights": [[s, u, w] for (s, u), w in sorted(mu.weights.items())]}


def write_values_csv(path, vf, dsys) -> Path:
    rows = [dsys.state_label(s) + [v] for s, v in enumerate(vf.values)]
    return write_rows(path, coord_header(dsys.state_dim) + ["value"], rows)


def write_sweep(stem, report, dsys) -> tuple[Path, Path]:
    """``<stem>.csv`` with one row per schedule point and ``<stem>.json`` summary."""
    header = ["schedule_value", "min_value"] + [f"argmin_{h}" for h in coord_header(dsys.state_dim)] + [
        "gap", "a1_radius", "touches_inf"]
    rows = []
    for p in report.points:
        coords = dsys.state_label(p["argmin"]) if p.get("argmin") is not None else ["nan"] * dsys.state_dim
        rows.append([p["value"], p["min_value"]] + coords + [p["gap"], p["a1_radius"], p["touches_inf"]])
    stem = Path(stem)
    csv_path = write_rows(stem.with_suffix(".csv"), header, rows)
    json_path = write_json(stem.with_suffix(".json"), report.summary())
    return csv_path, json_path
