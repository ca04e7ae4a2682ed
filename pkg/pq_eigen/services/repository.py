"""Artifact persistence for pq-eigen runs.

All floats are written with 17 significant digits so reloading a summary
or table reproduces the computed values exactly.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

from pq_eigen.models.results import EigenResult, IterationRecord

HISTORY_HEADER = ["k", "lambda", "delta", "newton_u", "newton_v"]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def _prepare(path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_table(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table with a fixed header and '\\n' line endings."""
    with open(_prepare(path), "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def write_json(path: Path, data: Any) -> Path:
    with open(_prepare(path), "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True, allow_nan=True)
        f.write("\n")
    return path


def load_json(path: Path) -> Any:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"File not found: {path}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def save_summary(out_dir: Path, summary: Dict[str, Any], fmt: str = "json") -> Path:
    """Summary record: eigenvalue, iteration counts and bound report."""
    if fmt == "json":
        return write_json(Path(out_dir) / "summary.json", summary)
    rows = [(key, summary[key]) for key in sorted(summary) if not isinstance(summary[key], (dict, list))]
    for key in sorted(summary):
        if isinstance(summary[key], dict):
            rows.extend((f"{key}.{sub}", value) for sub, value in sorted(summary[key].items())
                        if not isinstance(value, (dict, list)))
    return write_table(Path(out_dir) / "summary.csv", ["key", "value"], rows)


def load_summary(path: Path) -> Dict[str, Any]:
    return load_json(path)


def save_history(out_dir: Path, history: List[IterationRecord], fmt: str = "csv",
                 name: str = "history") -> Path:
    """Per-iteration table: k, lambda^k, |lambda^k - lambda^(k-1)|, Newton counts."""
    if fmt == "json":
        return write_json(Path(out_dir) / f"{name}.json", [r.to_dict() for r in history])
    rows = ([r.k, r.lam, r.delta, r.newton_u, r.newton_v] for r in history)
    return write_table(Path(out_dir) / f"{name}.csv", HISTORY_HEADER, rows)


def save_field(out_dir: Path, result: EigenResult, name: str = "field") -> Path:
    """Per-node export x[, y], u, v for plotting."""
    points = result.u.mesh.points
    header = ["x", "u", "v"] if points.shape[1] == 1 else ["x", "y", "u", "v"]
    rows = (
        [float(c) for c in point] + [float(a), float(b)]
        for point, a, b in zip(points, result.u.coefficients, result.v.coefficients)
    )
    return write_table(Path(out_dir) / f"{name}.csv", header, rows)


def save_rows(out_dir: Path, name: str, header: Sequence[str], rows: List[Sequence[Any]],
              fmt: str = "csv") -> Path:
    """Generic result table (EOC study, f(p) curve, bounds)."""
    if fmt == "json":
        records = [dict(zip(header, row)) for row in rows]
        return write_json(Path(out_dir) / f"{name}.json", records)
    return write_table(Path(out_dir) / f"{name}.csv", header, rows)


def read_table(path: Path) -> List[Dict[str, str]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Table not found: {path}")
    with open(path, "r", newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def summary_of(result: EigenResult, extra: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    data = result.summary()
    if extra:
        data.update(extra)
    return data
