"""Line-delimited JSON result cache shared by the pipeline stages.

Record types: ``grid``, ``dataset``, ``cell``, ``vote``, ``global_vote``,
``summary``, ``ranking`` and ``benchmark``.  Records are serialized with
sorted keys and written in a canonical order, so equal runs give
byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path

from .elbow import MetricCurve
from .ensemble import CellResult, ResultTable
from .grid import GridSpec

_ORDER = ("grid", "dataset", "cell", "vote", "global_vote", "summary", "ranking", "benchmark")


class CacheError(RuntimeError):
    pass


def dumps(record: dict) -> str:
    return json.dumps(record, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_cache(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = sorted(records, key=lambda r: _ORDER.index(r["type"]))
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w") as fh:
        for r in records:
            fh.write(dumps(r) + "\n")
    tmp.replace(path)


def read_cache(path) -> list:
    path = Path(path)
    if not path.exists():
        raise CacheError(f"no result cache at {path}; run the `run` stage first")
    with open(path) as fh:
        return [json.loads(line) for line in fh if line.strip()]


def replace_records(path, record_type: str, new_records) -> list:
    """Swap every record of one type for ``new_records`` and rewrite the cache."""
    records = [r for r in read_cache(path) if r["type"] != record_type]
    records.extend(new_records)
    write_cache(path, records)
    return records


def of_type(records, record_type: str, stage: str = None) -> list:
    out = [r for r in records if r["type"] == record_type]
    if not out and stage:
        raise CacheError(f"cache has no {record_type} records; run the `{stage}` stage first")
    return out


def cell_record(dataset_id: str, grid: GridSpec, cell: CellResult) -> dict:
    algo = grid.get(cell.algorithm)
    return {
        "type": "cell",
        "dataset_id": dataset_id,
        "algorithm": cell.algorithm,
        "hyper_index": cell.hyper_index,
        "hyper": dict(algo.hypers[cell.hyper_index]),
        "metric_index": cell.metric_index,
        "metric": cell.metric,
        "guessed_k": cell.guessed_k,
        "curve": None if cell.curve is None else {
            "k": list(cell.curve.k_values),
            "score": list(cell.curve.scores),
        },
        "status": cell.status,
        "reason": cell.reason,
    }


def table_records(table: ResultTable) -> list:
    return [cell_record(table.dataset_id, table.grid, c) for c in table.cells]


def grid_record(grid: GridSpec, options: dict = None) -> dict:
    return {"type": "grid", "grid": grid.to_dict(), "options": options or {}}


def load_grid(records) -> GridSpec:
    grids = of_type(records, "grid", stage="run")
    return GridSpec.from_dict(grids[0]["grid"])


def load_tables(records) -> list:
    """Result tables in dataset-record order."""
    grid = load_grid(records)
    cells = {}
    for r in of_type(records, "cell", stage="run"):
        curve = None
        if r["curve"] is not None:
            curve = MetricCurve(r["curve"]["k"], r["curve"]["score"], r["metric"])
        cells.setdefault(r["dataset_id"], []).append(CellResult(
            r["algorithm"], r["hyper_index"], r["metric_index"], r["metric"],
            r["guessed_k"], curve, r["status"], r["reason"],
        ))
    order = [d["dataset_id"] for d in of_type(records, "dataset") if d["dataset_id"] in cells]
    order += [k for k in cells if k not in order]
    return [ResultTable(ds, grid, tuple(cells[ds])) for ds in order]
