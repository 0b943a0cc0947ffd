"""CSV and aligned-text report tables built from a result cache."""

from __future__ import annotations

import csv
import io

from . import cache
from .ensemble import CONSTRUCTIONS, SCHEMES, accuracy_stats
from .experiment import approach_votes, top_level_datasets

REPORTS = ("table1", "table2", "table3", "table4", "table5", "rankings")
_STATS = ("mean", "std", "min", "max")


class ReportError(RuntimeError):
    pass


def _fmt(v) -> str:
    return f"{v:.2f}" if isinstance(v, float) else str(v)


def to_csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def to_text(header, rows) -> str:
    cells = [list(map(str, header))] + [[_fmt(v) for v in r] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(header))]
    lines = []
    for n, row in enumerate(cells):
        first = row[0].ljust(widths[0])
        rest = [c.rjust(w) for c, w in zip(row[1:], widths[1:])]
        lines.append(" | ".join([first] + rest) if n == 0 else "   ".join([first] + rest))
        if n == 0:
            lines.append("-" * len(lines[0]))
    return "\n".join(lines) + "\n"


def _labelled_tables(records):
    tables = cache.load_tables(records)
    truth = {d["dataset_id"]: d["true_k"] for d in cache.of_type(records, "dataset")}
    missing = [t.dataset_id for t in tables if truth.get(t.dataset_id) is None]
    if missing:
        raise ReportError(f"accuracy reports need ground truth; unlabelled: {missing[:3]}")
    return tables, [truth[t.dataset_id] for t in tables]


def _stat_table(rows, names):
    header = ["stat"] + names
    body = [[s] + [getattr(r, s) for r in rows] for s in _STATS]
    return header, body


def _table1(records):
    tables, truth = _labelled_tables(records)
    rows = accuracy_stats(tables, truth, "algorithm")
    return _stat_table(rows, [r.group[0] for r in rows])


def _table2(records):
    tables, truth = _labelled_tables(records)
    rows = [r for r in accuracy_stats(tables, truth, "algorithm+metric") if r.group[1] == "inertia"]
    return _stat_table(rows, [f"{r.group[0]}_inertia" for r in rows])


def _table3(records):
    tables, truth = _labelled_tables(records)
    rows = [r for r in accuracy_stats(tables, truth, "algorithm+hyper") if r.group[1] == 0]
    return _stat_table(rows, [f"{r.group[0]}^0" for r in rows])


def _table4(records):
    votes = approach_votes(records)
    truth = {d["dataset_id"]: d["true_k"] for d in top_level_datasets(records)}
    known = [ds for ds in votes if truth.get(ds) is not None]
    if not known:
        raise ReportError("table4 needs labelled datasets")
    header = ["scheme"] + list(CONSTRUCTIONS)
    body = []
    for s in SCHEMES:
        body.append([s] + [
            100.0 * sum(votes[ds][(c, s)] == truth[ds] for ds in known) / len(known)
            for c in CONSTRUCTIONS
        ])
    return header, body


def _table5(records):
    bench = cache.of_type(records, "benchmark", stage="bench")
    header = ["benchmark", "expected_value", "consensus"]
    body = []
    for b in sorted(bench, key=lambda b: (b["kind"] != "expected_value", b["name"])):
        if b["kind"] == "expected_value":
            body.append([b["name"], float(b["accuracy"]), "---"])
        else:
            body.append([b["name"], "---", float(b["accuracy"])])
    return header, body


def _rankings(records):
    ranking = cache.of_type(records, "ranking", stage="select")
    header = ["algorithm", "hyperparameters", "metric", "score", "rank"]
    body = [[r["algorithm"], r["hyperparameters"], r["metric"] or "", float(r["score"]), r["rank"]]
            for r in ranking if r["kind"] == "accuracy"]
    if not body:
        body = [[r["algorithm"], r["hyperparameters"], "", float(r["score"]), r["rank"]]
                for r in ranking]
    return header, body


_BUILDERS = {
    "table1": _table1,
    "table2": _table2,
    "table3": _table3,
    "table4": _table4,
    "table5": _table5,
    "rankings": _rankings,
}


def report_table(records, kind: str):
    """``(header, rows)`` for one report kind."""
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ReportError(f"unknown report {kind!r}; choose from {REPORTS}") from None
    return builder(records)


def emit_report(cache_path, kind: str) -> tuple:
    """``(csv_text, aligned_text)`` for one report kind; numbers to two decimals."""
    try:
        header, rows = report_table(cache.read_cache(cache_path), kind)
    except cache.CacheError as exc:
        raise ReportError(str(exc)) from None
    return to_csv(header, rows), to_text(header, rows)
