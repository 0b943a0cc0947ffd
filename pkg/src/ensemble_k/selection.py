"""Recommending an algorithm/hyperparameter combination once k is decided."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Optional

from .ensemble import EnsembleError, check_same_grid


@dataclass(frozen=True)
class ComboScore:
    algorithm: str
    hyper_index: int
    metric_index: Optional[int]
    score: float
    rank: int
    hyper: tuple = ()
    metric: Optional[str] = None

    def hyper_text(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.hyper)


def _dense_rank(entries):
    """Sort by descending score, canonical key within ties; equal scores share a rank."""
    entries = sorted(entries, key=lambda e: (-e[0], e[1]))
    ranked, rank, last = [], 0, None
    for score, key, payload in entries:
        if score != last:
            rank += 1
            last = score
        ranked.append((rank, score, payload))
    return ranked


def rank_by_accuracy(tables, global_k: int) -> list:
    """Score every (algorithm, hyper, metric) cell by how often it guessed ``global_k``."""
    if not tables:
        raise EnsembleError("rank_by_accuracy needs at least one table")
    grid = check_same_grid(tables)
    lo, hi = grid.k_range
    if not lo <= global_k <= hi:
        raise EnsembleError(f"global_k={global_k} outside k_range {grid.k_range}")
    entries = []
    for j, a in enumerate(grid.algorithms):
        for h, hyper in enumerate(a.hypers):
            for m, metric in enumerate(a.metrics):
                hits = sum(
                    1 for t in tables
                    if (c := t.cell(a.name, h, m)).ok and c.guessed_k == global_k
                )
                score = hits / len(tables)
                entries.append((score, (j, h, m), (a.name, h, m, tuple(hyper.items()), metric)))
    return [
        ComboScore(name, h, m, score, rank, hyper, metric)
        for rank, score, (name, h, m, hyper, metric) in _dense_rank(entries)
    ]


def rank_by_stability(table, voted_k: int) -> list:
    """Score every (algorithm, hyper) by the fraction of its metrics agreeing with ``voted_k``.

    Ties are common with few metrics; every rank-1 combination is an equally
    good recommendation.
    """
    grid = table.grid
    entries = []
    for j, a in enumerate(grid.algorithms):
        for h, hyper in enumerate(a.hypers):
            cells = [table.cell(a.name, h, m) for m in range(len(a.metrics))]
            agree = sum(1 for c in cells if c.ok and c.guessed_k == voted_k)
            entries.append((agree / len(cells), (j, h), (a.name, h, tuple(hyper.items()))))
    return [
        ComboScore(name, h, None, score, rank, hyper)
        for rank, score, (name, h, hyper) in _dense_rank(entries)
    ]


def top_combinations(ranking) -> list:
    return [c for c in ranking if c.rank == 1]


def rankings_csv(ranking) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["algorithm", "hyperparameters", "metric", "score", "rank"])
    for c in ranking:
        writer.writerow([c.algorithm, c.hyper_text(), c.metric or "", f"{c.score:.4f}", c.rank])
    return buf.getvalue()
