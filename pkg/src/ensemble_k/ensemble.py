"""Grid evaluation, ensemble construction and voting.

A :class:`ResultTable` holds one guessed cluster count per
(algorithm, hyperparameter selection, metric) cell.  From it an
:class:`EnsembleMatrix` is built, either *raw* (one entry per cell) or
*mode* (metrics collapsed to their modal guess per selection).  Its rows are
the cross product of the per-algorithm columns; that product is never
materialized, all three votes are computed exactly from column counts.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .dataset import Dataset
from .elbow import MetricCurve
from .grid import GridSpec, cell_seed, subsample_seed
from .metrics import CurveError, CurveOptions, compute_curves, guess_k
from .parallel import run_tasks

log = logging.getLogger(__name__)

CONSTRUCTIONS = ("raw", "mode")
SCHEMES = ("full", "row", "col")


class EnsembleError(RuntimeError):
    pass


@dataclass(frozen=True)
class CellResult:
    algorithm: str
    hyper_index: int
    metric_index: int
    metric: str
    guessed_k: Optional[int]
    curve: Optional[MetricCurve] = None
    status: str = "ok"
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def key(self) -> tuple:
        return (self.algorithm, self.hyper_index, self.metric_index)


@dataclass(frozen=True)
class ResultTable:
    dataset_id: str
    grid: GridSpec
    cells: tuple

    def __post_init__(self):
        cells = tuple(sorted(self.cells, key=lambda c: (self.grid.index(c.algorithm),) + c.key[1:]))
        object.__setattr__(self, "cells", cells)
        keys = [c.key for c in cells]
        if len(set(keys)) != len(keys):
            raise EnsembleError(f"{self.dataset_id}: duplicate cells")

    @property
    def complete(self) -> bool:
        return len(self.cells) == self.grid.n_cells

    @property
    def failed(self) -> list:
        return [c for c in self.cells if not c.ok]

    def cell(self, algorithm, hyper_index, metric_index) -> CellResult:
        for c in self.cells:
            if c.key == (algorithm, hyper_index, metric_index):
                return c
        raise KeyError((algorithm, hyper_index, metric_index))

    def guesses(self, algorithm: str, hyper_index: Optional[int] = None) -> list:
        """Successful guesses of one algorithm (optionally one selection), in metric order."""
        return [
            c.guessed_k
            for c in self.cells
            if c.ok and c.algorithm == algorithm and (hyper_index is None or c.hyper_index == hyper_index)
        ]


def smallest_mode(values) -> int:
    """Most common value; ties go to the smallest."""
    counts = Counter(values)
    if not counts:
        raise EnsembleError("mode of an empty collection")
    top = max(counts.values())
    return min(v for v, c in counts.items() if c == top)


def _weighted_mode(weights: dict) -> int:
    top = max(weights.values())
    return min(v for v, w in weights.items() if w == top)


# --------------------------------------------------------------------------
# grid evaluation


def _evaluate_selection(task):
    data, algorithm, hyper, metrics, k_range, seed, options, sub_seed = task
    try:
        curves = compute_curves(data, algorithm, hyper, metrics, k_range, seed, options, sub_seed)
        return {m: (guess_k(curves[m], m, options.elbow_method), curves[m], "") for m in metrics}
    except CurveError:
        pass
    # retry metric by metric so one bad metric does not sink the others
    out = {}
    for m in metrics:
        try:
            curve = compute_curves(data, algorithm, hyper, [m], k_range, seed, options, sub_seed)[m]
            out[m] = (guess_k(curve, m, options.elbow_method), curve, "")
        except (CurveError, ValueError) as exc:
            out[m] = (None, None, str(exc))
    return out


def grid_tasks(data: Dataset, grid: GridSpec, options: CurveOptions = CurveOptions()) -> list:
    """One pure task per (algorithm, hyperparameter selection)."""
    tasks = []
    for j, algo in enumerate(grid.algorithms):
        sub = subsample_seed(grid.master_seed, j)
        for h, hyper in enumerate(algo.hypers):
            seed = cell_seed(grid.master_seed, j, h)
            tasks.append((data, algo.name, dict(hyper), algo.metrics, grid.k_range, seed, options, sub))
    return tasks


def assemble_table(data_id: str, grid: GridSpec, outcomes: Sequence[dict]) -> ResultTable:
    """Turn per-selection outcomes (in :func:`grid_tasks` order) into a table."""
    cells = []
    it = iter(outcomes)
    for algo in grid.algorithms:
        for h in range(len(algo.hypers)):
            outcome = next(it)
            for mi, m in enumerate(algo.metrics):
                k, curve, reason = outcome[m]
                status = "ok" if k is not None else "failed"
                cells.append(CellResult(algo.name, h, mi, m, k, curve, status, reason))
    table = ResultTable(data_id, grid, tuple(cells))
    n_failed = len(table.failed)
    if n_failed * 2 > len(table.cells):
        raise EnsembleError(f"{data_id}: {n_failed} of {len(table.cells)} cells failed")
    for c in table.failed:
        log.warning("%s: cell %s failed: %s", data_id, c.key, c.reason)
    return table


def evaluate_grid(data: Dataset, grid: GridSpec, options: CurveOptions = CurveOptions(),
                  workers: int = 1) -> ResultTable:
    """Run every (selection, metric) cell of ``grid`` on ``data``.

    Each selection gets a seed derived from (master seed, algorithm index,
    selection index), so results do not depend on scheduling.  Failed cells
    are recorded, not raised, unless more than half the grid fails.
    """
    k_max = grid.k_range[1]
    if k_max > data.n:
        raise EnsembleError(f"k_max={k_max} exceeds n={data.n}")
    outcomes = run_tasks(_evaluate_selection, grid_tasks(data, grid, options), workers)
    return assemble_table(data.id, grid, outcomes)


# --------------------------------------------------------------------------
# ensemble construction


@dataclass(frozen=True)
class EnsembleMatrix:
    """Per-algorithm columns of guesses; rows are their implicit cross product."""

    mode: str
    columns: tuple  # of (algorithm, tuple of guesses)

    def __post_init__(self):
        cols = tuple((name, tuple(int(v) for v in vals)) for name, vals in self.columns)
        object.__setattr__(self, "columns", cols)

    @classmethod
    def from_columns(cls, columns, mode: str = "raw") -> "EnsembleMatrix":
        if isinstance(columns, dict):
            columns = columns.items()
        else:
            columns = [(f"c{i}", col) for i, col in enumerate(columns)]
        return cls(mode, tuple(columns))

    @property
    def sizes(self) -> tuple:
        return tuple(len(v) for _, v in self.columns)

    @property
    def n_rows(self) -> int:
        return math.prod(self.sizes)

    def column(self, name: str) -> tuple:
        return dict(self.columns)[name]


def _column_map(table: ResultTable, per_selection) -> tuple:
    cols = []
    for algo in table.grid.algorithms:
        vals = per_selection(table, algo)
        if vals:
            cols.append((algo.name, tuple(vals)))
        else:
            log.warning("%s: %s has no successful cells; dropped from the ensemble",
                        table.dataset_id, algo.name)
    if not cols:
        raise EnsembleError(f"{table.dataset_id}: no successful cells at all")
    return tuple(cols)


def raw_ensemble(table: ResultTable) -> EnsembleMatrix:
    return EnsembleMatrix("raw", _column_map(table, lambda t, a: t.guesses(a.name)))


def collapse_mode(table: ResultTable) -> EnsembleMatrix:
    """Mode of the metric guesses for each selection (ties to the smallest k)."""

    def per_selection(t, algo):
        out = []
        for h in range(len(algo.hypers)):
            g = t.guesses(algo.name, h)
            if g:
                out.append(smallest_mode(g))
        return out

    return EnsembleMatrix("mode", _column_map(table, per_selection))


def build_ensemble(table: ResultTable, construction: str) -> EnsembleMatrix:
    if construction == "raw":
        return raw_ensemble(table)
    if construction == "mode":
        return collapse_mode(table)
    raise EnsembleError(f"construction must be one of {CONSTRUCTIONS}, got {construction!r}")


# --------------------------------------------------------------------------
# voting


def full_counts(ensemble: EnsembleMatrix) -> dict:
    """Occurrences of each value over all entries of the cross product.

    A value appearing c times in column j shows up
    ``c * prod(|other columns|)`` times in the flattened product.
    """
    sizes = ensemble.sizes
    total = math.prod(sizes)
    counts = Counter()
    for (_, col), size in zip(ensemble.columns, sizes):
        for v, c in Counter(col).items():
            counts[v] += c * (total // size)
    return dict(counts)


def vote_full(ensemble: EnsembleMatrix) -> int:
    return _weighted_mode(full_counts(ensemble))


def vote_column_first(ensemble: EnsembleMatrix) -> int:
    return smallest_mode([smallest_mode(col) for _, col in ensemble.columns])


def row_mode_weights(ensemble: EnsembleMatrix) -> dict:
    """Number of cross-product rows whose row mode is each value.

    Enumerates one distinct value per column, weighting each combination by
    the product of the values' multiplicities.
    """
    per_column = [sorted(Counter(col).items()) for _, col in ensemble.columns]
    weights = Counter()
    for combo in itertools.product(*per_column):
        values = [v for v, _ in combo]
        weight = math.prod(c for _, c in combo)
        weights[smallest_mode(values)] += weight
    return dict(weights)


def vote_row_first(ensemble: EnsembleMatrix) -> int:
    return _weighted_mode(row_mode_weights(ensemble))


_VOTERS = {"full": vote_full, "row": vote_row_first, "col": vote_column_first}


def vote(ensemble: EnsembleMatrix, scheme: str) -> int:
    try:
        return _VOTERS[scheme](ensemble)
    except KeyError:
        raise EnsembleError(f"scheme must be one of {SCHEMES}, got {scheme!r}") from None


def vote_matrix(rows, scheme: str) -> int:
    """Vote on an explicitly materialized matrix (rows x algorithms)."""
    M = np.asarray(rows, dtype=np.int64)
    if M.ndim != 2 or M.size == 0:
        raise EnsembleError("matrix must be a non-empty 2-d array")
    if scheme == "full":
        return smallest_mode(M.ravel().tolist())
    if scheme == "col":
        return smallest_mode([smallest_mode(col) for col in M.T.tolist()])
    if scheme == "row":
        return smallest_mode([smallest_mode(row) for row in M.tolist()])
    raise EnsembleError(f"scheme must be one of {SCHEMES}, got {scheme!r}")


def all_votes(table: ResultTable) -> dict:
    """``{(construction, scheme): k}`` for the six approaches."""
    out = {}
    for construction in CONSTRUCTIONS:
        ens = build_ensemble(table, construction)
        for scheme in SCHEMES:
            out[(construction, scheme)] = vote(ens, scheme)
    return out


# --------------------------------------------------------------------------
# accuracy statistics

GROUPINGS = ("algorithm", "algorithm+metric", "algorithm+hyper", "algorithm+mode")


@dataclass(frozen=True)
class StatRow:
    group: tuple
    mean: float
    std: float
    min: float
    max: float
    n_combinations: int


def _true_ks(tables, true_k):
    if isinstance(true_k, (int, np.integer)):
        return [int(true_k)] * len(tables)
    true_k = [int(k) for k in true_k]
    if len(true_k) != len(tables):
        raise EnsembleError("one true k per table is required")
    return true_k


def check_same_grid(tables) -> GridSpec:
    if not tables:
        raise EnsembleError("no result tables")
    grid = tables[0].grid
    for t in tables[1:]:
        if t.grid.to_dict() | {"master_seed": 0} != grid.to_dict() | {"master_seed": 0}:
            raise EnsembleError(f"table {t.dataset_id} uses a different grid")
    return grid


def combination_accuracy(tables, true_k) -> dict:
    """Fraction of tables in which each (algorithm, hyper, metric) cell hits the true k."""
    grid = check_same_grid(tables)
    ks = _true_ks(tables, true_k)
    hits = Counter()
    for t, k in zip(tables, ks):
        for c in t.cells:
            hits[c.key] += int(c.ok and c.guessed_k == k)
    return {
        (a.name, h, m): hits[(a.name, h, m)] / len(tables)
        for a in grid.algorithms
        for h in range(len(a.hypers))
        for m in range(len(a.metrics))
    }


def mode_accuracy(tables, true_k) -> dict:
    """Fraction of tables in which each selection's metric-mode hits the true k."""
    grid = check_same_grid(tables)
    ks = _true_ks(tables, true_k)
    hits = Counter()
    for t, k in zip(tables, ks):
        for a in grid.algorithms:
            for h in range(len(a.hypers)):
                g = t.guesses(a.name, h)
                hits[(a.name, h)] += int(bool(g) and smallest_mode(g) == k)
    return {
        (a.name, h): hits[(a.name, h)] / len(tables)
        for a in grid.algorithms
        for h in range(len(a.hypers))
    }


def _stats(group, values) -> StatRow:
    v = 100.0 * np.asarray(values, dtype=np.float64)
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return StatRow(group, float(v.mean()), std, float(v.min()), float(v.max()), int(v.size))


def accuracy_stats(tables, true_k, group_by: str = "algorithm") -> list:
    """Mean/std/min/max (percent) of per-combination accuracies within each group.

    ``algorithm`` pools every cell of an algorithm; ``algorithm+metric``
    groups by metric (combinations vary over selections);
    ``algorithm+hyper`` groups by selection (combinations vary over
    metrics); ``algorithm+mode`` pools the metric-collapsed selections.
    The sample standard deviation (ddof=1) is reported.
    """
    grid = check_same_grid(tables)
    if group_by == "algorithm+mode":
        acc = mode_accuracy(tables, true_k)
        return [
            _stats((a.name,), [acc[(a.name, h)] for h in range(len(a.hypers))])
            for a in grid.algorithms
        ]
    acc = combination_accuracy(tables, true_k)
    rows = []
    for a in grid.algorithms:
        H, M = range(len(a.hypers)), range(len(a.metrics))
        if group_by == "algorithm":
            rows.append(_stats((a.name,), [acc[(a.name, h, m)] for h in H for m in M]))
        elif group_by == "algorithm+metric":
            for m in M:
                rows.append(_stats((a.name, a.metrics[m]), [acc[(a.name, h, m)] for h in H]))
        elif group_by == "algorithm+hyper":
            for h in H:
                rows.append(_stats((a.name, h), [acc[(a.name, h, m)] for m in M]))
        else:
            raise EnsembleError(f"group_by must be one of {GROUPINGS}, got {group_by!r}")
    return rows
