"""Declarative experiment configuration and the end-to-end run."""

from __future__ import annotations

import dataclasses
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np
import yaml

from . import cache
from .dataset import BlobSpec, Dataset, generate_blobs, load_csv, save_csv, split_subsets
from .ensemble import (
    CONSTRUCTIONS,
    SCHEMES,
    all_votes,
    assemble_table,
    grid_tasks,
    smallest_mode,
    _evaluate_selection,
)
from .grid import GridError, GridSpec, default_grid, grid_from_mapping
from .metrics import CurveOptions
from .parallel import run_tasks

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    grid: GridSpec
    blobs: tuple = ()
    csv_paths: tuple = ()
    construction: str = "mode"
    scheme: str = "full"
    subsets: Optional[int] = None
    output: str = "results"
    options: CurveOptions = CurveOptions()
    bench: dict = field(default_factory=dict)

    def __post_init__(self):
        if bool(self.blobs) == bool(self.csv_paths):
            raise ConfigError("exactly one dataset source (generate or csv) is required")
        if self.construction not in CONSTRUCTIONS:
            raise ConfigError(f"construction must be one of {CONSTRUCTIONS}")
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}")
        if self.subsets is not None and self.subsets < 1:
            raise ConfigError("subsets must be >= 1")

    @property
    def master_seed(self) -> int:
        return self.grid.master_seed

    def with_seed(self, seed: int) -> "ExperimentConfig":
        return dataclasses.replace(self, grid=self.grid.with_seed(seed))


def _blob_specs(gen: dict) -> tuple:
    count = int(gen.get("count", 1))
    base = int(gen.get("seed", 0))
    box = tuple(float(v) for v in gen.get("center_box", (-5, 5)))
    return tuple(
        BlobSpec(
            n_samples=int(gen.get("n_samples", 30000)),
            n_centers=int(gen.get("n_centers", 3)),
            n_features=int(gen.get("n_features", 2)),
            center_box=box,
            cluster_std=float(gen.get("cluster_std", 1.0)),
            seed=base + i,
        )
        for i in range(count)
    )


def config_from_dict(doc: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    doc = dict(doc or {})
    try:
        k_range = tuple(doc.get("k_range", (2, 10)))
        seed = int(doc.get("seed", 0))
        if "algorithms" in doc:
            grid = grid_from_mapping(doc["algorithms"], k_range, seed)
        else:
            grid = default_grid(k_range, seed)
        source = doc.get("datasets") or {}
        blobs = _blob_specs(source["generate"]) if "generate" in source else ()
        for spec in blobs:
            spec.validate()
        csv_paths = tuple(str((base_dir / p).resolve()) for p in source.get("csv", ()))
        voting = doc.get("voting") or {}
        options = CurveOptions(**(doc.get("options") or {}))
        return ExperimentConfig(
            grid=grid,
            blobs=blobs,
            csv_paths=csv_paths,
            construction=voting.get("construction", "mode"),
            scheme=voting.get("scheme", "full"),
            subsets=doc.get("subsets"),
            output=str(doc.get("output", "results")),
            options=options,
            bench=dict(doc.get("bench") or {}),
        )
    except (GridError, TypeError, KeyError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid experiment config: {exc}") from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        doc = yaml.safe_load(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from None
    return config_from_dict(doc, path.parent)


def default_config_text() -> str:
    """The shipped default experiment document."""
    return resources.files("ensemble_k").joinpath("data/default.yaml").read_text()


def default_config() -> ExperimentConfig:
    return config_from_dict(yaml.safe_load(default_config_text()))


def load_datasets(config: ExperimentConfig) -> list:
    if config.blobs:
        width = len(str(len(config.blobs) - 1))
        return [generate_blobs(s, id=f"blobs-{i:0{width}d}") for i, s in enumerate(config.blobs)]
    out = []
    for p in config.csv_paths:
        try:
            out.append(load_csv(p))
        except OSError as exc:
            raise ConfigError(f"cannot read dataset {p}: {exc}") from None
    return out


def write_datasets(datasets, directory) -> list:
    directory = Path(directory)
    paths = []
    for d in datasets:
        p = directory / f"{d.id}.csv"
        save_csv(d, p)
        paths.append(p)
    return paths


def _dataset_record(data: Dataset, parent: Optional[str] = None, true_k=None) -> dict:
    return {
        "type": "dataset",
        "dataset_id": data.id,
        "n": data.n,
        "d": data.d,
        "true_k": data.n_labels if true_k is None else true_k,
        "parent": parent,
    }


def vote_records(tables) -> list:
    out = []
    for t in tables:
        for (construction, scheme), k in all_votes(t).items():
            out.append({"type": "vote", "dataset_id": t.dataset_id,
                        "construction": construction, "scheme": scheme, "k": k})
    return out


def global_vote_records(records) -> list:
    """Mode of subset votes per parent dataset and approach (empty without subsets)."""
    parents = {d["dataset_id"]: d["parent"] for d in cache.of_type(records, "dataset")}
    grouped = {}
    for v in cache.of_type(records, "vote"):
        parent = parents.get(v["dataset_id"])
        if parent is not None:
            grouped.setdefault((parent, v["construction"], v["scheme"]), []).append(v["k"])
    return [
        {"type": "global_vote", "dataset_id": p, "construction": c, "scheme": s,
         "k": smallest_mode(ks), "n_subsets": len(ks)}
        for (p, c, s), ks in sorted(grouped.items())
    ]


def approach_votes(records) -> dict:
    """``{dataset_id: {(construction, scheme): k}}`` at the top level of the experiment.

    In subset mode these are the global (mode-of-subsets) votes.
    """
    source = cache.of_type(records, "global_vote") or cache.of_type(records, "vote", stage="run")
    out = {}
    for v in source:
        out.setdefault(v["dataset_id"], {})[(v["construction"], v["scheme"])] = v["k"]
    return out


def top_level_datasets(records) -> list:
    return [d for d in cache.of_type(records, "dataset") if d["parent"] is None]


def summary_record(records, config: ExperimentConfig) -> dict:
    votes = approach_votes(records)
    truth = {d["dataset_id"]: d["true_k"] for d in top_level_datasets(records)}
    accuracy = {}
    known = [ds for ds in votes if truth.get(ds) is not None]
    for c in CONSTRUCTIONS:
        for s in SCHEMES:
            if known:
                hits = sum(votes[ds][(c, s)] == truth[ds] for ds in known)
                accuracy[f"{c}+{s}"] = hits / len(known)
    cells = cache.of_type(records, "cell")
    chosen = {ds: v[(config.construction, config.scheme)] for ds, v in votes.items()}
    return {
        "type": "summary",
        "n_datasets": len(truth),
        "n_tables": len({v["dataset_id"] for v in cache.of_type(records, "vote")}),
        "n_cells": len(cells),
        "n_failed_cells": sum(1 for c in cells if c["status"] != "ok"),
        "construction": config.construction,
        "scheme": config.scheme,
        "votes": chosen,
        "accuracy": accuracy,
        "master_seed": config.master_seed,
    }


def run_experiment(config: ExperimentConfig, out_dir=None, workers: int = 1) -> dict:
    """Evaluate the grid on every dataset (or subset), vote, and persist the cache.

    Returns the summary record.  The cache lands in ``out_dir/cache.jsonl``.
    """
    out_dir = Path(out_dir or config.output)
    datasets = load_datasets(config)
    if config.blobs:
        write_datasets(datasets, out_dir / "datasets")

    units, records = [], []
    for i, data in enumerate(datasets):
        records.append(_dataset_record(data))
        if config.subsets:
            seed = int(np.random.SeedSequence([config.master_seed, i, 0x5B5E7]).generate_state(1)[0])
            for sub in split_subsets(data, config.subsets, seed):
                records.append(_dataset_record(sub, parent=data.id, true_k=data.n_labels))
                units.append(sub)
        else:
            units.append(data)

    grid = config.grid
    for u in units:
        if grid.k_range[1] > u.n:
            raise ConfigError(f"{u.id}: k_max={grid.k_range[1]} exceeds n={u.n}")
    tasks, spans = [], []
    for u in units:
        t = grid_tasks(u, grid, config.options)
        spans.append((len(tasks), len(tasks) + len(t)))
        tasks.extend(t)
    log.info("evaluating %d selections over %d tables with %d workers", len(tasks), len(units), workers)
    outcomes = run_tasks(_evaluate_selection, tasks, workers)
    tables = [assemble_table(u.id, grid, outcomes[a:b]) for u, (a, b) in zip(units, spans)]

    records.append(cache.grid_record(grid, dataclasses.asdict(config.options)))
    for t in tables:
        records.extend(cache.table_records(t))
    records.extend(vote_records(tables))
    records.extend(global_vote_records(records))
    summary = summary_record(records, config)
    records.append(summary)
    cache.write_cache(out_dir / "cache.jsonl", records)
    return summary
