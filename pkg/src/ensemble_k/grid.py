"""Experiment grids: algorithms, their hyperparameter selections and metrics."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .algorithms import ALGORITHMS, make_config
from .metrics import DENDROGRAM_METRICS, canonical_metric

# Parameters that only matter for some values of another parameter.
# Expansion skips them otherwise, so no duplicate selections are produced.
_CONDITIONAL = {
    "spectral": {
        "metric": lambda h: h.get("affinity") == "precomputed",
        "n_neighbors": lambda h: h.get("affinity") == "precomputed",
        "gamma": lambda h: h.get("affinity") != "precomputed",
    }
}


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class AlgorithmGrid:
    name: str
    hypers: tuple
    metrics: tuple

    @property
    def n_cells(self) -> int:
        return len(self.hypers) * len(self.metrics)


@dataclass(frozen=True)
class GridSpec:
    algorithms: tuple
    k_range: tuple = (2, 10)
    master_seed: int = 0

    def __post_init__(self):
        algos = tuple(self.algorithms)
        object.__setattr__(self, "algorithms", algos)
        object.__setattr__(self, "k_range", tuple(int(k) for k in self.k_range))
        names = [a.name for a in algos]
        if not algos:
            raise GridError("grid has no algorithms")
        if len(set(names)) != len(names):
            raise GridError(f"duplicate algorithms in grid: {names}")
        for a in algos:
            if a.name not in ALGORITHMS:
                raise GridError(f"unknown algorithm {a.name!r}")
            if not a.hypers or not a.metrics:
                raise GridError(f"{a.name}: hyperparameter and metric lists must be non-empty")
            for m in a.metrics:
                if m in DENDROGRAM_METRICS and a.name != "hca":
                    raise GridError(f"{a.name}: metric {m} needs hierarchical clustering")
                if m in ("aic", "bic") and a.name not in ("kmeans", "gmm"):
                    raise GridError(f"{a.name}: metric {m} needs a likelihood model")
            for h in a.hypers:
                try:
                    make_config(a.name, h)
                except ValueError as exc:
                    raise GridError(str(exc)) from None
        k_min, k_max = self.k_range
        if not 2 <= k_min < k_max:
            raise GridError(f"k_range must satisfy 2 <= k_min < k_max, got {self.k_range}")
        if self.master_seed < 0:
            raise GridError("master_seed must be unsigned")

    @property
    def names(self) -> tuple:
        return tuple(a.name for a in self.algorithms)

    @property
    def n_cells(self) -> int:
        return sum(a.n_cells for a in self.algorithms)

    def index(self, name: str) -> int:
        return self.names.index(name)

    def get(self, name: str) -> AlgorithmGrid:
        return self.algorithms[self.index(name)]

    def with_seed(self, seed: int) -> "GridSpec":
        return GridSpec(self.algorithms, self.k_range, seed)

    def to_dict(self) -> dict:
        return {
            "k_range": list(self.k_range),
            "master_seed": self.master_seed,
            "algorithms": [
                {"name": a.name, "hypers": [dict(h) for h in a.hypers], "metrics": list(a.metrics)}
                for a in self.algorithms
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GridSpec":
        algos = [
            AlgorithmGrid(a["name"], tuple(a["hypers"]), tuple(canonical_metric(m) for m in a["metrics"]))
            for a in d["algorithms"]
        ]
        return cls(tuple(algos), tuple(d.get("k_range", (2, 10))), int(d.get("master_seed", 0)))


def cell_seed(master_seed: int, algorithm_index: int, hyper_index: int) -> int:
    """Stable 63-bit seed shared by every metric of one fit."""
    ss = np.random.SeedSequence([int(master_seed), int(algorithm_index), int(hyper_index)])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def subsample_seed(master_seed: int, algorithm_index: int) -> int:
    """Seed for the capped subsample an algorithm sees (shared across its hypers)."""
    ss = np.random.SeedSequence([int(master_seed), int(algorithm_index), 0xC0FFEE])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


def _values(spec):
    if isinstance(spec, dict):
        if "geomspace" in spec:
            start, stop, num = spec["geomspace"]
            return [float(v) for v in np.geomspace(float(start), float(stop), int(num))]
        if "linspace" in spec:
            start, stop, num = spec["linspace"]
            return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
        raise GridError(f"unsupported value generator {spec}")
    if isinstance(spec, (list, tuple)):
        return list(spec)
    return [spec]


def expand_grid(algorithm: str, params: dict) -> list:
    """Cartesian product of parameter lists, first key outermost.

    Parameters that do not apply to a selection (for spectral clustering:
    ``metric``/``n_neighbors`` outside ``precomputed``, ``gamma`` inside it)
    are left out of that selection.
    """
    keys = list(params)
    rules = _CONDITIONAL.get(algorithm, {})
    out, seen = [], set()
    for combo in itertools.product(*(_values(params[k]) for k in keys)):
        h = dict(zip(keys, combo))
        h = {k: v for k, v in h.items() if k not in rules or rules[k](h)}
        key = tuple(sorted(h.items()))
        if key not in seen:
            seen.add(key)
            out.append(h)
    return out


DEFAULT_PARAMS = {
    "kmeans": {
        "init": ["k-means++", "random"],
        "reassignment_ratio": {"geomspace": [1e-4, 0.5, 8]},
    },
    "gmm": {
        "covariance_type": ["diag", "tied", "spherical"],
        "reg_covar": {"geomspace": [1e-8, 1e-2, 6]},
    },
    "hca": {"method": ["centroid", "median", "single", "ward"], "metric": ["euclidean"]},
    "spectral": {
        "affinity": ["laplacian", "precomputed", "rbf", "sigmoid"],
        "metric": ["cosine", "l2", "l1"],
        "n_neighbors": [5, 20, 100],
        "gamma": [0.1, 1.0, 10.0],
    },
}

DEFAULT_METRICS = {
    "kmeans": ["aic", "bic", "inertia", "silhouette"],
    "gmm": ["aic", "bic", "inertia", "silhouette"],
    "hca": ["elbow", "inertia", "silhouette", "max_diff"],
    "spectral": ["inertia", "silhouette"],
}


def grid_from_mapping(mapping: dict, k_range=(2, 10), master_seed: int = 0) -> GridSpec:
    """Build a grid from ``{algorithm: {"params": {...}, "metrics": [...]}}``.

    An algorithm may list explicit selections under ``"hypers"`` instead of
    ``"params"``.
    """
    algos = []
    for name, entry in mapping.items():
        if "hypers" in entry:
            hypers = [dict(h) for h in entry["hypers"]]
        else:
            hypers = expand_grid(name, entry.get("params", DEFAULT_PARAMS.get(name, {})))
        metrics = entry.get("metrics", DEFAULT_METRICS.get(name))
        if metrics is None:
            raise GridError(f"{name}: no metrics given")
        algos.append(AlgorithmGrid(name, tuple(hypers), tuple(canonical_metric(m) for m in metrics)))
    return GridSpec(tuple(algos), k_range, master_seed)


def default_grid(k_range=(2, 10), master_seed: int = 0) -> GridSpec:
    """The four-algorithm grid: 16 k-means, 18 GMM, 4 HCA and 18 spectral selections."""
    mapping = {
        name: {"params": DEFAULT_PARAMS[name], "metrics": DEFAULT_METRICS[name]}
        for name in ALGORITHMS
    }
    return grid_from_mapping(mapping, k_range, master_seed)
