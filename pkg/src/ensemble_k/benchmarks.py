"""Reference baselines: random combination choice and consensus clustering."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.integrate import trapezoid

from .algorithms import FitError, fit_labels, make_config
from .ensemble import EnsembleError, combination_accuracy


def expected_value_baseline(tables, true_k) -> float:
    """Expected accuracy (percent) of a uniformly drawn (algorithm, hyper, metric) cell."""
    acc = combination_accuracy(tables, true_k)
    return 100.0 * float(np.mean(list(acc.values())))


@dataclass(frozen=True)
class ConsensusConfig:
    algorithm: str = "kmeans"
    hyper: dict = field(default_factory=dict)
    k_range: tuple = (2, 10)
    n_resamples: int = 50
    subsample_fraction: float = 0.8
    seed: int = 0

    def __post_init__(self):
        if self.n_resamples < 2:
            raise ValueError(f"n_resamples must be >= 2, got {self.n_resamples}")
        if not 0 < self.subsample_fraction < 1:
            raise ValueError(f"subsample_fraction must be in (0, 1), got {self.subsample_fraction}")
        k_min, k_max = self.k_range
        if not 2 <= k_min <= k_max:
            raise ValueError(f"invalid k_range {self.k_range}")


def consensus_matrix(n: int, samples, labelings) -> np.ndarray:
    """Co-clustering frequency over resamples.

    Entry (i, j) is (times i and j were clustered together) / (times they
    were sampled together); never co-sampled pairs get 0.
    """
    together = np.zeros((n, n))
    sampled = np.zeros((n, n))
    for idx, lab in zip(samples, labelings):
        idx = np.asarray(idx)
        lab = np.asarray(getattr(lab, "assignments", lab))
        same = (lab[:, None] == lab[None, :]).astype(np.float64)
        ix = np.ix_(idx, idx)
        together[ix] += same
        sampled[ix] += 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        C = np.where(sampled > 0, together / sampled, 0.0)
    return C


def cdf_area(C: np.ndarray, n_thresholds: int = 100) -> float:
    """Trapezoid area under the empirical CDF of the upper-triangle consensus values."""
    vals = np.sort(C[np.triu_indices(C.shape[0], k=1)])
    grid = np.linspace(0.0, 1.0, n_thresholds)
    cdf = np.searchsorted(vals, grid, side="right") / vals.size
    return float(trapezoid(cdf, grid))


def area_deltas(areas) -> np.ndarray:
    """Relative increase of the running-max CDF area; the first entry is the area itself."""
    areas = np.asarray(areas, dtype=np.float64)
    best = np.maximum.accumulate(areas)
    delta = np.empty_like(best)
    delta[0] = areas[0]
    with np.errstate(invalid="ignore", divide="ignore"):
        delta[1:] = np.where(best[:-1] > 0, (best[1:] - best[:-1]) / best[:-1], 0.0)
    return delta


class ConsensusResult(NamedTuple):
    k: int
    k_values: list
    areas: list
    deltas: list


def consensus_curve(data, config: ConsensusConfig) -> ConsensusResult:
    X = np.asarray(getattr(data, "points", data), dtype=np.float64)
    n = X.shape[0]
    m = int(round(config.subsample_fraction * n))
    k_min, k_max = config.k_range
    if k_max > m:
        raise ValueError(f"k_max={k_max} exceeds the resample size {m}")
    model = make_config(config.algorithm, config.hyper)
    ks = list(range(k_min, k_max + 1))
    ss = np.random.SeedSequence([int(config.seed)])
    areas = []
    for k, k_ss in zip(ks, ss.spawn(len(ks))):
        samples, labelings = [], []
        for r_ss in k_ss.spawn(config.n_resamples):
            rng = np.random.default_rng(r_ss)
            idx = np.sort(rng.choice(n, size=m, replace=False))
            try:
                lab = fit_labels(config.algorithm, X[idx], k, model, int(rng.integers(2**63)))
            except FitError:
                continue
            samples.append(idx)
            labelings.append(lab)
        if not samples:
            raise EnsembleError(f"every resample failed at k={k}")
        areas.append(cdf_area(consensus_matrix(n, samples, labelings)))
    deltas = area_deltas(areas)
    best = int(np.flatnonzero(deltas >= deltas.max())[0])
    return ConsensusResult(ks[best], ks, areas, deltas.tolist())


def consensus_cluster_count(data, config: ConsensusConfig = ConsensusConfig()) -> int:
    """Cluster count with the largest relative gain in consensus CDF area."""
    return consensus_curve(data, config).k
