"""Cluster-quality metrics and the per-k curves the elbow step consumes."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from . import elbow as _elbow
from .algorithms import (
    FitError,
    GMMResult,
    KMeansResult,
    cut_dendrogram,
    fit_gmm,
    fit_hca,
    fit_kmeans,
    make_config,
)
from .algorithms.spectral import build_affinity, cluster_embedding, spectral_embedding
from .dataset import Dataset, subsample
from .elbow import MetricCurve

METRICS = ("aic", "bic", "inertia", "silhouette", "elbow", "max_diff")
DENDROGRAM_METRICS = ("elbow", "max_diff")
_ALIASES = {"silhouette_score": "silhouette"}

_U64 = 2**64


class MetricError(ValueError):
    pass


class CurveError(RuntimeError):
    """A fit or metric failed while building a curve; the message names the cell."""


def canonical_metric(name: str) -> str:
    name = _ALIASES.get(name, name)
    if name not in METRICS:
        raise MetricError(f"unknown metric {name!r}")
    return name


def _points(data):
    return np.asarray(getattr(data, "points", data), dtype=np.float64)


def _assignments(labeling):
    return np.asarray(getattr(labeling, "assignments", labeling))


def inertia(data, labeling) -> float:
    """Sum of squared distances from points to their cluster centroid."""
    X = _points(data)
    a = _assignments(labeling)
    total = 0.0
    for c in np.unique(a):
        members = X[a == c]
        total += float(np.sum((members - members.mean(axis=0)) ** 2))
    return total


def _stratified_indices(labels, cap, rng):
    ids, counts = np.unique(labels, return_counts=True)
    n = labels.size
    quota = counts * cap / n
    take = np.floor(quota).astype(int)
    # largest remainders fill the cap; ties go to the smaller label
    order = np.lexsort((ids, -(quota - take)))
    take[order[: cap - take.sum()]] += 1
    parts = [
        rng.choice(np.flatnonzero(labels == c), size=t, replace=False)
        for c, t in zip(ids, take)
        if t > 0
    ]
    return np.sort(np.concatenate(parts))


def silhouette_samples(X, labels) -> np.ndarray:
    """Per-point silhouette values computed from the full distance matrix."""
    ids, inv = np.unique(labels, return_inverse=True)
    if ids.size < 2:
        raise MetricError("silhouette needs at least 2 clusters")
    D = cdist(X, X)
    onehot = np.zeros((X.shape[0], ids.size))
    onehot[np.arange(X.shape[0]), inv] = 1.0
    sums = D @ onehot
    counts = onehot.sum(axis=0)
    own = counts[inv]
    a = sums[np.arange(X.shape[0]), inv] / np.maximum(own - 1, 1)
    mean_other = sums / counts[None, :]
    mean_other[np.arange(X.shape[0]), inv] = np.inf
    b = mean_other.min(axis=1)
    denom = np.maximum(a, b)
    with np.errstate(invalid="ignore", divide="ignore"):
        s = np.where(denom > 0, (b - a) / denom, 0.0)
    s[own == 1] = 0.0
    return s


def silhouette(data, labeling, cap: int = 1000, seed: int = 0) -> float:
    """Mean silhouette; a label-stratified subsample of ``cap`` points is used when n > cap."""
    X = _points(data)
    labels = _assignments(labeling)
    if np.unique(labels).size < 2:
        raise MetricError("silhouette is undefined for fewer than 2 clusters")
    if X.shape[0] > cap:
        idx = _stratified_indices(labels, cap, np.random.default_rng(seed))
        X, labels = X[idx], labels[idx]
    k = np.unique(labels).size
    if not 2 <= k <= X.shape[0] - 1:
        raise MetricError(f"silhouette needs 2 <= k <= n-1, got k={k}, n={X.shape[0]}")
    return float(np.mean(silhouette_samples(X, labels)))


def n_parameters(kind: str, k: int, d: int) -> int:
    """Free parameter count of a fitted model; ``kind`` is a covariance type or ``kmeans``."""
    if kind == "diag":
        return k * d + k * d + (k - 1)
    if kind == "tied":
        return k * d + d * (d + 1) // 2 + (k - 1)
    if kind == "spherical":
        return k * d + k + (k - 1)
    if kind == "kmeans":
        return k * d + 1 + (k - 1)
    raise MetricError(f"no parameter count for {kind!r}")


def kmeans_log_likelihood(inertia_value: float, sizes, n: int, d: int) -> float:
    """Hard-assignment spherical Gaussian log-likelihood with one pooled variance.

    The variance is the maximum-likelihood estimate ``inertia / (n d)``; it is
    floored at 1e-12 so that exact fits stay finite.
    """
    sizes = np.asarray(sizes, dtype=np.float64)
    sizes = sizes[sizes > 0]
    var = max(inertia_value / (n * d), 1e-12)
    return float(
        np.sum(sizes * np.log(sizes / n)) - 0.5 * n * d * np.log(2 * np.pi * var) - 0.5 * n * d
    )


def information_criterion(kind: str, model, n: int, d: int) -> float:
    """AIC (``2p - 2 lnL``) or BIC (``p ln n - 2 lnL``) of a fitted model."""
    if kind not in ("aic", "bic"):
        raise MetricError(f"kind must be 'aic' or 'bic', got {kind!r}")
    if isinstance(model, GMMResult):
        log_l = model.log_likelihood
        p = n_parameters(model.covariance_type, model.k, d)
    elif isinstance(model, KMeansResult):
        log_l = kmeans_log_likelihood(model.inertia, model.labeling.sizes(), n, d)
        p = n_parameters("kmeans", model.labeling.k, d)
    else:
        log_l = getattr(model, "log_likelihood", None)
        p = getattr(model, "n_parameters", None)
        if log_l is None or p is None:
            raise MetricError("model has no log-likelihood")
    if not np.isfinite(log_l):
        raise MetricError("model log-likelihood is not finite")
    penalty = 2.0 * p if kind == "aic" else p * np.log(n)
    return float(penalty - 2.0 * log_l)


def estimate_k_from_dendrogram(dendrogram, method: str, k_range) -> int:
    """Cluster count read directly off merge heights.

    ``max_diff`` picks the m with the largest jump ``h(m-1) - h(m)``;
    ``elbow`` runs the triangle method on ``(m, h(m))``.  Ties go to the
    smallest m.
    """
    return dendrogram_guess(dendrogram_curve(dendrogram, method, k_range), method)


def dendrogram_curve(dendrogram, method: str, k_range) -> MetricCurve:
    """Curve a direct dendrogram estimator reads: heights (elbow) or jumps (max_diff)."""
    k_min, k_max = k_range
    if dendrogram.n < 3 or k_min < 2 or k_max > dendrogram.n - 1 or k_min > k_max:
        raise MetricError(f"k_range {k_range} outside [2, {dendrogram.n - 1}]")
    ms = list(range(k_min, k_max + 1))
    h = {m: dendrogram.height_for(m) for m in range(k_min - 1, k_max + 1)}
    if method == "elbow":
        return MetricCurve(ms, [h[m] for m in ms], "elbow")
    if method == "max_diff":
        return MetricCurve(ms, [h[m - 1] - h[m] for m in ms], "max_diff")
    raise MetricError(f"unknown dendrogram method {method!r}")


def dendrogram_guess(curve: MetricCurve, method: str) -> int:
    if method == "max_diff":
        return int(curve.k_values[_elbow.first_max(curve.scores)])
    return _elbow.find_elbow(curve)


@dataclass(frozen=True)
class CurveOptions:
    """Subsampling caps and elbow settings shared by every curve in a run."""

    silhouette_cap: int = 1000
    hca_cap: int = 2000
    spectral_cap: int = 1000
    elbow_method: str = "triangle"
    kmeans_batch_size: int = 1024
    kmeans_n_init: int = 3
    kmeans_max_iter: int = 100
    gmm_n_init: int = 1
    gmm_max_iter: int = 100


def build_config(algorithm: str, hyper: dict, options: CurveOptions = CurveOptions()):
    if algorithm == "kmeans":
        defaults = dict(batch_size=options.kmeans_batch_size, n_init=options.kmeans_n_init,
                        max_iter=options.kmeans_max_iter)
    elif algorithm == "gmm":
        defaults = dict(n_init=options.gmm_n_init, max_iter=options.gmm_max_iter)
    else:
        defaults = {}
    try:
        return make_config(algorithm, hyper, **defaults)
    except ValueError as exc:
        raise MetricError(str(exc)) from None


def _k_seed(seed, k):
    return (int(seed) + int(k)) % _U64


def compute_curves(data, algorithm: str, hyper: dict, metrics, k_range, seed: int,
                   options: CurveOptions = CurveOptions(), subsample_seed=None) -> dict:
    """All requested metric curves for one algorithm/hyperparameter selection.

    One fit per k (HCA: a single dendrogram cut at every k) serves every
    metric.  The fit for k uses ``seed + k``.  HCA and spectral clustering
    run on a subsample capped by ``options``.  Returns ``{metric: MetricCurve}``.
    """
    metrics = [canonical_metric(m) for m in metrics]
    if not isinstance(data, Dataset):
        data = Dataset(data)
    k_min, k_max = int(k_range[0]), int(k_range[1])
    if k_min < 2 or k_max < k_min:
        raise MetricError(f"invalid k_range {k_range}")
    config = build_config(algorithm, hyper, options)
    sub_seed = seed if subsample_seed is None else subsample_seed
    if algorithm == "hca":
        data = subsample(data, options.hca_cap, sub_seed)
    elif algorithm == "spectral":
        data = subsample(data, options.spectral_cap, sub_seed)
    X = data.points
    n, d = X.shape
    if k_max > n:
        raise MetricError(f"k_max={k_max} exceeds n={n}")
    for m in metrics:
        if m in ("aic", "bic") and algorithm not in ("kmeans", "gmm"):
            raise MetricError(f"{m} is not defined for {algorithm}")
        if m in DENDROGRAM_METRICS and algorithm != "hca":
            raise MetricError(f"{m} requires hierarchical clustering")

    ks = list(range(k_min, k_max + 1))
    scores = {m: [] for m in metrics if m not in DENDROGRAM_METRICS}
    curves = {}
    dendrogram = None
    embedding = None
    if algorithm == "hca":
        dendrogram = _guard(lambda: fit_hca(X, config), algorithm, hyper, None, None)
        for m in metrics:
            if m in DENDROGRAM_METRICS:
                curves[m] = _guard(lambda: dendrogram_curve(dendrogram, m, (k_min, k_max)),
                                   algorithm, hyper, m, None)
    elif algorithm == "spectral" and scores:
        embedding = _guard(
            lambda: spectral_embedding(build_affinity(X, config), k_max), algorithm, hyper, None, None
        )

    for k in ks:
        if not scores:
            break
        k_seed = _k_seed(seed, k)
        if algorithm == "kmeans":
            model = _guard(lambda: fit_kmeans(X, k, config, k_seed), algorithm, hyper, None, k)
            labeling = model.labeling
        elif algorithm == "gmm":
            model = _guard(lambda: fit_gmm(X, k, config, k_seed), algorithm, hyper, None, k)
            labeling = model.labeling
        elif algorithm == "hca":
            model, labeling = None, cut_dendrogram(dendrogram, k)
        else:
            model = None
            labeling = _guard(lambda: cluster_embedding(embedding, k, k_seed), algorithm, hyper, None, k)
        for m in scores:
            scores[m].append(_guard(lambda: _score(m, X, labeling, model, n, d, options, k_seed),
                                    algorithm, hyper, m, k))
    for m, vals in scores.items():
        curves[m] = MetricCurve(ks, vals, m)
    return {m: curves[m] for m in metrics}


def _score(metric, X, labeling, model, n, d, options, seed):
    if metric == "inertia":
        return inertia(X, labeling)
    if metric == "silhouette":
        return silhouette(X, labeling, options.silhouette_cap, seed)
    return information_criterion(metric, model, n, d)


def _guard(fn, algorithm, hyper, metric, k):
    try:
        return fn()
    except (FitError, MetricError, ValueError, np.linalg.LinAlgError) as exc:
        raise CurveError(
            f"{type(exc).__name__} in algorithm={algorithm} hyper={hyper} metric={metric} k={k}: {exc}"
        ) from exc


def metric_curve(data, algorithm: str, hyper: dict, metric: str, k_range, seed: int,
                 options: CurveOptions = CurveOptions()) -> MetricCurve:
    """Single-metric convenience wrapper around :func:`compute_curves`."""
    return compute_curves(data, algorithm, hyper, [metric], k_range, seed, options)[
        canonical_metric(metric)
    ]


def guess_k(curve: MetricCurve, metric: str, elbow_method: str = "triangle") -> int:
    """Cluster-count guess for one cell: dendrogram estimators or elbow detection."""
    metric = canonical_metric(metric)
    if metric in DENDROGRAM_METRICS:
        return dendrogram_guess(curve, metric)
    return _elbow.find_elbow(curve, _elbow.ElbowMethod(elbow_method))
