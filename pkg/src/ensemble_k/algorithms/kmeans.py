"""Mini-batch k-means with low-count center reassignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._labeling import FitError, Labeling, check_k, sq_distances

_MAX_NO_IMPROVEMENT = 10


@dataclass(frozen=True)
class KMeansConfig:
    init: str = "k-means++"
    reassignment_ratio: float = 0.01
    batch_size: int = 1024
    n_init: int = 3
    max_iter: int = 100
    tol: float = 1e-4

    def __post_init__(self):
        init = {"kmeans++": "k-means++"}.get(self.init, self.init)
        object.__setattr__(self, "init", init)
        if init not in ("k-means++", "random"):
            raise ValueError(f"init must be 'k-means++' or 'random', got {self.init!r}")
        if not 0 < self.reassignment_ratio <= 1:
            raise ValueError(f"reassignment_ratio must be in (0, 1], got {self.reassignment_ratio}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.n_init < 1:
            raise ValueError(f"n_init must be >= 1, got {self.n_init}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


@dataclass(frozen=True, eq=False)
class KMeansResult:
    labeling: Labeling
    centers: np.ndarray
    inertia: float
    init_inertia: float

    def __iter__(self):
        # unpacks as (labeling, centers, inertia)
        return iter((self.labeling, self.centers, self.inertia))


def kmeans_plusplus(X, k, rng, n_local_trials=None):
    """Greedy k-means++ seeding; returns indices of the chosen rows."""
    n = X.shape[0]
    if n_local_trials is None:
        n_local_trials = 2 + int(np.log(k))
    chosen = np.empty(k, dtype=np.int64)
    chosen[0] = rng.integers(n)
    closest = sq_distances(X, X[chosen[:1]])[:, 0]
    for c in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all remaining mass sits on chosen points; fall back to unchosen rows
            pool = np.setdiff1d(np.arange(n), chosen[:c])
            chosen[c] = rng.choice(pool)
        else:
            # (1 - u) lies in (0, 1], so zero-weight rows are never drawn
            cand = np.searchsorted(np.cumsum(closest), (1.0 - rng.random(n_local_trials)) * total)
            cand = np.minimum(cand, n - 1)
            d_cand = np.minimum(closest[None, :], sq_distances(X[cand], X))
            best = int(np.argmin(d_cand.sum(axis=1)))
            chosen[c] = cand[best]
        closest = np.minimum(closest, sq_distances(X, X[chosen[c : c + 1]])[:, 0])
    return chosen


def _assign(X, centers):
    d = sq_distances(X, centers)
    labels = np.argmin(d, axis=1)
    return labels, d[np.arange(X.shape[0]), labels]


def _fill_empty(X, labels, dist, k):
    """Move the farthest points of multi-point clusters into empty clusters."""
    counts = np.bincount(labels, minlength=k)
    empty = np.flatnonzero(counts == 0)
    if empty.size == 0:
        return labels
    labels = labels.copy()
    order = np.argsort(-dist, kind="stable")
    pos = 0
    for e in empty:
        while counts[labels[order[pos]]] < 2:
            pos += 1
        donor = labels[order[pos]]
        counts[donor] -= 1
        labels[order[pos]] = e
        counts[e] = 1
        pos += 1
    return labels


def _centroids(X, labels, k):
    counts = np.bincount(labels, minlength=k).astype(np.float64)
    sums = np.zeros((k, X.shape[1]))
    np.add.at(sums, labels, X)
    return sums / counts[:, None]


def _minibatch_run(X, k, config, rng):
    n = X.shape[0]
    if config.init == "k-means++":
        centers = X[kmeans_plusplus(X, k, rng)].copy()
    else:
        centers = X[rng.choice(n, size=k, replace=False)].copy()
    init_centers = centers.copy()

    batch = min(config.batch_size, n)
    steps = config.max_iter * int(np.ceil(n / batch))
    counts = np.zeros(k)
    tol = config.tol * float(np.mean(np.var(X, axis=0)))
    ewa = None
    best_ewa = np.inf
    stale = 0
    for step in range(steps):
        idx = rng.integers(0, n, size=batch)
        xb = X[idx]
        lb, db = _assign(xb, centers)
        old = centers.copy()
        nb = np.bincount(lb, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, lb, xb)
        hit = nb > 0
        counts[hit] += nb[hit]
        centers[hit] += (sums[hit] - nb[hit, None] * centers[hit]) / counts[hit, None]

        if (step + 1) % (10 + int(counts.min())) == 0:
            low = counts < config.reassignment_ratio * counts.max()
            if low.sum() > 0.5 * k:
                # never reseed more than half of the centers at once
                keep = np.argsort(counts, kind="stable")[: int(0.5 * k)]
                low = np.zeros(k, dtype=bool)
                low[keep] = True
            if low.any() and not low.all():
                centers[low] = X[rng.choice(n, size=int(low.sum()), replace=False)]
                counts[low] = counts[~low].min()

        shift = float(np.sum((centers - old) ** 2))
        if k > 1 and shift <= tol and step > 0:
            break
        batch_inertia = float(db.sum()) / batch
        alpha = min(1.0, 2.0 * batch / (n + 1))
        ewa = batch_inertia if ewa is None else ewa * (1 - alpha) + batch_inertia * alpha
        if ewa < best_ewa:
            best_ewa, stale = ewa, 0
        else:
            stale += 1
            if stale >= _MAX_NO_IMPROVEMENT:
                break
    return init_centers, centers


def _finish(X, centers, k):
    labels, dist = _assign(X, centers)
    labels = _fill_empty(X, labels, dist, k)
    centers = _centroids(X, labels, k)
    labels, dist = _assign(X, centers)
    labels = _fill_empty(X, labels, dist, k)
    dist = np.sum((X - centers[labels]) ** 2, axis=1)
    return labels, centers, float(dist.sum())


def fit_kmeans(data, k: int, config: KMeansConfig = KMeansConfig(), seed: int = 0) -> KMeansResult:
    """Fit mini-batch k-means; best of ``config.n_init`` restarts by full inertia.

    Each restart runs mini-batch updates with per-center learning rate
    ``1/count`` and reseeds centers whose count falls below
    ``reassignment_ratio * max(count)``.  The result is finished with one
    full-data assignment and centroid update.  A restart never returns
    something worse than its own initialization.
    """
    X = getattr(data, "points", data)
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    check_k(k, n)
    rng = np.random.default_rng(seed)

    best = None
    for _ in range(config.n_init):
        init_centers, centers = _minibatch_run(X, k, config, rng)
        init_inertia = float(_assign(X, init_centers)[1].sum())
        labels, c, inertia = _finish(X, centers, k)
        if inertia > init_inertia:
            labels, c, inertia = _finish(X, init_centers, k)
        if not np.isfinite(inertia):
            raise FitError("k-means produced non-finite inertia")
        if best is None or inertia < best.inertia:
            best = KMeansResult(Labeling(labels, k), c, inertia, init_inertia)
    return best
