"""Agglomerative clustering through the Lance-Williams update formula.

Distances are kept squared internally; reported merge heights are their
square roots, so single and ward heights coincide with the usual euclidean
conventions.  Centroid and median linkage are not reducible and may
produce height inversions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import pdist, squareform

from ._labeling import FitError, Labeling, canonical_relabel, check_k

LINKAGES = ("centroid", "median", "single", "ward")


@dataclass(frozen=True)
class HCAConfig:
    method: str = "ward"
    metric: str = "euclidean"

    def __post_init__(self):
        if self.method not in LINKAGES:
            raise ValueError(f"method must be one of {LINKAGES}, got {self.method!r}")
        if self.metric != "euclidean":
            raise ValueError(f"only the euclidean metric is supported, got {self.metric!r}")


@dataclass(frozen=True, eq=False)
class Dendrogram:
    """Merge sequence of ``n - 1`` steps.

    Row ``t`` of ``merges`` is ``(left_id, right_id, height, new_size)``.
    Ids below ``n`` are original points; id ``n + t`` is the cluster created
    by merge ``t``.
    """

    merges: np.ndarray
    n: int

    @property
    def heights(self) -> np.ndarray:
        return self.merges[:, 2]

    def height_for(self, m: int) -> float:
        """Height of the merge that leaves ``m`` clusters."""
        if not 1 <= m <= self.n - 1:
            raise ValueError(f"m={m} outside [1, {self.n - 1}]")
        return float(self.merges[self.n - 1 - m, 2])


def _lance_williams(method, d_ka, d_kb, d_ab, n_a, n_b, n_k):
    if method == "single":
        return np.minimum(d_ka, d_kb)
    if method == "ward":
        t = n_a + n_b + n_k
        return ((n_a + n_k) * d_ka + (n_b + n_k) * d_kb - n_k * d_ab) / t
    if method == "centroid":
        s = n_a + n_b
        return (n_a * d_ka + n_b * d_kb) / s - n_a * n_b * d_ab / (s * s)
    return 0.5 * d_ka + 0.5 * d_kb - 0.25 * d_ab


def fit_hca(data, config: HCAConfig = HCAConfig()) -> Dendrogram:
    """Build the full merge sequence for ``data``.

    Each cluster lives in the slot of its smallest point index.  Among
    equally close pairs the lexicographically smallest slot pair merges
    first, which makes the result fully deterministic.
    """
    X = np.asarray(getattr(data, "points", data), dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise FitError(f"hierarchical clustering needs n >= 2, got {n}")
    method = config.method

    D = squareform(pdist(X, "sqeuclidean"))
    np.fill_diagonal(D, np.inf)

    idx = np.arange(n)
    active = np.ones(n, dtype=bool)
    sizes = np.ones(n)
    ids = np.arange(n)

    # nearest neighbours are searched in the strict upper triangle only
    def row_nn(r):
        row = D[r, r + 1 :]
        if row.size == 0:
            return -1, np.inf
        c = int(np.argmin(row))
        return r + 1 + c, row[c]

    nn = np.full(n, -1)
    mind = np.full(n, np.inf)
    for r in range(n - 1):
        nn[r], mind[r] = row_nn(r)

    merges = np.empty((n - 1, 4))
    for t in range(n - 1):
        a = int(np.argmin(mind))
        b = int(nn[a])
        d_ab = D[a, b]
        merges[t] = (min(ids[a], ids[b]), max(ids[a], ids[b]), np.sqrt(max(d_ab, 0.0)), sizes[a] + sizes[b])

        others = active.copy()
        others[[a, b]] = False
        new = np.full(n, np.inf)
        new[others] = _lance_williams(
            method, D[others, a], D[others, b], d_ab, sizes[a], sizes[b], sizes[others]
        )
        if method in ("centroid", "median"):
            np.maximum(new, 0.0, out=new)
        D[a, :] = new
        D[:, a] = new
        D[b, :] = np.inf
        D[:, b] = np.inf
        active[b] = False
        mind[b] = np.inf
        nn[b] = -1
        sizes[a] += sizes[b]
        ids[a] = n + t

        stale = active & ((nn == a) | (nn == b))
        stale[a] = True
        lower = active & (idx < a) & ~stale
        col = D[:, a]
        better = lower & ((col < mind) | ((col == mind) & (a < nn)))
        nn[better] = a
        mind[better] = col[better]
        for r in np.flatnonzero(stale):
            nn[r], mind[r] = row_nn(r)

    return Dendrogram(merges, n)


def cut_dendrogram(dendrogram: Dendrogram, k: int) -> Labeling:
    """Labeling obtained by undoing the last ``k - 1`` merges.

    Cluster ids are ordered by the smallest point index they contain.
    """
    n = dendrogram.n
    try:
        check_k(k, n)
    except FitError as exc:
        raise ValueError(str(exc)) from None
    parent = np.arange(2 * n - 1)

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    for t in range(n - k):
        left, right = int(dendrogram.merges[t, 0]), int(dendrogram.merges[t, 1])
        parent[find(left)] = n + t
        parent[find(right)] = n + t
    roots = np.array([find(i) for i in range(n)])
    return Labeling(canonical_relabel(roots), k)
