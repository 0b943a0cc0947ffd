"""Independent reference implementations used as test oracles."""

import itertools
from collections import Counter

import numpy as np


def same_partition(a, b) -> bool:
    """True when two label vectors describe the same grouping."""
    a, b = np.asarray(a), np.asarray(b)
    pairs = set(zip(a.tolist(), b.tolist()))
    return len(pairs) == len(set(a.tolist())) == len(set(b.tolist()))


def kruskal_mst(X):
    """Edges ``(w, i, j)`` of a euclidean minimum spanning tree, by ascending weight."""
    n = len(X)
    edges = sorted(
        (float(np.sqrt(np.sum((X[i] - X[j]) ** 2))), i, j)
        for i in range(n) for j in range(i + 1, n)
    )
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    tree = []
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            tree.append((w, i, j))
    return tree


def components_without_heaviest(n, tree, k):
    """Connected components after deleting the ``k - 1`` heaviest tree edges."""
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for _, i, j in tree[: n - k]:
        parent[find(i)] = find(j)
    return np.array([find(i) for i in range(n)])


def silhouette_direct(X, labels):
    """Mean silhouette by explicit double loop."""
    n = len(X)
    labels = list(labels)
    total = 0.0
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            continue
        d = lambda j: float(np.sqrt(np.sum((X[i] - X[j]) ** 2)))  # noqa: E731
        a = sum(d(j) for j in own) / len(own)
        b = min(
            np.mean([d(j) for j in range(n) if labels[j] == c])
            for c in set(labels) if c != labels[i]
        )
        total += (b - a) / max(a, b) if max(a, b) > 0 else 0.0
    return total / n


def brute_elbow(ks, scores):
    """Triangle knee by looping over points, with explicit point-line distance."""
    ks = [float(k) for k in ks]
    y = [float(s) for s in scores]
    if y[-1] > y[0]:
        y = [-v for v in y]
    def norm(v):
        lo, hi = min(v), max(v)
        return [0.0] * len(v) if hi == lo else [(t - lo) / (hi - lo) for t in v]
    x, y = norm(ks), norm(y)
    p0, p1 = np.array([x[0], y[0]]), np.array([x[-1], y[-1]])
    line = (p1 - p0) / np.linalg.norm(p1 - p0)
    best, best_i = -1.0, 1
    for i in range(1, len(x) - 1):
        v = np.array([x[i], y[i]]) - p0
        dist = float(np.linalg.norm(v - (v @ line) * line))
        if dist > best + 1e-12:
            best, best_i = dist, i
    return int(ks[best_i])


def brute_votes(columns):
    """(full, row, col) votes over the explicitly materialized cross product."""
    def mode(vals):
        c = Counter(vals)
        top = max(c.values())
        return min(v for v, n in c.items() if n == top)

    rows = list(itertools.product(*columns))
    full = mode([v for r in rows for v in r])
    row = mode([mode(r) for r in rows])
    col = mode([mode(c) for c in columns])
    return full, row, col


def make_table(grid, guesses, dataset_id="t"):
    """ResultTable whose cells carry the given ``{algorithm: H x M array}`` guesses."""
    from ensemble_k.ensemble import CellResult, ResultTable

    cells = []
    for a in grid.algorithms:
        G = np.asarray(guesses[a.name])
        for h in range(len(a.hypers)):
            for m, metric in enumerate(a.metrics):
                cells.append(CellResult(a.name, h, m, metric, int(G[h, m]), None, "ok", ""))
    return ResultTable(dataset_id, grid, tuple(cells))


def small_grid(seed=0):
    from ensemble_k.grid import AlgorithmGrid, GridSpec

    return GridSpec((
        AlgorithmGrid("kmeans", ({"init": "k-means++"}, {"init": "random"}), ("inertia", "silhouette")),
        AlgorithmGrid("hca", ({"method": "ward"},), ("max_diff", "inertia", "elbow")),
    ), (2, 10), seed)
