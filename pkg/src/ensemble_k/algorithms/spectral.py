"""Spectral clustering on the symmetric normalized Laplacian."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist, pdist, squareform

from ._labeling import FitError, Labeling, canonical_relabel, check_k
from .kmeans import KMeansConfig, fit_kmeans

AFFINITIES = ("laplacian", "precomputed", "rbf", "sigmoid")
KNN_METRICS = {"cosine": "cosine", "l2": "euclidean", "l1": "cityblock"}


@dataclass(frozen=True)
class SpectralConfig:
    """``metric``/``n_neighbors`` apply to ``precomputed`` only; ``gamma`` to the kernels."""

    affinity: str = "rbf"
    metric: str = "l2"
    n_neighbors: int = 10
    gamma: float = 1.0

    def __post_init__(self):
        if self.affinity not in AFFINITIES:
            raise ValueError(f"affinity must be one of {AFFINITIES}, got {self.affinity!r}")
        if self.metric not in KNN_METRICS:
            raise ValueError(f"metric must be one of {tuple(KNN_METRICS)}, got {self.metric!r}")
        if self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")


def build_affinity(data, config: SpectralConfig) -> np.ndarray:
    """Symmetric non-negative ``n x n`` affinity matrix.

    Kernels carry a unit diagonal.  The ``precomputed`` option is a 0/1
    k-nearest-neighbour graph symmetrized by elementwise max, with a zero
    diagonal.  The sigmoid kernel is clamped at zero.
    """
    X = np.asarray(getattr(data, "points", data), dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise FitError(f"affinity needs n >= 2, got {n}")
    g = config.gamma
    if config.affinity == "rbf":
        W = np.exp(-g * squareform(pdist(X, "sqeuclidean")))
    elif config.affinity == "laplacian":
        W = np.exp(-g * squareform(pdist(X, "cityblock")))
    elif config.affinity == "sigmoid":
        W = np.maximum(np.tanh(g * (X @ X.T) + 1.0), 0.0)
        W = 0.5 * (W + W.T)
    else:
        if config.n_neighbors >= n:
            raise FitError(f"n_neighbors={config.n_neighbors} must be < n={n}")
        dist = cdist(X, X, KNN_METRICS[config.metric])
        np.fill_diagonal(dist, np.inf)
        nbrs = np.argsort(dist, axis=1, kind="stable")[:, : config.n_neighbors]
        W = np.zeros((n, n))
        W[np.repeat(np.arange(n), config.n_neighbors), nbrs.ravel()] = 1.0
        W = np.maximum(W, W.T)
        np.fill_diagonal(W, 0.0)
        return W
    np.fill_diagonal(W, 1.0)
    return W


def normalized_laplacian(W: np.ndarray) -> np.ndarray:
    """``I - D^-1/2 W D^-1/2``; zero-degree vertices are given degree 1."""
    deg = W.sum(axis=1)
    deg[deg <= 0] = 1.0
    inv_sqrt = 1.0 / np.sqrt(deg)
    L = -(inv_sqrt[:, None] * W * inv_sqrt[None, :])
    L.flat[:: W.shape[0] + 1] += 1.0
    return 0.5 * (L + L.T)


def spectral_embedding(W: np.ndarray, n_components: int) -> np.ndarray:
    """Row-normalized eigenvectors of the ``n_components`` smallest Laplacian eigenvalues."""
    L = normalized_laplacian(W)
    try:
        _, vecs = linalg.eigh(L, subset_by_index=[0, n_components - 1])
    except linalg.LinAlgError as exc:
        raise FitError(f"eigensolver failed: {exc}") from None
    return _row_normalize(vecs)


def _row_normalize(U):
    norms = np.linalg.norm(U, axis=1)
    norms[norms == 0] = 1.0
    return U / norms[:, None]


def cluster_embedding(embedding: np.ndarray, k: int, seed: int, kmeans_config=None) -> Labeling:
    """k-means on the first ``k`` embedding columns (re-normalized per row)."""
    U = _row_normalize(embedding[:, :k])
    cfg = kmeans_config or KMeansConfig(init="k-means++")
    km = fit_kmeans(U, k, cfg, seed=seed)
    return Labeling(canonical_relabel(km.labeling.assignments), k)


def fit_spectral(data, k: int, config: SpectralConfig = SpectralConfig(), seed: int = 0,
                 affinity: np.ndarray = None) -> Labeling:
    """Spectral clustering into ``k`` groups.

    A precomputed ``affinity`` may be passed to skip its construction.
    """
    X = getattr(data, "points", data)
    n = len(X) if affinity is None else affinity.shape[0]
    check_k(k, n, k_min=2)
    W = build_affinity(X, config) if affinity is None else affinity
    return cluster_embedding(spectral_embedding(W, k), k, seed)
