from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class FitError(RuntimeError):
    """A clustering fit could not produce a valid result."""


@dataclass(frozen=True, eq=False)
class Labeling:
    """Cluster assignments with every id in ``[0, k)`` used at least once."""

    assignments: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.assignments, dtype=np.int64)
        if a.ndim != 1:
            raise ValueError("assignments must be 1-d")
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        if a.size and (a.min() < 0 or a.max() >= self.k):
            raise ValueError(f"assignments must lie in [0, {self.k})")
        if np.bincount(a, minlength=self.k).min() == 0:
            raise ValueError("labeling has an empty cluster")
        a.setflags(write=False)
        object.__setattr__(self, "assignments", a)

    @property
    def n(self) -> int:
        return self.assignments.size

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignments, minlength=self.k)


def check_k(k: int, n: int, k_min: int = 1):
    if n < 1:
        raise FitError("empty dataset")
    if not k_min <= k <= n:
        raise FitError(f"k={k} outside [{k_min}, {n}]")


def sq_distances(X: np.ndarray, C: np.ndarray) -> np.ndarray:
    """Squared euclidean distances between rows of X and rows of C."""
    d = (
        np.einsum("ij,ij->i", X, X)[:, None]
        - 2.0 * X @ C.T
        + np.einsum("ij,ij->i", C, C)[None, :]
    )
    np.maximum(d, 0.0, out=d)
    return d


def canonical_relabel(assignments: np.ndarray) -> np.ndarray:
    """Renumber ids by order of first appearance (smallest point index first)."""
    _, first, inverse = np.unique(assignments, return_index=True, return_inverse=True)
    order = np.argsort(np.argsort(first))
    return order[inverse]
