"""Knee detection on metric-versus-k curves.

All variants min-max normalize both axes first and never return an
endpoint.  Curves that increase overall are negated so that every metric
is read with the same "decreasing with diminishing returns" convention.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

METHODS = ("triangle", "second_derivative", "linear_fit")


class ElbowError(ValueError):
    pass


@dataclass(frozen=True)
class MetricCurve:
    k_values: tuple
    scores: tuple
    metric_name: str = ""

    def __post_init__(self):
        k = tuple(int(v) for v in self.k_values)
        s = tuple(float(v) for v in self.scores)
        if len(k) != len(s):
            raise ElbowError(f"{len(k)} k values but {len(s)} scores")
        if any(b <= a for a, b in zip(k, k[1:])):
            raise ElbowError("k values must be strictly increasing")
        if not all(np.isfinite(s)):
            raise ElbowError(f"non-finite score in curve {self.metric_name!r}")
        object.__setattr__(self, "k_values", k)
        object.__setattr__(self, "scores", s)

    def __len__(self):
        return len(self.k_values)


@dataclass(frozen=True)
class ElbowMethod:
    variant: str = "triangle"
    # second_derivative only: "min_abs" (smallest |second difference|) or "max"
    orientation: str = "min_abs"

    def __post_init__(self):
        if self.variant not in METHODS:
            raise ElbowError(f"unknown elbow variant {self.variant!r}")
        if self.orientation not in ("min_abs", "max"):
            raise ElbowError(f"unknown orientation {self.orientation!r}")


class Elbow(NamedTuple):
    k: int
    degenerate: bool
    scores: np.ndarray  # per-interior-point criterion, larger is better


def _normalize(values):
    values = np.asarray(values, dtype=np.float64)
    span = values.max() - values.min()
    if span == 0:
        return np.zeros_like(values)
    return (values - values.min()) / span


def oriented(scores: Sequence[float]) -> np.ndarray:
    """Scores negated when the curve rises overall (last above first)."""
    y = np.asarray(scores, dtype=np.float64)
    return -y if y[-1] > y[0] else y


def triangle_distances(x, y) -> np.ndarray:
    """Perpendicular distance of every point from the chord joining the endpoints."""
    dx, dy = x[-1] - x[0], y[-1] - y[0]
    norm = np.hypot(dx, dy)
    if norm == 0:
        return np.zeros_like(x)
    return np.abs(dy * (x - x[0]) - dx * (y - y[0])) / norm


def first_max(values, atol: float = 1e-12) -> int:
    """Index of the first value within ``atol`` of the maximum."""
    values = np.asarray(values)
    return int(np.flatnonzero(values >= values.max() - atol)[0])


def _two_piece_sse(x, y, b):
    total = 0.0
    for xs, ys in ((x[: b + 1], y[: b + 1]), (x[b:], y[b:])):
        if xs.size > 2:
            coef = np.polyfit(xs, ys, 1)
            total += float(np.sum((np.polyval(coef, xs) - ys) ** 2))
    return total


def elbow(curve: MetricCurve, method: ElbowMethod = ElbowMethod()) -> Elbow:
    if len(curve) < 3:
        raise ElbowError(f"elbow detection needs at least 3 points, got {len(curve)}")
    ks = np.asarray(curve.k_values)
    y = _normalize(oriented(curve.scores))
    x = _normalize(ks)
    degenerate = bool(np.all(y == y[0]))

    if method.variant == "triangle":
        crit = triangle_distances(x, y)[1:-1]
    elif method.variant == "second_derivative":
        d2 = y[:-2] - 2.0 * y[1:-1] + y[2:]
        crit = -np.abs(d2) if method.orientation == "min_abs" else d2
    else:
        crit = -np.array([_two_piece_sse(x, y, b) for b in range(1, len(ks) - 1)])

    if degenerate:
        return Elbow(int(ks[1]), True, crit)
    return Elbow(int(ks[1 + first_max(crit)]), False, crit)


def find_elbow(curve: MetricCurve, method: ElbowMethod = ElbowMethod()) -> int:
    """Guessed cluster count at the knee of ``curve``."""
    return elbow(curve, method).k
