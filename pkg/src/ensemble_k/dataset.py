"""Point datasets: synthetic blob generation, CSV persistence, splitting.

Every operation here is a pure function of its inputs (the seed included),
so datasets can be shared freely between worker processes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np


class DatasetError(ValueError):
    """Raised for invalid datasets or generator specifications."""


@dataclass(frozen=True, eq=False)
class Dataset:
    """An ``n x d`` matrix of points with optional ground-truth labels."""

    points: np.ndarray
    labels: Optional[np.ndarray] = None
    id: str = "dataset"

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise DatasetError(f"points must be a non-empty 2-d array, got shape {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise DatasetError("points contain non-finite coordinates")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.shape != (pts.shape[0],):
                raise DatasetError(f"labels must have length {pts.shape[0]}, got shape {lab.shape}")
            if not np.issubdtype(lab.dtype, np.integer):
                if not np.all(np.equal(np.mod(lab, 1), 0)):
                    raise DatasetError("labels must be integers")
            lab = lab.astype(np.int64)
            if lab.min() < 0 or lab.max() >= pts.shape[0]:
                raise DatasetError("labels must lie in [0, n)")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def n_labels(self) -> Optional[int]:
        """Number of distinct ground-truth clusters, if labels are known."""
        if self.labels is None:
            return None
        return int(np.unique(self.labels).size)

    def take(self, indices, id: Optional[str] = None) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(self.points[indices], labels, id or self.id)


@dataclass(frozen=True)
class BlobSpec:
    n_samples: int = 30000
    n_centers: int = 3
    n_features: int = 2
    center_box: tuple = (-5.0, 5.0)
    cluster_std: float = 1.0
    seed: int = 0

    def validate(self):
        if self.n_centers < 1:
            raise DatasetError(f"n_centers must be >= 1, got {self.n_centers}")
        if self.n_samples < self.n_centers:
            raise DatasetError(
                f"n_samples ({self.n_samples}) must be >= n_centers ({self.n_centers})"
            )
        if self.n_features < 1:
            raise DatasetError(f"n_features must be >= 1, got {self.n_features}")
        low, high = self.center_box
        if not low < high:
            raise DatasetError(f"center_box low must be < high, got {self.center_box}")
        if not self.cluster_std > 0:
            raise DatasetError(f"cluster_std must be > 0, got {self.cluster_std}")
        if self.seed < 0:
            raise DatasetError(f"seed must be unsigned, got {self.seed}")


def generate_blobs(spec: BlobSpec, id: Optional[str] = None) -> Dataset:
    """Isotropic Gaussian blobs with centers drawn uniformly in ``center_box``.

    Samples are split as evenly as possible; the first
    ``n_samples % n_centers`` centers receive one extra point.
    """
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    low, high = spec.center_box
    centers = rng.uniform(low, high, size=(spec.n_centers, spec.n_features))

    sizes = np.full(spec.n_centers, spec.n_samples // spec.n_centers)
    sizes[: spec.n_samples % spec.n_centers] += 1
    labels = np.repeat(np.arange(spec.n_centers), sizes)
    noise = rng.normal(0.0, spec.cluster_std, size=(spec.n_samples, spec.n_features))
    points = centers[labels] + noise

    return Dataset(points, labels, id or f"blobs-{spec.seed}")


def split_subsets(data: Dataset, n_subsets: int, seed: int) -> list:
    """Random partition of ``data`` into ``n_subsets`` near-equal disjoint parts."""
    if n_subsets < 1:
        raise DatasetError(f"n_subsets must be >= 1, got {n_subsets}")
    if n_subsets > data.n:
        raise DatasetError(f"cannot split {data.n} points into {n_subsets} subsets")
    perm = np.random.default_rng(seed).permutation(data.n)
    width = len(str(n_subsets - 1))
    return [
        data.take(np.sort(part), id=f"{data.id}/s{i:0{width}d}")
        for i, part in enumerate(np.array_split(perm, n_subsets))
    ]


def subsample(data: Dataset, cap: int, seed: int) -> Dataset:
    """Uniform sample of at most ``cap`` rows without replacement (sorted order)."""
    if cap < 1:
        raise DatasetError(f"cap must be >= 1, got {cap}")
    if data.n <= cap:
        return data
    idx = np.random.default_rng(seed).choice(data.n, size=cap, replace=False)
    return data.take(np.sort(idx))


def save_csv(data: Dataset, path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    header = [f"f{i}" for i in range(data.d)]
    if data.labels is not None:
        header.append("label")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for i in range(data.n):
            row = [repr(float(v)) for v in data.points[i]]
            if data.labels is not None:
                row.append(str(int(data.labels[i])))
            writer.writerow(row)


def load_csv(path, id: Optional[str] = None) -> Dataset:
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError(f"{path}: empty file") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    has_labels = bool(header) and header[-1] == "label"
    d = len(header) - int(has_labels)
    if d < 1:
        raise DatasetError(f"{path}: header has no feature columns")
    if not rows:
        raise DatasetError(f"{path}: no data rows")
    try:
        table = np.array(rows, dtype=np.float64)
    except ValueError as exc:
        raise DatasetError(f"{path}: {exc}") from None
    if table.shape[1] != len(header):
        raise DatasetError(f"{path}: rows have {table.shape[1]} columns, header has {len(header)}")
    labels = table[:, d] if has_labels else None
    return Dataset(table[:, :d], labels, id or path.stem)
