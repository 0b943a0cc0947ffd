"""Estimate the number of clusters by voting over an ensemble of clustering
algorithms, hyperparameters and metrics, then recommend a combination."""

from .dataset import BlobSpec, Dataset, generate_blobs, load_csv, save_csv, split_subsets, subsample
from .elbow import ElbowMethod, MetricCurve, find_elbow
from .ensemble import (
    EnsembleMatrix,
    ResultTable,
    accuracy_stats,
    all_votes,
    collapse_mode,
    evaluate_grid,
    raw_ensemble,
    vote,
    vote_column_first,
    vote_full,
    vote_matrix,
    vote_row_first,
)
from .grid import GridSpec, default_grid
from .selection import rank_by_accuracy, rank_by_stability

__version__ = "0.1.0"
