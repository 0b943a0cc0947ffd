"""Evaluating the grid on one dataset and voting on the cluster count.

Run with ``python demos/02_ensemble_votes.py``.  Uses a trimmed grid so it
finishes in well under a minute.
"""
from ensemble_k.dataset import BlobSpec, generate_blobs
from ensemble_k.ensemble import all_votes, collapse_mode, evaluate_grid, raw_ensemble, vote_matrix
from ensemble_k.grid import grid_from_mapping
from ensemble_k.metrics import CurveOptions

# The 5 x 4 worked matrix: the three schemes can disagree
rows = [[2, 2, 2, 2], [2, 2, 2, 2], [3, 2, 3, 3], [3, 3, 2, 3], [3, 3, 3, 2]]
for scheme in ("full", "col", "row"):
    print(f"worked matrix, {scheme:<4} vote -> {vote_matrix(rows, scheme)}")

grid = grid_from_mapping({
    "kmeans": {"params": {"init": ["k-means++", "random"], "reassignment_ratio": [1e-3, 0.1]}},
    "gmm": {"params": {"covariance_type": ["diag", "tied", "spherical"], "reg_covar": [1e-6]}},
    "hca": {"params": {"method": ["single", "ward"], "metric": ["euclidean"]}},
    "spectral": {"params": {"affinity": ["precomputed", "rbf"], "metric": ["l2"],
                            "n_neighbors": [20], "gamma": [1.0]}},
}, k_range=(2, 10), master_seed=0)
print(f"\ngrid: {grid.n_cells} cells over {', '.join(grid.names)}")

data = generate_blobs(BlobSpec(n_samples=1500, seed=4))
table = evaluate_grid(data, grid, CurveOptions(hca_cap=600, spectral_cap=600, silhouette_cap=600))
print(f"failed cells: {len(table.failed)}")

for name, col in raw_ensemble(table).columns:
    print(f"raw  {name:<8} {col}")
for name, col in collapse_mode(table).columns:
    print(f"mode {name:<8} {col}")

print(f"\ntrue k = {data.n_labels}")
for (construction, scheme), k in all_votes(table).items():
    print(f"{construction:<4} + {scheme:<4} -> {k}")
