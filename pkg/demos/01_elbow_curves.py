"""Metric curves and their elbows on one blob dataset.

Run with ``python demos/01_elbow_curves.py``.  Prints the curve each
algorithm/metric pair produces for k = 2..10 and the k read off its knee.
"""
import numpy as np

from ensemble_k.dataset import BlobSpec, generate_blobs
from ensemble_k.elbow import ElbowMethod, MetricCurve, find_elbow
from ensemble_k.metrics import CurveOptions, compute_curves, guess_k

# A small version of the benchmark data: three gaussian blobs in 2-d
data = generate_blobs(BlobSpec(n_samples=1500, seed=0))
print(f"{data.id}: n={data.n}, d={data.d}, true k={data.n_labels}")

# Knee detection on a hand-made curve first
curve = MetricCurve(range(2, 7), [100, 50, 20, 18, 17], "toy")
for variant in ("triangle", "second_derivative", "linear_fit"):
    print(f"toy curve, {variant:<17} -> k={find_elbow(curve, ElbowMethod(variant))}")

# One fit per k serves every metric of a selection
opts = CurveOptions(hca_cap=800, spectral_cap=800, silhouette_cap=800)
selections = [
    ("kmeans", {"init": "k-means++", "reassignment_ratio": 0.01}, ["aic", "bic", "inertia", "silhouette"]),
    ("gmm", {"covariance_type": "diag", "reg_covar": 1e-8}, ["aic", "bic", "inertia", "silhouette"]),
    ("hca", {"method": "ward"}, ["elbow", "inertia", "silhouette", "max_diff"]),
    ("spectral", {"affinity": "precomputed", "metric": "l2", "n_neighbors": 20}, ["inertia", "silhouette"]),
]
for algo, hyper, metrics in selections:
    curves = compute_curves(data, algo, hyper, metrics, (2, 10), seed=1, options=opts)
    for metric, c in curves.items():
        scores = np.array(c.scores)
        shown = " ".join(f"{v:9.3g}" for v in scores)
        print(f"{algo:<8} {metric:<10} k={guess_k(c, metric)}  [{shown}]")
