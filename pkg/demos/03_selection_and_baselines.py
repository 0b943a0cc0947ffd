"""After k is decided: ranking combinations and comparing with baselines.

Run with ``python demos/03_selection_and_baselines.py``.  Splits one dataset
into subsets, takes the mode of the subset votes as the global k, then ranks
every algorithm/hyperparameter/metric combination by agreement with it.
"""
from ensemble_k.benchmarks import ConsensusConfig, consensus_curve, expected_value_baseline
from ensemble_k.dataset import BlobSpec, generate_blobs, split_subsets, subsample
from ensemble_k.ensemble import all_votes, evaluate_grid, smallest_mode
from ensemble_k.grid import grid_from_mapping
from ensemble_k.metrics import CurveOptions
from ensemble_k.selection import rank_by_accuracy, rank_by_stability

grid = grid_from_mapping({
    "kmeans": {"params": {"init": ["k-means++", "random"], "reassignment_ratio": [0.01]}},
    "gmm": {"params": {"covariance_type": ["diag", "spherical"], "reg_covar": [1e-8]}},
    "hca": {"params": {"method": ["ward"], "metric": ["euclidean"]}},
}, k_range=(2, 8), master_seed=3)
opts = CurveOptions(hca_cap=500, silhouette_cap=500)

data = generate_blobs(BlobSpec(n_samples=3000, seed=12))
subsets = split_subsets(data, 6, seed=0)
tables = [evaluate_grid(s, grid, opts) for s in subsets]
votes = [all_votes(t)[("mode", "full")] for t in tables]
global_k = smallest_mode(votes)
print(f"subset votes {votes} -> global k = {global_k} (true {data.n_labels})")

print("\nrank  score  combination")
for c in rank_by_accuracy(tables, global_k)[:8]:
    print(f"{c.rank:>4}  {c.score:5.2f}  {c.algorithm} [{c.hyper_text()}] {c.metric}")

print("\nstability on the first subset (fraction of metrics agreeing):")
for c in rank_by_stability(tables[0], votes[0]):
    print(f"{c.rank:>4}  {c.score:5.2f}  {c.algorithm} [{c.hyper_text()}]")

ev = expected_value_baseline(tables, data.n_labels)
print(f"\npicking a combination at random: {ev:.2f}% expected accuracy")

small = subsample(data, 300, seed=0)
res = consensus_curve(small, ConsensusConfig(k_range=(2, 8), n_resamples=15))
for k, a, d in zip(res.k_values, res.areas, res.deltas):
    print(f"consensus k={k}: CDF area {a:.3f}, delta {d:.3f}")
print(f"consensus clustering picks k = {res.k}")
