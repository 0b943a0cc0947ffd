import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_k.benchmarks import (
    ConsensusConfig,
    area_deltas,
    cdf_area,
    consensus_cluster_count,
    consensus_curve,
    consensus_matrix,
    expected_value_baseline,
)
from ensemble_k.ensemble import combination_accuracy
from ensemble_k.grid import AlgorithmGrid, GridSpec

from helpers import make_table, small_grid


class TestExpectedValue:
    def test_two_combinations(self):
        g = GridSpec((AlgorithmGrid("kmeans", ({},), ("inertia", "silhouette")),))
        t = make_table(g, {"kmeans": [[3, 5]]})
        assert expected_value_baseline([t], 3) == pytest.approx(50.0)

    def test_perfect(self):
        t = make_table(small_grid(), {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        assert expected_value_baseline([t, t], 3) == pytest.approx(100.0)

    def test_equals_mean_combination_accuracy(self):
        g = small_grid()
        tables = [
            make_table(g, {"kmeans": [[3, 2], [3, 4]], "hca": [[2, 3, 3]]}, "a"),
            make_table(g, {"kmeans": [[3, 3], [2, 4]], "hca": [[3, 3, 2]]}, "b"),
        ]
        acc = combination_accuracy(tables, [3, 3])
        assert expected_value_baseline(tables, [3, 3]) == pytest.approx(100 * np.mean(list(acc.values())))


class TestConsensusMatrix:
    @settings(max_examples=50, deadline=None)
    @given(st.integers(5, 30), st.integers(2, 6), st.integers(0, 2**32 - 1))
    def test_symmetric_in_unit_interval(self, n, runs, seed):
        r = np.random.default_rng(seed)
        samples = [np.sort(r.choice(n, size=r.integers(2, n + 1), replace=False)) for _ in range(runs)]
        labelings = [r.integers(0, 3, size=s.size) for s in samples]
        C = consensus_matrix(n, samples, labelings)
        np.testing.assert_array_equal(C, C.T)
        assert C.min() >= 0 and C.max() <= 1
        sampled = np.unique(np.concatenate(samples))
        np.testing.assert_array_equal(np.diag(C)[sampled], 1.0)

    def test_two_identical_resamples(self):
        idx = np.array([0, 1, 2, 4])
        lab = np.array([0, 0, 1, 1])
        C = consensus_matrix(5, [idx, idx], [lab, lab])
        assert set(np.unique(C[np.ix_(idx, idx)])) <= {0.0, 1.0}
        assert np.all(C[3] == 0)

    def test_hand_counts(self):
        C = consensus_matrix(3, [np.array([0, 1]), np.array([0, 1, 2])], [[0, 0], [0, 1, 1]])
        assert C[0, 1] == 0.5 and C[1, 2] == 1.0 and C[0, 2] == 0.0


class TestArea:
    def test_binary_matrix(self):
        C = np.zeros((4, 4))
        C[0, 1] = C[1, 0] = 1.0
        # 5 of 6 pairs are 0: CDF is 5/6 on [0, 1) and 1 at 1
        grid = np.linspace(0, 1, 100)
        assert cdf_area(C) == pytest.approx(5 / 6 + (1 - 5 / 6) * (grid[1] - grid[0]) / 2)

    def test_deltas(self):
        d = area_deltas([0.5, 0.6, 0.55, 0.9])
        np.testing.assert_allclose(d, [0.5, 0.2, 0.0, 0.5])
        assert np.all(d >= 0)


class TestConsensusCount:
    def test_two_blobs_defaults(self, two_blobs):
        assert consensus_cluster_count(two_blobs, ConsensusConfig(n_resamples=10)) == 2

    def test_two_blobs_short_range(self, two_blobs):
        res = consensus_curve(two_blobs, ConsensusConfig(k_range=(2, 5), n_resamples=10))
        assert res.k == 2 and res.k_values == [2, 3, 4, 5]

    def test_deterministic(self, small_blobs):
        cfg = ConsensusConfig(algorithm="gmm", k_range=(2, 4), n_resamples=3, seed=5)
        assert consensus_curve(small_blobs, cfg) == consensus_curve(small_blobs, cfg)

    @pytest.mark.parametrize("kwargs", [
        {"n_resamples": 1}, {"subsample_fraction": 1.0}, {"subsample_fraction": 0.0}, {"k_range": (1, 4)},
    ])
    def test_invalid_config(self, kwargs):
        with pytest.raises(ValueError):
            ConsensusConfig(**kwargs)

    def test_range_exceeds_resample(self):
        with pytest.raises(ValueError):
            consensus_cluster_count(np.zeros((10, 2)), ConsensusConfig(k_range=(2, 9)))
