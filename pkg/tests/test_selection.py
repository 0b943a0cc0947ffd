import pytest

from ensemble_k.ensemble import EnsembleError
from ensemble_k.grid import AlgorithmGrid, GridSpec
from ensemble_k.selection import rank_by_accuracy, rank_by_stability, rankings_csv, top_combinations

from helpers import make_table, small_grid


@pytest.fixture
def grid4():
    return GridSpec((
        AlgorithmGrid("kmeans", ({"init": "k-means++"}, {"init": "random"}),
                      ("aic", "bic", "inertia", "silhouette")),
    ), (2, 10))


class TestStability:
    def test_unanimous_metrics(self, grid4):
        t = make_table(grid4, {"kmeans": [[3, 3, 3, 3], [3, 4, 2, 3]]})
        ranking = rank_by_stability(t, 3)
        assert [(c.hyper_index, c.score, c.rank) for c in ranking] == [(0, 1.0, 1), (1, 0.5, 2)]
        assert all(c.metric_index is None for c in ranking)

    def test_no_agreement(self, grid4):
        t = make_table(grid4, {"kmeans": [[2, 2, 2, 2], [4, 4, 4, 4]]})
        assert {c.score for c in rank_by_stability(t, 3)} == {0.0}

    def test_ties_share_rank(self, grid4):
        t = make_table(grid4, {"kmeans": [[3, 3, 2, 2], [2, 2, 3, 3]]})
        ranking = rank_by_stability(t, 3)
        assert [c.rank for c in ranking] == [1, 1]
        assert len(top_combinations(ranking)) == 2


class TestAccuracy:
    def test_perfect_combination_first(self):
        g = small_grid()
        tables = [
            make_table(g, {"kmeans": [[3, 2], [3, 4]], "hca": [[2, 3, 3]]}, "a"),
            make_table(g, {"kmeans": [[3, 3], [2, 4]], "hca": [[3, 3, 2]]}, "b"),
        ]
        ranking = rank_by_accuracy(tables, 3)
        first = ranking[0]
        assert (first.algorithm, first.hyper_index, first.metric, first.score, first.rank) == (
            "kmeans", 0, "inertia", 1.0, 1)
        assert [c.rank for c in ranking] == sorted(c.rank for c in ranking)
        # ranks are dense and contiguous
        assert sorted({c.rank for c in ranking}) == list(range(1, max(c.rank for c in ranking) + 1))

    def test_single_table_binary_scores(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 2], [3, 4]], "hca": [[2, 3, 3]]})
        assert {c.score for c in rank_by_accuracy([t], 3)} <= {0.0, 1.0}

    def test_canonical_order_within_ties(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        keys = [(c.algorithm, c.hyper_index, c.metric_index) for c in rank_by_accuracy([t], 3)]
        assert keys == [("kmeans", 0, 0), ("kmeans", 0, 1), ("kmeans", 1, 0), ("kmeans", 1, 1),
                        ("hca", 0, 0), ("hca", 0, 1), ("hca", 0, 2)]

    def test_errors(self):
        with pytest.raises(EnsembleError):
            rank_by_accuracy([], 3)
        t = make_table(small_grid(), {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        with pytest.raises(EnsembleError):
            rank_by_accuracy([t], 11)


def test_csv_format(grid4):
    t = make_table(grid4, {"kmeans": [[3, 3, 3, 3], [3, 4, 2, 3]]})
    lines = rankings_csv(rank_by_accuracy([t], 3)).splitlines()
    assert lines[0] == "algorithm,hyperparameters,metric,score,rank"
    assert lines[1] == "kmeans,init=k-means++,aic,1.0000,1"
