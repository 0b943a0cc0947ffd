import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ensemble_k.dataset import BlobSpec, generate_blobs
from ensemble_k.ensemble import (
    CellResult,
    EnsembleError,
    EnsembleMatrix,
    ResultTable,
    accuracy_stats,
    all_votes,
    assemble_table,
    collapse_mode,
    evaluate_grid,
    full_counts,
    raw_ensemble,
    smallest_mode,
    vote_column_first,
    vote_full,
    vote_matrix,
    vote_row_first,
)
from ensemble_k.grid import AlgorithmGrid, GridSpec, default_grid
from ensemble_k.metrics import CurveOptions

from helpers import brute_votes, make_table, small_grid

TOY = [[2, 2, 2, 2], [2, 2, 2, 2], [3, 2, 3, 3], [3, 3, 2, 3], [3, 3, 3, 2]]

columns_st = st.lists(
    st.lists(st.integers(2, 6), min_size=1, max_size=6), min_size=1, max_size=4
)


def ens(*cols):
    return EnsembleMatrix.from_columns(list(cols))


class TestToyMatrix:
    def test_full(self):
        assert vote_matrix(TOY, "full") == 2

    def test_column_first(self):
        assert [smallest_mode(c) for c in np.array(TOY).T.tolist()] == [3, 2, 2, 2]
        assert vote_matrix(TOY, "col") == 2

    def test_row_first(self):
        assert [smallest_mode(r) for r in TOY] == [2, 2, 3, 3, 3]
        assert vote_matrix(TOY, "row") == 3

    def test_bad_matrix(self):
        with pytest.raises(EnsembleError):
            vote_matrix([], "full")
        with pytest.raises(EnsembleError):
            vote_matrix(TOY, "diagonal")


class TestVotes:
    def test_unanimous(self):
        e = ens([3, 3], [3], [3, 3, 3])
        assert vote_full(e) == vote_row_first(e) == vote_column_first(e) == 3

    def test_full_counts_cross_product(self):
        e = ens([2, 3], [3])
        assert full_counts(e) == {2: 1, 3: 3}
        assert vote_full(e) == 3

    def test_column_modes_tie(self):
        assert vote_column_first(ens([3], [3], [2], [2])) == 2

    def test_single_column(self):
        assert vote_column_first(ens([4, 4, 5])) == 4

    @settings(max_examples=500, deadline=None)
    @given(columns_st)
    def test_match_brute_force(self, cols):
        full, row, col = brute_votes(cols)
        e = ens(*cols)
        assert (vote_full(e), vote_row_first(e), vote_column_first(e)) == (full, row, col)

    @settings(max_examples=200, deadline=None)
    @given(columns_st, st.randoms(use_true_random=False))
    def test_permutation_invariance(self, cols, rnd):
        e = ens(*cols)
        shuffled = [rnd.sample(c, len(c)) for c in cols]
        rnd.shuffle(shuffled)
        p = ens(*shuffled)
        assert (vote_full(e), vote_row_first(e), vote_column_first(e)) == (
            vote_full(p), vote_row_first(p), vote_column_first(p))

    @settings(max_examples=200, deadline=None)
    @given(columns_st, st.integers(2, 3))
    def test_multiplicity_scaling(self, cols, s):
        e, big = ens(*cols), ens(*[c * s for c in cols])
        assert (vote_full(e), vote_row_first(e), vote_column_first(e)) == (
            vote_full(big), vote_row_first(big), vote_column_first(big))

    @settings(max_examples=200, deadline=None)
    @given(columns_st)
    def test_result_is_present(self, cols):
        values = {v for c in cols for v in c}
        e = ens(*cols)
        assert {vote_full(e), vote_row_first(e), vote_column_first(e)} <= values


class TestConstruction:
    def test_mode_collapse(self):
        grid = GridSpec((AlgorithmGrid("kmeans", ({"init": "random"}, {"init": "k-means++"}),
                                       ("aic", "bic", "inertia", "silhouette")),))
        t = make_table(grid, {"kmeans": [[3, 3, 2, 4], [2, 2, 3, 3]]})
        assert collapse_mode(t).column("kmeans") == (3, 2)
        assert raw_ensemble(t).sizes == (8,)

    def test_default_grid_column_sizes(self):
        g = default_grid()
        guesses = {a.name: np.full((len(a.hypers), len(a.metrics)), 3) for a in g.algorithms}
        t = make_table(g, guesses)
        assert collapse_mode(t).sizes == (16, 18, 4, 18)
        assert raw_ensemble(t).sizes == (64, 72, 16, 36)
        assert set(all_votes(t).values()) == {3}

    def test_failed_cells_excluded(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[2, 2, 2]]})
        cells = list(t.cells)
        cells[0] = CellResult("kmeans", 0, 0, "inertia", None, None, "failed", "boom")
        t2 = ResultTable("t", g, tuple(cells))
        assert raw_ensemble(t2).column("kmeans") == (3, 3, 3)

    def test_failed_column_dropped(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[2, 2, 2]]})
        cells = [c if c.algorithm != "hca" else CellResult(c.algorithm, c.hyper_index, c.metric_index,
                                                            c.metric, None, None, "failed", "x")
                 for c in t.cells]
        e = raw_ensemble(ResultTable("t", g, tuple(cells)))
        assert [name for name, _ in e.columns] == ["kmeans"]


class TestTable:
    def test_cell_count_identity(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[2, 2, 2]]})
        assert len(t.cells) == 2 * 2 + 1 * 3 == g.n_cells

    def test_duplicate_cells(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[2, 2, 2]]})
        with pytest.raises(EnsembleError):
            ResultTable("t", g, t.cells + t.cells[:1])

    def test_too_many_failures(self):
        g = small_grid()
        outcomes = [{"inertia": (None, None, "x"), "silhouette": (None, None, "x")}] * 2
        outcomes += [{"max_diff": (3, None, ""), "inertia": (3, None, ""), "elbow": (3, None, "")}]
        with pytest.raises(EnsembleError):
            assemble_table("t", g, outcomes)


@pytest.fixture(scope="module")
def grid():
    return GridSpec((
        AlgorithmGrid("kmeans", ({"init": "k-means++"},), ("aic", "inertia")),
        AlgorithmGrid("gmm", ({"covariance_type": "diag"},), ("bic",)),
        AlgorithmGrid("hca", ({"method": "ward"},), ("max_diff", "silhouette")),
        AlgorithmGrid("spectral", ({"affinity": "rbf"},), ("inertia",)),
    ), (2, 6), 3)


@pytest.fixture(scope="module")
def data():
    return generate_blobs(BlobSpec(n_samples=300, center_box=(-20, 20), cluster_std=0.6, seed=1))


class TestEvaluateGrid:
    def test_shape_and_determinism(self, grid, data):
        opts = CurveOptions(hca_cap=200, spectral_cap=200)
        a = evaluate_grid(data, grid, opts)
        b = evaluate_grid(data, grid, opts, workers=2)
        assert len(a.cells) == grid.n_cells == 6
        assert a.cells == b.cells
        assert all(2 <= c.guessed_k <= 6 for c in a.cells)

    def test_singleton_grid(self, data):
        g = GridSpec((AlgorithmGrid("kmeans", ({},), ("inertia",)),), (2, 5))
        assert len(evaluate_grid(data, g).cells) == 1

    def test_failed_cell_recorded(self, data):
        g = GridSpec((
            AlgorithmGrid("kmeans", ({},), ("inertia", "silhouette")),
            AlgorithmGrid("spectral", ({"affinity": "precomputed", "n_neighbors": 100},), ("inertia",)),
        ), (2, 4))
        t = evaluate_grid(data, g, CurveOptions(spectral_cap=50))
        assert [c.status for c in t.failed] == ["failed"]
        assert "n_neighbors" in t.failed[0].reason


class TestAccuracyStats:
    def test_perfect(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        rows = accuracy_stats([t, t], 3)
        assert all(r.mean == 100 and r.std == 0 for r in rows)

    def test_single_dataset(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 2], [2, 2]], "hca": [[2, 2, 2]]})
        rows = {r.group: r for r in accuracy_stats([t], 3, "algorithm+hyper")}
        assert rows[("kmeans", 0)].max == 100 and rows[("kmeans", 0)].min == 0
        assert rows[("kmeans", 1)].mean == 0

    def test_groupings(self):
        g = small_grid()
        t = make_table(g, {"kmeans": [[3, 2], [3, 3]], "hca": [[2, 3, 3]]})
        by_metric = {r.group: r for r in accuracy_stats([t], 3, "algorithm+metric")}
        assert by_metric[("kmeans", "inertia")].mean == 100
        assert by_metric[("kmeans", "silhouette")].mean == 50
        assert by_metric[("kmeans", "silhouette")].std == pytest.approx(np.std([0, 100], ddof=1))
        modes = {r.group: r for r in accuracy_stats([t], 3, "algorithm+mode")}
        # selection 0 ties 2/3 and collapses to 2
        assert modes[("kmeans",)].mean == 50

    def test_mismatched_grids(self):
        a = make_table(small_grid(), {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        g2 = GridSpec((AlgorithmGrid("kmeans", ({},), ("inertia",)),))
        b = make_table(g2, {"kmeans": [[3]]})
        with pytest.raises(EnsembleError):
            accuracy_stats([a, b], 3)

    def test_master_seed_does_not_split_grids(self):
        a = make_table(small_grid(0), {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        b = make_table(small_grid(9), {"kmeans": [[3, 3], [3, 3]], "hca": [[3, 3, 3]]})
        assert accuracy_stats([a, b], 3)[0].mean == 100
