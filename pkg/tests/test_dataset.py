import numpy as np
import pytest

from ensemble_k.dataset import (
    BlobSpec,
    Dataset,
    DatasetError,
    generate_blobs,
    load_csv,
    save_csv,
    split_subsets,
    subsample,
)


class TestDataset:
    def test_shape_properties(self):
        d = Dataset(np.zeros((5, 3)), np.array([0, 0, 1, 1, 2]), id="x")
        assert (d.n, d.d, d.n_labels) == (5, 3, 3)

    def test_one_dimensional_becomes_column(self):
        assert Dataset(np.arange(4.0)).points.shape == (4, 1)

    @pytest.mark.parametrize("points", [np.zeros((2, 2, 2)), np.zeros((0, 2)), np.array([[1.0, np.nan]])])
    def test_rejects_bad_points(self, points):
        with pytest.raises(DatasetError):
            Dataset(points)

    def test_rejects_label_length_mismatch(self):
        with pytest.raises(DatasetError):
            Dataset(np.zeros((3, 2)), np.array([0, 1]))

    def test_unlabelled(self):
        assert Dataset(np.zeros((3, 2))).n_labels is None


class TestBlobs:
    def test_default_spec_matches_benchmark_setup(self):
        spec = BlobSpec()
        assert (spec.n_samples, spec.n_centers, spec.n_features) == (30000, 3, 2)
        assert spec.center_box == (-5, 5)

    def test_sizes_and_labels(self):
        d = generate_blobs(BlobSpec(n_samples=301, n_centers=3, seed=1))
        assert d.n == 301 and d.d == 2
        np.testing.assert_array_equal(np.bincount(d.labels), [101, 100, 100])

    def test_deterministic(self):
        a = generate_blobs(BlobSpec(n_samples=50, seed=9))
        b = generate_blobs(BlobSpec(n_samples=50, seed=9))
        np.testing.assert_array_equal(a.points, b.points)
        assert a.id == "blobs-9"

    def test_seeds_differ(self):
        a = generate_blobs(BlobSpec(n_samples=50, seed=1))
        b = generate_blobs(BlobSpec(n_samples=50, seed=2))
        assert not np.allclose(a.points, b.points)

    def test_cluster_means_near_centers(self):
        d = generate_blobs(BlobSpec(n_samples=30000, seed=4, cluster_std=1.0))
        for c in range(3):
            members = d.points[d.labels == c]
            assert np.all(np.abs(members.mean(axis=0)) < 5.1)
            np.testing.assert_allclose(members.std(axis=0), 1.0, atol=0.05)

    @pytest.mark.parametrize("kwargs", [
        {"n_samples": 2, "n_centers": 3},
        {"n_centers": 0},
        {"n_features": 0},
        {"center_box": (5, -5)},
        {"cluster_std": 0.0},
    ])
    def test_invalid_spec(self, kwargs):
        with pytest.raises(DatasetError):
            generate_blobs(BlobSpec(**kwargs))


class TestSplitting:
    def test_partition(self, small_blobs):
        parts = split_subsets(small_blobs, 7, seed=2)
        assert len(parts) == 7
        assert sum(p.n for p in parts) == small_blobs.n
        sizes = [p.n for p in parts]
        assert max(sizes) - min(sizes) <= 1
        rows = np.vstack([p.points for p in parts])
        assert np.unique(rows, axis=0).shape[0] == small_blobs.n

    def test_ids(self, small_blobs):
        parts = split_subsets(small_blobs, 12, seed=0)
        assert parts[0].id == f"{small_blobs.id}/s00"
        assert parts[11].id == f"{small_blobs.id}/s11"

    def test_too_many_subsets(self, small_blobs):
        with pytest.raises(DatasetError):
            split_subsets(small_blobs, small_blobs.n + 1, seed=0)

    def test_subsample_cap(self, small_blobs):
        s = subsample(small_blobs, 100, seed=5)
        assert s.n == 100
        assert subsample(small_blobs, 100, seed=5).points.tobytes() == s.points.tobytes()
        assert subsample(small_blobs, 1000, seed=5) is small_blobs


def test_csv_round_trip(tmp_path, small_blobs):
    p = tmp_path / "d.csv"
    save_csv(small_blobs, p)
    back = load_csv(p)
    np.testing.assert_array_equal(back.points, small_blobs.points)
    np.testing.assert_array_equal(back.labels, small_blobs.labels)
    assert back.id == "d"
    assert p.read_text().splitlines()[0] == "f0,f1,label"


def test_csv_without_labels(tmp_path):
    p = tmp_path / "u.csv"
    p.write_text("f0,f1\n1.5,2\n3,4\n")
    d = load_csv(p)
    assert d.labels is None and d.n == 2


def test_csv_malformed(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("f0,f1\n1,abc\n")
    with pytest.raises(DatasetError):
        load_csv(p)
