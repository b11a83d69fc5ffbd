import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from astute.datasets import (
    Dataset,
    DatasetFormatError,
    eligible_pairs,
    gen_digits,
    gen_xor,
    load_iris,
    load_mnist,
    median_pairwise_distance,
    train_eval_split,
    write_idx_images,
    write_idx_labels,
    xor_label,
)


def dataset_from_points(points, name="points"):
    points = np.asarray(points, dtype=np.float64)
    return Dataset(name, points, np.zeros(len(points), dtype=np.int64), num_classes=1)


class TestGenXor:
    def test_sign_rule_opposite_signs(self):
        assert xor_label((0.5, -0.5)) == 1

    def test_sign_rule_same_signs(self):
        assert xor_label((0.5, 0.5)) == 0

    def test_noise_free_points_obey_sign_rule(self):
        ds = gen_xor(200, noise_sd=0.0, seed=3)
        for point, label in zip(ds.X, ds.labels):
            assert xor_label(point) == label

    def test_same_seed_bit_identical(self):
        a = gen_xor(64, noise_sd=0.1, seed=42)
        b = gen_xor(64, noise_sd=0.1, seed=42)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.labels, b.labels)

    def test_too_few_points_rejected(self):
        with pytest.raises(ValueError):
            gen_xor(3)


class TestLoadIris:
    def test_bundled_shape(self):
        ds = load_iris()
        assert ds.n == 150 and ds.dim == 4 and ds.num_classes == 3
        assert np.all(np.bincount(ds.labels) == 50)
        assert ds.standardized

    def test_standardization(self):
        ds = load_iris()
        np.testing.assert_allclose(ds.X.mean(axis=0), 0.0, atol=1e-12)
        np.testing.assert_allclose(ds.X.std(axis=0), 1.0, atol=1e-12)

    def test_two_feature_selection(self):
        ds = load_iris(features=("sepal_length", "sepal_width"))
        assert ds.dim == 2
        assert ds.feature_names == ("sepal_length", "sepal_width")

    def test_unknown_feature_rejected(self):
        with pytest.raises(ValueError, match="unknown iris features"):
            load_iris(features=("petal_girth",))

    def test_missing_file_names_path(self):
        with pytest.raises(OSError, match="no_such_iris.csv"):
            load_iris("/tmp/no_such_iris.csv")

    def test_malformed_row_names_line(self, tmp_path):
        f = tmp_path / "bad.csv"
        f.write_text("5.1,3.5,1.4,0.2,setosa\n5.0,oops,1.3,0.2,setosa\n")
        with pytest.raises(DatasetFormatError, match="line 2"):
            load_iris(f)

    def test_headerless_file_accepted(self, tmp_path):
        f = tmp_path / "plain.csv"
        f.write_text("1,2,3,4,a\n5,6,7,8,b\n")
        ds = load_iris(f, standardize=False)
        assert ds.n == 2 and ds.num_classes == 2
        assert ds.labels.tolist() == [0, 1]  # alphabetical class mapping


class TestMnistIdx:
    @pytest.fixture()
    def idx_files(self, tmp_path):
        images, labels = gen_digits(40, seed=1)
        ipath = write_idx_images(tmp_path / "images.idx3-ubyte", images)
        lpath = write_idx_labels(tmp_path / "labels.idx1-ubyte", labels)
        return ipath, lpath, images, labels

    def test_roundtrip_full_resolution(self, idx_files):
        ipath, lpath, images, labels = idx_files
        ds = load_mnist(ipath, lpath, limit=40, downsample=1)
        assert ds.n == 40 and ds.dim == 784
        np.testing.assert_array_equal(ds.labels, labels)
        np.testing.assert_allclose(
            ds.X, images.reshape(40, -1).astype(float) / 255.0, atol=0
        )

    def test_downsample_halves_dims(self, idx_files):
        ipath, lpath, _, _ = idx_files
        ds = load_mnist(ipath, lpath, limit=10, downsample=2)
        assert ds.dim == 196
        assert ds.X.min() >= 0.0 and ds.X.max() <= 1.0

    def test_limit_truncation_warns(self, idx_files):
        ipath, lpath, _, _ = idx_files
        with pytest.warns(UserWarning, match="truncating"):
            ds = load_mnist(ipath, lpath, limit=999)
        assert ds.n == 40

    def test_bad_magic_rejected(self, tmp_path, idx_files):
        _, lpath, _, _ = idx_files
        bogus = tmp_path / "bogus.idx3-ubyte"
        bogus.write_bytes(b"\x00\x00\x09\x99" + b"\x00" * 12)
        with pytest.raises(DatasetFormatError, match="magic"):
            load_mnist(bogus, lpath)

    def test_count_mismatch_rejected(self, tmp_path, idx_files):
        ipath, _, _, labels = idx_files
        short = write_idx_labels(tmp_path / "short.idx1-ubyte", labels[:5])
        with pytest.raises(DatasetFormatError, match="does not match"):
            load_mnist(ipath, short, limit=5)

    def test_gzip_transparent(self, tmp_path, idx_files):
        import gzip

        ipath, lpath, _, labels = idx_files
        gz = tmp_path / "images.idx3-ubyte.gz"
        gz.write_bytes(gzip.compress(ipath.read_bytes()))
        ds = load_mnist(gz, lpath, limit=40)
        np.testing.assert_array_equal(ds.labels, labels)


class TestMedianPairwiseDistance:
    def test_two_points(self):
        ds = dataset_from_points([[0.0], [1.0]])
        assert median_pairwise_distance(ds) == 1.0

    def test_three_points_even_distance_count_uses_middle_mean(self):
        ds = dataset_from_points([[0.0], [1.0], [3.0]])
        # distances {1, 2, 3} -> median 2
        assert median_pairwise_distance(ds) == 2.0

    def test_matches_sort_all_oracle(self):
        ds = gen_xor(50, noise_sd=0.1, seed=5)
        dists = sorted(
            float(np.linalg.norm(ds.X[i] - ds.X[j]))
            for i in range(ds.n)
            for j in range(i + 1, ds.n)
        )
        expected = float(np.median(dists))
        assert median_pairwise_distance(ds) == expected

    def test_degenerate_dataset_warns(self):
        ds = dataset_from_points([[1.0, 1.0], [1.0, 1.0]])
        with pytest.warns(UserWarning, match="degenerate"):
            assert median_pairwise_distance(ds) == 0.0

    def test_invariant_under_permutation_and_translation(self):
        rng = np.random.default_rng(8)
        pts = rng.standard_normal((12, 3))
        base = median_pairwise_distance(dataset_from_points(pts))
        moved = pts[rng.permutation(12)] + np.array([5.0, -2.0, 0.5])
        assert median_pairwise_distance(dataset_from_points(moved)) == pytest.approx(
            base, rel=1e-12
        )


class TestEligiblePairs:
    def test_zero_radius_empty(self):
        ds = gen_xor(10, seed=0)
        assert len(eligible_pairs(ds, 0.0)) == 0

    def test_huge_radius_gives_all_pairs(self):
        ds = gen_xor(10, seed=0)
        ps = eligible_pairs(ds, 1e9)
        assert len(ps) == 10 * 9 // 2

    def test_matches_double_loop_oracle(self):
        ds = dataset_from_points(np.random.default_rng(2).standard_normal((5, 3)))
        r = median_pairwise_distance(ds)
        ps = eligible_pairs(ds, r)
        expected = []
        for i in range(ds.n):
            for j in range(i + 1, ds.n):
                d = float(np.linalg.norm(ds.X[i] - ds.X[j]))
                if 0 < d <= r:
                    expected.append((i, j, d))
        assert [(int(i), int(j)) for i, j in ps.pairs] == [(i, j) for i, j, _ in expected]
        np.testing.assert_allclose(ps.distances, [d for _, _, d in expected], atol=1e-12)

    def test_identical_points_excluded(self):
        ds = dataset_from_points([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])
        ps = eligible_pairs(ds, 10.0)
        assert len(ps) == 2  # the duplicate pair (0, 1) is dropped
        assert np.all(ps.distances > 0)

    @settings(max_examples=25, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.floats(min_value=0.0, max_value=1.0),
        st.floats(min_value=0.0, max_value=1.0),
    )
    def test_nested_in_radius(self, seed, f1, f2):
        ds = gen_xor(16, noise_sd=0.0, seed=seed)
        r1, r2 = sorted((3.0 * f1, 3.0 * f2))
        small = {tuple(p) for p in eligible_pairs(ds, r1).pairs}
        large = {tuple(p) for p in eligible_pairs(ds, r2).pairs}
        assert small <= large


class TestTrainEvalSplit:
    def test_split_sizes_and_disjointness(self):
        ds = gen_xor(50, seed=1)
        train, evalset = train_eval_split(ds, eval_count=15, seed=9)
        assert train.n == 35 and evalset.n == 15
        assert train.num_classes == ds.num_classes == evalset.num_classes

    def test_deterministic(self):
        ds = gen_xor(50, seed=1)
        a = train_eval_split(ds, 10, seed=4)[1]
        b = train_eval_split(ds, 10, seed=4)[1]
        np.testing.assert_array_equal(a.X, b.X)


class TestGenDigits:
    def test_shapes_and_ranges(self):
        images, labels = gen_digits(30, seed=0)
        assert images.shape == (30, 28, 28) and images.dtype == np.uint8
        assert labels.min() >= 0 and labels.max() <= 9

    def test_deterministic(self):
        a, la = gen_digits(20, seed=7)
        b, lb = gen_digits(20, seed=7)
        np.testing.assert_array_equal(a, b)
        np.testing.assert_array_equal(la, lb)
