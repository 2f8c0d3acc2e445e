import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from geomed.core import (
    Dataset,
    DataError,
    center,
    covariance_summary,
    read_dataset_csv,
    sample_mean,
    top_eigenvalue,
    write_dataset_csv,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
matrices = st.tuples(st.integers(1, 12), st.integers(1, 6)).flatmap(lambda s: arrays(np.float64, s, elements=finite))


class TestDataset:
    def test_shape_and_readonly(self):
        ds = Dataset([[1, 2], [3, 4], [5, 6]])
        assert (ds.k, ds.d) == (3, 2)
        with pytest.raises(ValueError):
            ds.points[0, 0] = 7.0

    def test_copies_input(self):
        arr = np.zeros((2, 2))
        ds = Dataset(arr)
        arr[0, 0] = 1.0
        assert ds.points[0, 0] == 0.0

    @pytest.mark.parametrize("bad", [[[1.0, np.nan]], [[np.inf]], np.empty((0, 3))])
    def test_rejects_invalid(self, bad):
        with pytest.raises(DataError):
            Dataset(bad)

    def test_rejects_huge_rows(self):
        with pytest.raises(DataError, match="norm"):
            Dataset([[1e101, 0.0]])


class TestSampleMean:
    @pytest.mark.parametrize(
        "pts, expected",
        [
            ([[0.0, 0.0]], [0.0, 0.0]),
            ([[1, 0], [-1, 0], [0, 1], [0, -1]], [0.0, 0.0]),
            ([[1, 2], [3, 4]], [2.0, 3.0]),
        ],
    )
    def test_examples(self, pts, expected):
        np.testing.assert_array_equal(sample_mean(Dataset(pts)), expected)


class TestCenter:
    def test_two_points(self):
        c, mu = center(Dataset([[1, 1], [3, 3]]))
        np.testing.assert_array_equal(c.points, [[-1, -1], [1, 1]])
        np.testing.assert_array_equal(mu, [2, 2])

    def test_already_centered(self, diamond):
        c, mu = center(diamond)
        np.testing.assert_array_equal(c.points, diamond.points)
        np.testing.assert_array_equal(mu, [0, 0])

    def test_one_dimensional(self):
        c, mu = center(Dataset([[5.0]]))
        np.testing.assert_array_equal(c.points, [[0.0]])
        np.testing.assert_array_equal(mu, [5.0])

    @given(matrices)
    def test_idempotent(self, pts):
        once, _ = center(Dataset(pts))
        twice, shift = center(once)
        scale = max(1.0, np.abs(pts).max())
        assert np.abs(twice.points - once.points).max() <= 1e-12 * scale
        assert np.abs(shift).max() <= 1e-12 * scale


class TestCovarianceSummary:
    def test_diamond(self, diamond):
        s = covariance_summary(diamond)
        assert s.trace == pytest.approx(1.0, rel=1e-14)
        assert s.top_eigenvalue == pytest.approx(0.5, rel=1e-12)
        assert s.tail_eigen_sum == pytest.approx(0.5, rel=1e-12)
        assert s.effective_rank == pytest.approx(2.0, rel=1e-12)

    def test_degenerate(self):
        s = covariance_summary(Dataset([[2.0, 3.0]] * 5))
        assert s.trace == 0.0
        assert s.effective_rank is None

    def test_rank_one(self):
        s = covariance_summary(Dataset([[1.0, 0.0], [-1.0, 0.0]]))
        assert s.trace == pytest.approx(1.0)
        assert s.top_eigenvalue == pytest.approx(1.0, rel=1e-12)
        assert abs(s.tail_eigen_sum) <= 1e-12

    @pytest.mark.parametrize("seed", range(20))
    def test_tail_sum_matches_full_eigensolve(self, seed):
        rng = np.random.default_rng(seed)
        k, d = rng.integers(2, 12), rng.integers(1, 7)
        pts = rng.standard_normal((k, d)) * rng.uniform(0.1, 4, size=d)
        y = pts - pts.mean(axis=0)
        lam = np.sort(np.linalg.eigvalsh(y.T @ y / k))[::-1]
        s = covariance_summary(Dataset(pts))
        assert s.tail_eigen_sum == pytest.approx(lam[1:].sum(), abs=1e-8)
        assert 1.0 - 1e-10 <= s.effective_rank <= d + 1e-10

    def test_gram_branch_matches_covariance(self):
        # k < d takes the Gram-matrix route
        rng = np.random.default_rng(3)
        pts = rng.standard_normal((5, 40))
        y = pts - pts.mean(axis=0)
        lam = np.linalg.eigvalsh(y.T @ y / 5).max()
        assert covariance_summary(Dataset(pts)).top_eigenvalue == pytest.approx(lam, rel=1e-10)

    @settings(max_examples=50)
    @given(matrices, arrays(np.float64, 6, elements=finite))
    def test_translation_invariant(self, pts, shift):
        shifted = pts + shift[: pts.shape[1]]
        a, b = covariance_summary(Dataset(pts)), covariance_summary(Dataset(shifted))
        scale = max(1.0, np.abs(shifted).max()) ** 2
        assert a.trace == pytest.approx(b.trace, rel=1e-10, abs=1e-12 * scale)
        assert a.top_eigenvalue == pytest.approx(b.top_eigenvalue, rel=1e-10, abs=1e-12 * scale)


class TestTopEigenvalue:
    @pytest.mark.parametrize(
        "mat, expected",
        [(np.eye(3), 1.0), (np.diag([3.0, 1.0]), 3.0), ([[2.0, 1.0], [1.0, 2.0]], 3.0)],
    )
    def test_examples(self, mat, expected):
        assert top_eigenvalue(mat) == pytest.approx(expected, rel=1e-10)

    def test_start_in_null_space(self):
        # the all-ones start is an eigenvector with eigenvalue 0
        q = np.array([[1.0, -1.0], [-1.0, 1.0]])
        assert top_eigenvalue(q) == pytest.approx(2.0, rel=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_rayleigh_domination(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.standard_normal((6, 6))
        q = a @ a.T
        lam = top_eigenvalue(q)
        assert lam == pytest.approx(np.linalg.eigvalsh(q).max(), rel=1e-10)
        v = rng.standard_normal((100, 6))
        rq = np.einsum("ij,jk,ik->i", v, q, v) / np.einsum("ij,ij->i", v, v)
        assert np.all(lam >= rq - 1e-10 * lam)

    def test_rejects_asymmetric(self):
        with pytest.raises(ValueError):
            top_eigenvalue([[1.0, 2.0], [0.0, 1.0]])


class TestCsv:
    def test_round_trip(self, tmp_path):
        pts = np.random.default_rng(0).standard_normal((4, 3))
        path = tmp_path / "d.csv"
        write_dataset_csv(Dataset(pts), path)
        np.testing.assert_array_equal(read_dataset_csv(path).points, pts)

    def test_header_skip(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("x,y\n1,2\n3,4\n")
        np.testing.assert_array_equal(read_dataset_csv(path, skip_header=True).points, [[1, 2], [3, 4]])

    def test_parse_error_names_location(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2\n3,oops\n")
        with pytest.raises(DataError, match="row 2, column 2"):
            read_dataset_csv(path)

    def test_ragged_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("1,2\n3\n")
        with pytest.raises(DataError, match="row 2"):
            read_dataset_csv(path)
