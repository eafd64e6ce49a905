import numpy as np
import pytest
from hypothesis import given, strategies as st

from ddbounds.phase import (
    DataSet,
    DimensionMismatchError,
    EmptyDatasetError,
    PhasePoint,
    ScalingMatrix,
    dataset_from_csv,
    dataset_to_csv,
    estimate_scaling,
    read_dataset,
    sort_canonical,
    sort_key_1d,
    sort_key_6d,
    write_dataset,
)

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)


def pp(e, s):
    return PhasePoint(np.atleast_1d(e), np.atleast_1d(s))


class TestSortKey1d:
    def test_zero_point(self):
        assert sort_key_1d(pp(0.0, 0.0)) == 0.0

    def test_345_triangle_negative(self):
        assert sort_key_1d(pp(-3.0, 4.0)) == pytest.approx(-5.0, abs=1e-14)

    def test_unit_diagonal(self):
        assert sort_key_1d(pp(1.0, 1.0)) == pytest.approx(1.41421356, abs=1e-8)

    def test_sign_zero_is_positive(self):
        assert sort_key_1d(pp(0.0, 2.0)) == 2.0

    def test_rejects_wrong_dimension(self):
        with pytest.raises(DimensionMismatchError):
            sort_key_1d(pp(np.zeros(6), np.zeros(6)))

    @given(finite, finite)
    def test_odd_under_sign_flip(self, e, s):
        if e == 0.0:
            return
        assert sort_key_1d(pp(-e, -s)) == pytest.approx(
            -sort_key_1d(pp(e, s)), rel=1e-12, abs=1e-12
        )


class TestSortKey6d:
    def test_zero(self):
        assert sort_key_6d(pp(np.zeros(6), np.zeros(6))) == 0.0

    def test_uniform(self):
        assert sort_key_6d(pp(np.full(6, 0.1), np.zeros(6))) == pytest.approx(0.6)

    def test_mixed(self):
        e = np.array([0.1, -0.1, 0.05, 0.0, 0.0, 0.0])
        assert sort_key_6d(pp(e, np.zeros(6))) == pytest.approx(0.05)

    def test_rejects_wrong_dimension(self):
        with pytest.raises(DimensionMismatchError):
            sort_key_6d(pp(1.0, 1.0))


class TestSortCanonical:
    def test_sorts_by_key(self):
        # keys are 3, 1, 2 in original order
        ds = DataSet([[3.0], [1.0], [2.0]], [[0.0], [0.0], [0.0]])
        out = sort_canonical(ds)
        assert np.allclose(out.strains[:, 0], [1.0, 2.0, 3.0])

    def test_idempotent(self):
        ds = sort_canonical(DataSet([[3.0], [1.0]], [[0.1], [0.2]]))
        again = sort_canonical(ds)
        assert np.array_equal(ds.strains, again.strains)
        assert ds.is_sorted

    def test_stable_on_ties(self):
        # both points have key 5 but different stress sign layouts
        ds = DataSet([[3.0], [3.0]], [[4.0], [-4.0]])
        out = sort_canonical(ds)
        assert out.stresses[0, 0] == 4.0 and out.stresses[1, 0] == -4.0

    def test_empty_rejected(self):
        with pytest.raises(EmptyDatasetError):
            sort_canonical(DataSet(np.zeros((0, 1)), np.zeros((0, 1))))

    @given(st.lists(st.tuples(finite, finite), min_size=1, max_size=40))
    def test_permutation_property(self, rows):
        e = np.array([[r[0]] for r in rows])
        s = np.array([[r[1]] for r in rows])
        out = sort_canonical(DataSet(e, s))
        orig = sorted(map(tuple, np.hstack([e, s]).tolist()))
        got = sorted(map(tuple, np.hstack([out.strains, out.stresses]).tolist()))
        assert orig == got
        assert np.all(np.diff(out.sort_keys) >= 0)


class TestScaling:
    def test_constant_ratio(self):
        pts = [pp(np.full(6, v), np.full(6, 2 * v)) for v in (0.5, 1.0, 2.0)]
        assert np.allclose(estimate_scaling(pts).diag, 2.0)

    def test_single_point(self):
        assert np.allclose(estimate_scaling([pp(np.ones(6), 3 * np.ones(6))]).diag, 3.0)

    def test_median_of_explicit_set(self):
        e = np.ones((3, 6))
        s = np.ones((3, 6))
        s[:, 0] = [1.0, 2.0, 100.0]  # ratios {1, 2, 100} for component 1
        ds = DataSet(e, s)
        assert estimate_scaling(ds).diag[0] == pytest.approx(2.0)

    def test_degenerate_component_falls_back_to_one(self):
        e = np.zeros((2, 6))
        e[:, 0] = 1.0
        s = np.ones((2, 6))
        d = estimate_scaling(DataSet(e, s)).diag
        assert d[0] == pytest.approx(1.0)
        assert np.allclose(d[1:], 1.0)

    def test_permutation_invariant(self):
        rng = np.random.default_rng(0)
        e = rng.normal(size=(9, 6))
        s = rng.normal(size=(9, 6)) ** 2 + 0.1
        a = estimate_scaling(DataSet(e, s)).diag
        perm = rng.permutation(9)
        b = estimate_scaling(DataSet(e[perm], s[perm])).diag
        assert np.allclose(a, b)

    def test_positive_invariant(self):
        with pytest.raises(ValueError):
            ScalingMatrix(np.array([1.0, -2.0]))


class TestTypes:
    def test_phase_point_checks(self):
        with pytest.raises(DimensionMismatchError):
            PhasePoint(np.zeros(6), np.zeros(5))
        with pytest.raises(ValueError):
            PhasePoint(np.array([np.nan]), np.array([0.0]))

    def test_dataset_checks(self):
        with pytest.raises(DimensionMismatchError):
            DataSet(np.zeros((3, 6)), np.zeros((3, 1)))
        with pytest.raises(ValueError):
            DataSet(np.array([[np.inf]]), np.array([[0.0]]))


class TestCsvRoundTrip:
    def test_round_trip_text(self):
        rng = np.random.default_rng(3)
        ds = DataSet(rng.normal(size=(17, 6)), rng.normal(size=(17, 6)), label="x")
        back = dataset_from_csv(dataset_to_csv(ds))
        assert np.array_equal(back.strains, ds.strains)
        assert np.array_equal(back.stresses, ds.stresses)

    def test_round_trip_file(self, tmp_path):
        ds = DataSet([[1.0], [2.0]], [[0.5], [0.25]])
        path = tmp_path / "d.csv"
        write_dataset(ds, path, sidecar={"label": "d", "dimension": 1, "seed": 1})
        back = read_dataset(path)
        assert np.array_equal(back.strains, ds.strains)
        assert (tmp_path / "d.json").exists()

    def test_header_format(self):
        text = dataset_to_csv(DataSet([[1.0]], [[2.0]]))
        assert text.splitlines()[0] == "e1,s1"
        ds6 = DataSet(np.zeros((1, 6)), np.zeros((1, 6)))
        assert dataset_to_csv(ds6).splitlines()[0] == (
            "e1,e2,e3,e4,e5,e6,s1,s2,s3,s4,s5,s6"
        )
