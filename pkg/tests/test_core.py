import numpy as np
import pytest

from sosda import (DataError, Dataset, build_indicator, center_data)


def test_center_two_point_symmetry():
    cd = center_data(np.array([[1.0, 4.0], [3.0, 6.0]]))
    assert np.array_equal(cd.X, [[-1.0, -1.0], [1.0, 1.0]])
    assert np.array_equal(cd.column_means, [2.0, 5.0])
    assert cd.column_scales is None


def test_center_idempotent_on_centered_input():
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((7, 3))
    raw -= raw.mean(axis=0)
    cd = center_data(raw)
    assert np.allclose(cd.X, raw, atol=1e-15)
    assert np.allclose(cd.column_means, 0.0, atol=1e-15)


def test_center_zero_variance_column_errors_with_scale():
    with pytest.raises(DataError, match="zero-variance column"):
        center_data(np.ones((2, 2)), scale=True)


def test_center_round_trip_with_scales():
    rng = np.random.default_rng(1)
    raw = rng.standard_normal((9, 4)) * [1.0, 2.0, 0.5, 3.0] + [1, -2, 0, 7]
    cd = center_data(raw, scale=True)
    assert np.allclose(cd.X * cd.column_scales + cd.column_means, raw)
    assert np.allclose(cd.X.sum(axis=0), 0.0,
                       atol=1e-10 * raw.shape[0] * np.abs(raw).mean())
    # sample standard deviation, ddof=1
    assert np.allclose(cd.column_scales, raw.std(axis=0, ddof=1))


def test_centered_columns_kill_constant_direction():
    rng = np.random.default_rng(2)
    cd = center_data(rng.standard_normal((12, 5)))
    for _ in range(5):
        beta = rng.standard_normal(5)
        assert abs(np.sum(cd.X @ beta)) < 1e-10


def test_indicator_basic():
    ind = build_indicator(["a", "b", "a"], ["a", "b"])
    assert np.array_equal(ind.Y, [[1, 0], [0, 1], [1, 0]])
    assert np.array_equal(ind.counts, [2, 1])
    assert np.allclose(ind.D, [2 / 3, 1 / 3])


def test_indicator_respects_vocab_order():
    ind = build_indicator(["b", "a"], ["a", "b"])
    assert np.array_equal(ind.Y, [[0, 1], [1, 0]])


def test_indicator_errors():
    with pytest.raises(DataError, match="not in label_vocab"):
        build_indicator(["a", "c"], ["a", "b"])
    with pytest.raises(DataError, match="no observations"):
        build_indicator(["a", "a"], ["a", "b"])


def test_indicator_gram_is_diagonal_counts():
    rng = np.random.default_rng(3)
    labels = list(rng.choice(["x", "y", "z"], size=30))
    labels += ["x", "y", "z"]  # every class present
    ind = build_indicator(labels, ["x", "y", "z"])
    G = ind.Y.T @ ind.Y
    assert np.array_equal(G, np.diag(ind.counts))
    assert np.array_equal(ind.Y.sum(axis=0), ind.counts)


def test_dataset_single_class_rejected():
    with pytest.raises(DataError, match="n >= K >= 2"):
        Dataset.from_labels(np.zeros((3, 2)), ["a", "a", "a"])


def test_dataset_first_appearance_vocab_and_validation():
    ds = Dataset.from_labels(np.zeros((4, 2)), ["b", "a", "b", "a"])
    assert ds.label_vocab == ["b", "a"]
    assert (ds.n, ds.p, ds.K) == (4, 2, 2)
    with pytest.raises(DataError, match="not in label_vocab"):
        Dataset(np.zeros((2, 2)), ["a", "c"], ["a", "b"])
    with pytest.raises(DataError, match="no observations"):
        Dataset(np.zeros((2, 2)), ["a", "a"], ["a", "b"])


def test_dataset_subset_keeps_vocab():
    ds = Dataset.from_labels(np.arange(8.0).reshape(4, 2), ["b", "a", "b", "a"])
    sub = ds.subset([1, 2])
    assert sub.label_vocab == ["b", "a"]
    assert sub.labels == ["a", "b"]
    assert np.array_equal(sub.features, ds.features[[1, 2]])
