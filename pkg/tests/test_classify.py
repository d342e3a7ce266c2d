import numpy as np
import pytest

from sosda import (DataError, Dataset, ProjectedData, SosFitConfig, evaluate,
                   fit_centroids, fit_sos, predict, project)
from sosda.sos import SosModel


def toy_model(B, means, centroids, vocab, scales=None):
    B = np.asarray(B, dtype=float)
    return SosModel(B, np.zeros((len(vocab), B.shape[1])), np.asarray(means, float),
                    None if scales is None else np.asarray(scales, float),
                    np.asarray(centroids, float), list(vocab),
                    SosFitConfig(lam=0.1), {})


def test_project_training_mean_maps_to_origin():
    model = toy_model(np.eye(2), [3.0, -1.0], np.zeros((2, 2)), ["a", "b"])
    out = project(model, np.array([[3.0, -1.0]]))
    assert np.array_equal(out.Z, np.zeros((1, 2)))


def test_project_zero_discriminants():
    model = toy_model(np.zeros((3, 2)), np.zeros(3), np.zeros((2, 2)), ["a", "b"])
    out = project(model, np.arange(6.0).reshape(2, 3))
    assert np.array_equal(out.Z, np.zeros((2, 2)))


def test_project_identity_sanity():
    model = toy_model(np.eye(3), np.zeros(3), np.zeros((2, 3)), ["a", "b"])
    raw = np.arange(12.0).reshape(4, 3)
    assert np.array_equal(project(model, raw).Z, raw)


def test_project_dimension_mismatch():
    model = toy_model(np.eye(2), np.zeros(2), np.zeros((2, 2)), ["a", "b"])
    with pytest.raises(DataError):
        project(model, np.zeros((1, 3)))


def test_centroids():
    Z = np.array([[1.0, 0.0], [3.0, 2.0], [-1.0, -1.0]])
    got = fit_centroids(ProjectedData(Z, ["a", "a", "b"]), ["a", "b"])
    assert np.array_equal(got, [[2.0, 1.0], [-1.0, -1.0]])
    # single point per class: centroid is the point
    got = fit_centroids(ProjectedData(Z[:2], ["a", "b"]), ["a", "b"])
    assert np.array_equal(got, Z[:2])
    # permutation invariance
    perm = ProjectedData(Z[[2, 0, 1]], ["b", "a", "a"])
    assert np.array_equal(fit_centroids(perm, ["a", "b"]), [[2.0, 1.0], [-1.0, -1.0]])
    with pytest.raises(DataError, match="no observations"):
        fit_centroids(ProjectedData(Z, ["a", "a", "a"]), ["a", "b"])


def test_predict_centroid_and_tie_rule():
    model = toy_model(np.eye(2), np.zeros(2),
                      [[1.0, 0.0], [-1.0, 0.0]], ["one", "two"])
    labels, scores = predict(model, np.array([[1.0, 0.0], [0.0, 5.0]]))
    assert labels[0] == "one"
    assert scores[0, 0] == 0.0
    # equidistant point: earliest vocab entry wins
    assert labels[1] == "one"
    assert scores[1, 0] == scores[1, 1]


def test_predict_matches_brute_force():
    rng = np.random.default_rng(0)
    rows, labels = [], []
    for i, mu in enumerate(([6.0, 0.0], [-6.0, 1.0], [0.0, -7.0])):
        rows.append(rng.standard_normal((8, 2)) + mu)
        labels += [i] * 8
    ds = Dataset.from_labels(np.vstack(rows), labels)
    model = fit_sos(ds, SosFitConfig(lam=1e-3, q=2))
    pred, scores = predict(model, ds.features)
    Z = project(model, ds.features).Z
    for i in range(ds.n):
        dists = [np.linalg.norm(Z[i] - model.centroids[k]) for k in range(3)]
        assert pred[i] == model.label_vocab[int(np.argmin(dists))]
        assert np.allclose(scores[i], dists)


def test_predict_invariant_under_joint_column_negation():
    rng = np.random.default_rng(1)
    rows = [rng.standard_normal((6, 3)) + 3, rng.standard_normal((6, 3)) - 3]
    ds = Dataset.from_labels(np.vstack(rows), ["a"] * 6 + ["b"] * 6)
    model = fit_sos(ds, SosFitConfig(lam=1e-3, q=1))
    flipped = SosModel(-model.B, -model.Theta, model.column_means,
                       model.column_scales, -model.centroids, model.label_vocab,
                       model.config, model.diagnostics)
    a, sa = predict(model, ds.features)
    b, sb = predict(flipped, ds.features)
    assert a == b
    assert np.allclose(sa, sb)


def test_evaluate_metrics():
    B = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, -2.0]])
    m = evaluate(["a", "b"], ["a", "b"], B, time_seconds=1.5)
    assert m == {"numErr": 0, "fracErr": 0.0, "feats": 2,
                 "fracFeats": 2 / 3, "time": 1.5}
    m = evaluate(["a", "b", "b"], ["a", "a", "b"], B)
    assert m["numErr"] == 1 and m["fracErr"] == pytest.approx(1 / 3)
    assert set(m) == {"numErr", "fracErr", "feats", "fracFeats", "time"}
    with pytest.raises(DataError):
        evaluate(["a"], ["a", "b"], B)


def test_evaluate_threshold_guards_float_dust():
    B = np.array([[1e-13], [1e-11]])
    assert evaluate([], [], B)["feats"] == 1
