import numpy as np
import pytest

import pyfall


def test_step_function_clusters_by_plateau():
    X, Y, plateau = pyfall.synth_step(200, 0.1, 7)
    assert X.shape == (200, 1) and Y.shape == (200, 1)
    model = pyfall.FallModel.fit(X, Y[:, 0], k=2, anchor_neighbors=50, k_pred=5)
    assert (model.n, model.d, model.m, model.k) == (200, 1, 1, 2)
    agree = np.mean(np.asarray(model.assignments) == np.asarray(plateau))
    assert max(agree, 1 - agree) >= 0.95


def test_scalar_closed_form():
    out = pyfall.local_model(np.array([2.0]), np.array([3.0]), [np.zeros((1, 1))], 1.0, with_bias=False)
    assert out["beta"] == pytest.approx(0.2)
    assert out["W"][0, 0] == pytest.approx(1.2)
    assert out["anchor"] == 0


def test_quadratic_form_matches_objective_at_vertices():
    rng = np.random.default_rng(0)
    x, y = rng.normal(size=3), rng.normal(size=2)
    anchors = [rng.normal(size=(4, 2)) for _ in range(3)]
    lam = 0.7
    H, b, c = pyfall.build_qp(x, y, anchors, lam)
    assert np.allclose(H, H.T)
    xt = np.append(x, 1.0)
    for l, A in enumerate(anchors):
        W = pyfall.local_model(x, y, [A], lam)["W"]
        direct = np.sum((y - W.T @ xt) ** 2) + lam * np.sum((W - A) ** 2)
        assert H[l, l] + b[l] + c == pytest.approx(direct, rel=1e-10)


def test_two_moons_accuracy_and_round_trip(tmp_path):
    X, Y, label = pyfall.synth_two_moons(400, 0.1, 11)
    model = pyfall.FallModel.fit(X[:300], Y[:300], k=20, k_pred=5, threads=2)
    acc = np.mean(np.asarray(model.predict_class(X[300:])) == np.asarray(label[300:]))
    assert acc >= 0.95

    path = tmp_path / "moons.fall"
    model.save(path)
    back = pyfall.FallModel.load(path)
    assert np.array_equal(back.predict(X[300:]), model.predict(X[300:]))
    assert np.array_equal(back.betas, model.betas)


def test_baselines_and_kmeans():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(50, 2))
    y = X @ np.array([1.0, -2.0]) + 0.5
    W = pyfall.ridge_fit(X, y, alpha=1e-10)
    assert np.allclose(W[:, 0], [1.0, -2.0, 0.5], atol=1e-7)
    pred = pyfall.knn_predict(np.array([[1.0], [-3.0]]), np.array([0.0, 1.0]), np.array([[0.0]]), 2, "distance")
    assert pred[0, 0] == pytest.approx(0.25)
    centers, labels, trace = pyfall.kmeans(X, 3, 0)
    assert centers.shape == (3, 2) and len(labels) == 50
    assert all(b <= a * (1 + 1e-12) for a, b in zip(trace, trace[1:]))


def test_verify_and_benchmark():
    summary = pyfall.verify(instances=20, trials=100)
    assert summary["passed"]
    X, Y, _ = pyfall.synth_step(120, 0.1, 3)
    rows = pyfall.benchmark(X, Y, ["fall", "ridge"], runs=2)
    assert [r["method"] for r in rows] == ["fall", "ridge"]
    assert rows[0]["mse_mean"] < rows[1]["mse_mean"]


def test_errors_surface_as_python_exceptions(tmp_path):
    with pytest.raises(ValueError):
        pyfall.FallModel.fit(np.zeros((5, 1)), np.zeros(5), k=2, anchor_neighbors=10)
    with pytest.raises(pyfall.DataError):
        pyfall.load_csv(tmp_path / "missing.csv", ["y"])
    bad = tmp_path / "bad.fall"
    bad.write_text("nope\n")
    with pytest.raises(pyfall.DataError):
        pyfall.FallModel.load(bad)
