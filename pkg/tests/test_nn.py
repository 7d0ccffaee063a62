import numpy as np
import pytest

from ucbenders.nn import (
    Classifier,
    MlpModel,
    NnError,
    Regressor,
    Scaler,
    calibrate_alpha_eta,
    f_score,
    load_checkpoint,
    numeric_gradient,
    predict_alpha,
    save_checkpoint,
)
from ucbenders.scenarios import ScenarioSet


def _flat_analytic(model, X, Y, class_weights=None):
    _, grads = model.loss_and_grad(X, Y, class_weights)
    return np.concatenate([grads[k].ravel() for k in ("W1", "b1", "W2", "b2")])


@pytest.mark.parametrize("output,weights", [
    ("identity", None),
    ("logistic", None),
    ("logistic", (0.7, 1.8)),
])
def test_gradient_check(output, weights):
    rng = np.random.default_rng(1)
    model = MlpModel(4, 6, 2 if output == "identity" else 1, output=output, seed=1)
    X = rng.normal(size=(12, 4))
    if output == "identity":
        Y = rng.normal(size=(12, 2))
    else:
        Y = rng.integers(0, 2, size=(12, 1)).astype(float)
    for trial in range(10):
        # keep hidden pre-activations away from the ReLU kink, where a
        # central difference straddles the non-differentiable point
        while True:
            model.set_flat_params(rng.normal(scale=0.5, size=model.flat_params().size))
            pre = X @ model.params["W1"].T + model.params["b1"]
            if np.abs(pre).min() > 1e-4:
                break
        a = _flat_analytic(model, X, Y, weights)
        n = numeric_gradient(model, X, Y, weights)
        # denominator floored so near-zero gradients are judged absolutely
        rel = np.abs(a - n) / np.maximum(1e-4, np.abs(a) + np.abs(n))
        assert rel.max() <= 1e-4


def test_scaler_round_trip():
    rng = np.random.default_rng(0)
    data = rng.uniform(-3, 7, size=(40, 5))
    sc = Scaler.fit(data)
    z = sc.transform(data)
    assert z.min() >= 0.0 and z.max() <= 1.0
    assert np.allclose(sc.inverse(z), data)


def test_scaler_degenerate_column():
    data = np.column_stack([np.full(10, 4.0), np.arange(10.0)])
    sc = Scaler.fit(data)
    z = sc.transform(data)
    assert np.allclose(z[:, 0], 0.0)  # constant column maps to zero


def test_regression_learns_linear_map():
    rng = np.random.default_rng(2)
    X = rng.uniform(-1, 1, size=(400, 1))
    Y = 2.0 * X
    model = MlpModel(1, 16, 1, output="identity", seed=2)
    model.train(X, Y, epochs=400, batch_size=64, lr=5e-3, seed=2)
    pred = model.forward(X)
    assert float(((pred - Y) ** 2).mean()) <= 1e-3


def test_classifier_separable():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(300, 2))
    y = (X[:, 0] + X[:, 1] > 0).astype(float).reshape(-1, 1)
    model = MlpModel(2, 8, 1, output="logistic", seed=3)
    model.train(X, y, epochs=300, batch_size=64, lr=1e-2, seed=3)
    pred = model.forward(X)[:, 0] >= 0.5
    assert f_score(y.ravel(), pred) >= 0.98


def test_training_determinism():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 3))
    Y = rng.normal(size=(50, 1))
    runs = []
    for _ in range(2):
        m = MlpModel(3, 5, 1, seed=7)
        m.train(X, Y, epochs=20, batch_size=16, seed=7)
        runs.append(m.flat_params())
    assert np.array_equal(runs[0], runs[1])


def test_f_score_values():
    assert f_score([1, 1, 0, 0], [1, 1, 0, 0]) == 1.0
    assert f_score([1, 0], [0, 1]) == 0.0
    assert f_score([1, 1, 0, 0], [1, 0, 1, 0]) == pytest.approx(0.5)


def test_calibrate_alpha_eta():
    y = np.array([100.0, 200.0, 300.0])
    assert calibrate_alpha_eta(y, y * 0.95) == 1.0  # only under-prediction
    eta = calibrate_alpha_eta(y, y * 1.10)
    assert eta == pytest.approx(0.90, abs=1e-6)
    assert 0.0 <= calibrate_alpha_eta(y, y * 5.0) <= 1.0


def test_predict_alpha_floors():
    n, T = 2, 3
    model = MlpModel(n * T, 4, n, output="identity", seed=0)
    feats_scaler = Scaler(np.zeros(n * T), np.ones(n * T))
    out_scaler = Scaler(np.zeros(n), np.ones(n))
    reg = Regressor(model, feats_scaler, out_scaler, alpha_eta=0.8)
    demands = [np.full((2, T), 0.1), np.full((2, T), 0.2)]
    scen = ScenarioSet(demands, np.array([0.5, 0.5]))
    full = predict_alpha(reg, scen, alpha_eta=1.0)
    scaled = predict_alpha(reg, scen)  # calibrated 0.8
    assert np.allclose(scaled, 0.8 * full)
    with pytest.raises(NnError):
        predict_alpha(reg, scen, alpha_eta=1.5)


def test_checkpoint_round_trip(tmp_path):
    rng = np.random.default_rng(5)
    model = MlpModel(3, 4, 2, output="identity", seed=5)
    reg = Regressor(model, Scaler(np.zeros(3), np.ones(3)),
                    Scaler(np.zeros(2), np.ones(2)), alpha_eta=0.9)
    path = tmp_path / "reg.json"
    save_checkpoint(reg, path, "regressor")
    again = load_checkpoint(path)
    X = rng.normal(size=(5, 3))
    assert np.allclose(reg.predict(X), again.predict(X))
    assert again.alpha_eta == pytest.approx(0.9)

    clf = Classifier(MlpModel(3, 4, 1, output="logistic", seed=6),
                     Scaler(np.zeros(3), np.ones(3)), threshold=0.4)
    cpath = tmp_path / "clf.json"
    save_checkpoint(clf, cpath, "classifier")
    clf2 = load_checkpoint(cpath)
    assert np.allclose(clf.probabilities(X), clf2.probabilities(X))
    assert clf2.threshold == pytest.approx(0.4)


def test_bad_output_activation():
    with pytest.raises(NnError):
        MlpModel(2, 2, 1, output="tanh")


def test_empty_scaler_rejected():
    with pytest.raises(NnError):
        Scaler.fit(np.empty((0, 3)))
