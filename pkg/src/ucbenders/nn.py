"""Minimal dense neural network: one hidden ReLU layer, mini-batch Adam.

Backs both the scenario-cost regressor (identity output, MSE loss) and the
useful-cut classifier (logistic output, class-weighted cross-entropy,
evaluated by F-score).
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np


class NnError(Exception):
    pass


@dataclass
class Scaler:
    x_min: np.ndarray
    x_max: np.ndarray

    @classmethod
    def fit(cls, data):
        data = np.asarray(data, dtype=float)
        if data.size == 0:
            raise NnError("cannot fit a scaler on empty data")
        return cls(data.min(axis=0), data.max(axis=0))

    def transform(self, x):
        x = np.asarray(x, dtype=float)
        span = self.x_max - self.x_min
        out = np.zeros_like(x, dtype=float)
        nz = span != 0
        out[..., nz] = (x[..., nz] - self.x_min[nz]) / span[nz]
        return out

    def inverse(self, x):
        x = np.asarray(x, dtype=float)
        return self.x_min + x * (self.x_max - self.x_min)

    def to_dict(self):
        return {"x_min": self.x_min.tolist(), "x_max": self.x_max.tolist()}

    @classmethod
    def from_dict(cls, d):
        return cls(np.array(d["x_min"], dtype=float), np.array(d["x_max"], dtype=float))


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


class MlpModel:
    """input -> ReLU hidden -> identity or logistic output."""

    def __init__(self, n_in, n_hidden, n_out, output="identity", seed=0):
        if output not in ("identity", "logistic"):
            raise NnError(f"unknown output activation '{output}'")
        self.dims = (n_in, n_hidden, n_out)
        self.output = output
        rng = np.random.default_rng(seed)
        s1 = np.sqrt(2.0 / n_in)
        s2 = np.sqrt(2.0 / n_hidden)
        self.params = {
            "W1": rng.normal(0.0, s1, size=(n_hidden, n_in)),
            "b1": np.zeros(n_hidden),
            "W2": rng.normal(0.0, s2, size=(n_out, n_hidden)),
            "b2": np.zeros(n_out),
        }
        self._adam_m = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._adam_v = {k: np.zeros_like(v) for k, v in self.params.items()}
        self._adam_t = 0

    def forward(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        h = np.maximum(0.0, X @ self.params["W1"].T + self.params["b1"])
        o = h @ self.params["W2"].T + self.params["b2"]
        return _sigmoid(o) if self.output == "logistic" else o

    def loss_and_grad(self, X, Y, class_weights=None):
        """Loss (MSE or weighted BCE, per output activation) and param gradients."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        N = X.shape[0]
        pre = X @ self.params["W1"].T + self.params["b1"]
        h = np.maximum(0.0, pre)
        o = h @ self.params["W2"].T + self.params["b2"]

        if self.output == "identity":
            diff = o - Y
            loss = float((diff ** 2).mean())
            d_o = 2.0 * diff / diff.size
        else:
            p = _sigmoid(o)
            w1 = w0 = 1.0
            if class_weights is not None:
                w0, w1 = class_weights
            eps = 1e-12
            loss = float(-(w1 * Y * np.log(p + eps)
                           + w0 * (1.0 - Y) * np.log(1.0 - p + eps)).mean())
            d_o = (w1 * Y * (p - 1.0) + w0 * (1.0 - Y) * p) / Y.size

        grads = {
            "W2": d_o.T @ h,
            "b2": d_o.sum(axis=0),
        }
        d_h = (d_o @ self.params["W2"]) * (pre > 0)
        grads["W1"] = d_h.T @ X
        grads["b1"] = d_h.sum(axis=0)
        if not all(np.isfinite(g).all() for g in grads.values()):
            raise NnError("non-finite gradient; check inputs and learning rate")
        return loss, grads

    def adam_step(self, grads, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self._adam_t += 1
        t = self._adam_t
        for k, g in grads.items():
            self._adam_m[k] = beta1 * self._adam_m[k] + (1 - beta1) * g
            self._adam_v[k] = beta2 * self._adam_v[k] + (1 - beta2) * g ** 2
            m_hat = self._adam_m[k] / (1 - beta1 ** t)
            v_hat = self._adam_v[k] / (1 - beta2 ** t)
            self.params[k] -= lr * m_hat / (np.sqrt(v_hat) + eps)

    def train(self, X, Y, epochs=500, batch_size=300, lr=1e-3,
              class_weights=None, seed=0):
        """Mini-batch Adam; returns per-epoch loss history."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        if Y.shape[0] != X.shape[0]:
            raise NnError("input and target row counts differ")
        N = X.shape[0]
        bs = max(1, min(batch_size, N))
        rng = np.random.default_rng(seed)
        history = []
        for _ in range(epochs):
            order = rng.permutation(N)
            for start in range(0, N, bs):
                idx = order[start:start + bs]
                _, grads = self.loss_and_grad(X[idx], Y[idx], class_weights)
                self.adam_step(grads, lr=lr)
            loss, _ = self.loss_and_grad(X, Y, class_weights)
            history.append(loss)
            if not np.isfinite(loss):
                raise NnError("training diverged to a non-finite loss")
        return history

    def flat_params(self):
        return np.concatenate([self.params[k].ravel() for k in ("W1", "b1", "W2", "b2")])

    def set_flat_params(self, flat):
        pos = 0
        for k in ("W1", "b1", "W2", "b2"):
            n = self.params[k].size
            self.params[k] = np.array(flat[pos:pos + n]).reshape(self.params[k].shape)
            pos += n


def numeric_gradient(model: MlpModel, X, Y, class_weights=None, h=1e-6):
    """Central finite-difference gradient over all parameters, flattened."""
    flat = model.flat_params()
    grad = np.empty_like(flat)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        model.set_flat_params(flat)
        lp, _ = model.loss_and_grad(X, Y, class_weights)
        flat[i] = orig - h
        model.set_flat_params(flat)
        lm, _ = model.loss_and_grad(X, Y, class_weights)
        flat[i] = orig
        grad[i] = (lp - lm) / (2 * h)
    model.set_flat_params(flat)
    return grad


def f_score(y_true, y_pred, beta=1.0):
    y_true = np.asarray(y_true).astype(bool)
    y_pred = np.asarray(y_pred).astype(bool)
    tp = np.sum(y_true & y_pred)
    fp = np.sum(~y_true & y_pred)
    fn = np.sum(y_true & ~y_pred)
    denom = (1 + beta ** 2) * tp + beta ** 2 * fn + fp
    return float((1 + beta ** 2) * tp / denom) if denom else 0.0


# ---------------------------------------------------------------------------
# task-level wrappers


@dataclass
class Regressor:
    model: MlpModel
    in_scaler: Scaler
    out_scaler: Scaler
    alpha_eta: float = 1.0

    def predict(self, features):
        z = self.model.forward(self.in_scaler.transform(np.atleast_2d(features)))
        return self.out_scaler.inverse(z)


@dataclass
class Classifier:
    model: MlpModel
    in_scaler: Scaler
    threshold: float = 0.5

    def probabilities(self, features):
        return self.model.forward(self.in_scaler.transform(np.atleast_2d(features)))[:, 0]

    def predict(self, features):
        return self.probabilities(features) >= self.threshold


def regression_features(scen) -> np.ndarray:
    """Flattened per-scenario hourly total demand: n_scenarios * horizon values."""
    rows = [np.asarray(d).sum(axis=0) for d in scen.demands]
    return np.concatenate(rows)


def predict_alpha(regressor: Regressor, scen, alpha_eta=None) -> np.ndarray:
    """Per-scenario proxy floors: alpha_eta * predicted converged alpha."""
    eta = regressor.alpha_eta if alpha_eta is None else float(alpha_eta)
    if not 0.0 <= eta <= 1.0:
        raise NnError("alpha_eta must be in [0, 1]")
    feats = regression_features(scen)
    if feats.size != regressor.model.dims[0]:
        raise NnError(
            f"feature length {feats.size} does not match regressor input "
            f"{regressor.model.dims[0]}"
        )
    pred = regressor.predict(feats)[0]
    if pred.size != scen.n:
        raise NnError("regressor output size does not match scenario count")
    return eta * pred


def classify_cuts(classifier: Classifier, features) -> np.ndarray:
    features = np.atleast_2d(features)
    if features.shape[1] != classifier.model.dims[0]:
        raise NnError("cut feature dimension does not match classifier input")
    return classifier.predict(features)


def calibrate_alpha_eta(y_true, y_pred, quantile=0.95) -> float:
    """Shrink factor from the validation over-prediction tail.

    Over-prediction relative errors (pred > actual) are what can make the
    proxy floor exceed the converged value; the q-quantile of that error
    sets how much to back off.
    """
    y_true = np.asarray(y_true, dtype=float).ravel()
    y_pred = np.asarray(y_pred, dtype=float).ravel()
    scale = np.maximum(np.abs(y_true), 1e-9)
    over = np.maximum(0.0, (y_pred - y_true) / scale)
    q = float(np.quantile(over, quantile)) if over.size else 0.0
    return float(min(1.0, max(0.0, 1.0 - q)))


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(obj, path, kind):
    doc = {
        "format_version": 1,
        "kind": kind,
        "dims": list(obj.model.dims),
        "output": obj.model.output,
        "in_scaler": obj.in_scaler.to_dict(),
        "weights": {k: v.tolist() for k, v in obj.model.params.items()},
    }
    if kind == "regressor":
        doc["out_scaler"] = obj.out_scaler.to_dict()
        doc["alpha_eta"] = obj.alpha_eta
    else:
        doc["threshold"] = obj.threshold
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")


def load_checkpoint(path):
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("format_version") != 1:
        raise NnError(f"unsupported checkpoint version in {path}")
    model = MlpModel(*doc["dims"], output=doc["output"])
    model.params = {k: np.array(v, dtype=float) for k, v in doc["weights"].items()}
    scaler = Scaler.from_dict(doc["in_scaler"])
    if doc["kind"] == "regressor":
        return Regressor(model, scaler, Scaler.from_dict(doc["out_scaler"]),
                         float(doc["alpha_eta"]))
    if doc["kind"] == "classifier":
        return Classifier(model, scaler, float(doc["threshold"]))
    raise NnError(f"unknown checkpoint kind '{doc['kind']}'")
