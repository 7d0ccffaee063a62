"""Dataset generation and model training on top of the Benders engine.

The regression dataset maps per-scenario hourly demand totals of one
profile sample to the converged proxy values of a conventional run.  The
classification dataset labels archived cuts by master replay.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .backends import get_backend
from .benders import BendersConfig, run
from .cuts import (
    FEATURE_NAMES,
    label_by_replay,
    load_label_table,
    save_cut_archive,
    save_label_records,
)
from .nn import (
    Classifier,
    MlpModel,
    NnError,
    Regressor,
    Scaler,
    calibrate_alpha_eta,
    f_score,
    regression_features,
)
from .scenarios import draw_sample, draw_scenarios
from .system import build_shift_factors

log = logging.getLogger(__name__)

DEFAULT_HIDDEN = 32
DEFAULT_EPOCHS = 400
DEFAULT_LR = 1e-3
DEFAULT_BATCH = 300
DEFAULT_VAL_FRAC = 0.2


@dataclass
class DatasetResult:
    dataset_path: Path
    label_path: Path
    cut_paths: list = field(default_factory=list)
    samples_run: int = 0
    samples_converged: int = 0
    cuts_labeled: int = 0


def generate_dataset(case, scen_cfg, out_dir, benders_cfg=None, backend=None,
                     label_cuts=True, max_label_cuts=None) -> DatasetResult:
    """Run conventional Benders once per profile sample and dump training data.

    Writes dataset.csv (regression rows), cuts_<s>.json archives, and, when
    label_cuts is set, labels.csv with replay-labeled cut features.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    benders_cfg = benders_cfg or BendersConfig()
    backend = backend or get_backend(benders_cfg.backend)
    sf = build_shift_factors(case)

    result = DatasetResult(out_dir / "dataset.csv", out_dir / "labels.csv")
    n = scen_cfg.n_scenarios
    n_feat = n * case.horizon
    all_records = []
    with open(result.dataset_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample",
                    *(f"f{i}" for i in range(n_feat)),
                    *(f"a{i}" for i in range(n))])
        for s in range(scen_cfg.n_samples):
            demand = draw_sample(case.base_demand, scen_cfg, s)
            scen = draw_scenarios(demand, scen_cfg, s)
            rep = run("conventional", case, scen, benders_cfg, sf, backend=backend)
            result.samples_run += 1
            if not rep.converged:
                log.warning("sample %d did not converge; skipping", s)
                continue
            result.samples_converged += 1
            feats = regression_features(scen)
            w.writerow([s,
                        *(f"{v:.10g}" for v in feats),
                        *(f"{v:.10g}" for v in rep.alpha_star)])
            cut_path = out_dir / f"cuts_{s}.json"
            save_cut_archive(rep.pool, cut_path)
            result.cut_paths.append(cut_path)
            if label_cuts:
                records = label_by_replay(case, scen, rep.pool, rep.alpha_floors,
                                          backend, benders_cfg.master_gap,
                                          max_cuts=max_label_cuts)
                all_records.extend(records)
    if label_cuts:
        save_label_records(all_records, result.label_path)
        result.cuts_labeled = len(all_records)
    return result


def load_dataset(path):
    """Regression feature matrix and targets back from dataset.csv."""
    X, Y = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        nf = sum(1 for h in header if h.startswith("f"))
        na = sum(1 for h in header if h.startswith("a"))
        for row in reader:
            vals = [float(v) for v in row[1:]]
            X.append(vals[:nf])
            Y.append(vals[nf:nf + na])
    if not X:
        raise NnError(f"no dataset rows in {path}")
    return np.array(X), np.array(Y)


def _split(n, val_frac, seed):
    rng = np.random.default_rng(seed)
    order = rng.permutation(n)
    n_val = int(round(n * val_frac))
    if n > 1:
        n_val = min(max(n_val, 1), n - 1)
    else:
        n_val = 0
    return order[n_val:], order[:n_val]


@dataclass
class TrainResult:
    model: object
    train_loss: float
    val_metric: float  # MSE for the regressor, F-score for the classifier
    history: list


def train_regressor(X, Y, hidden=DEFAULT_HIDDEN, epochs=DEFAULT_EPOCHS,
                    lr=DEFAULT_LR, batch_size=DEFAULT_BATCH, seed=0,
                    val_frac=DEFAULT_VAL_FRAC) -> TrainResult:
    """Fit the proxy-value regressor and calibrate its floor shrink factor."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    tr, va = _split(X.shape[0], val_frac, seed)
    in_scaler = Scaler.fit(X[tr])
    out_scaler = Scaler.fit(Y[tr])
    model = MlpModel(X.shape[1], hidden, Y.shape[1], output="identity", seed=seed)
    history = model.train(in_scaler.transform(X[tr]), out_scaler.transform(Y[tr]),
                          epochs=epochs, batch_size=batch_size, lr=lr, seed=seed)
    reg = Regressor(model, in_scaler, out_scaler)
    eval_idx = va if va.size else tr
    pred = reg.predict(X[eval_idx])
    reg.alpha_eta = calibrate_alpha_eta(Y[eval_idx], pred)
    val_mse = float(((pred - Y[eval_idx]) ** 2).mean())
    return TrainResult(reg, history[-1], val_mse, history)


def train_classifier(X, y, hidden=DEFAULT_HIDDEN, epochs=DEFAULT_EPOCHS,
                     lr=DEFAULT_LR, batch_size=DEFAULT_BATCH, seed=0,
                     val_frac=DEFAULT_VAL_FRAC, threshold=0.5) -> TrainResult:
    """Fit the useful-cut classifier; classes weighted by inverse frequency."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    y = np.asarray(y, dtype=float).reshape(-1, 1)
    if len(np.unique(y)) < 2:
        raise NnError("classifier training needs both classes present")
    tr, va = _split(X.shape[0], val_frac, seed)
    in_scaler = Scaler.fit(X[tr])
    n1 = float(y[tr].sum())
    n0 = float(y[tr].size - n1)
    if n0 == 0 or n1 == 0:
        # degenerate split; fall back to the full set for weighting
        n1, n0 = float(y.sum()), float(y.size - y.sum())
    weights = (y.size / (2 * n0), y.size / (2 * n1))
    model = MlpModel(X.shape[1], hidden, 1, output="logistic", seed=seed)
    history = model.train(in_scaler.transform(X[tr]), y[tr], epochs=epochs,
                          batch_size=batch_size, lr=lr,
                          class_weights=weights, seed=seed)
    clf = Classifier(model, in_scaler, threshold)
    eval_idx = va if va.size else tr
    score = f_score(y[eval_idx].ravel(), clf.predict(X[eval_idx]))
    return TrainResult(clf, history[-1], score, history)


def train_regressor_from_file(path, **kw) -> TrainResult:
    X, Y = load_dataset(path)
    return train_regressor(X, Y, **kw)


def train_classifier_from_file(path, **kw) -> TrainResult:
    X, y = load_label_table(path)
    return train_classifier(X, y, **kw)
