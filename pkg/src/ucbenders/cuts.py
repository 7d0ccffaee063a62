"""Cut pool lifecycle: usefulness criterion, retention, replay labeling."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from .formulations import build_master
from .lp import STATUS_OPTIMAL

LABEL_USEFUL = "useful"
LABEL_NON_USEFUL = "non-useful"
LABEL_UNLABELED = "unlabeled"

DEFAULT_DELTA = 1.0  # $, cut filtering threshold
DEFAULT_RETAIN = 2  # cuts force-kept per iteration, highest-load scenarios
REPLAY_LB_EPS = 1e-6  # absolute LB increase that counts as useful

FEATURE_NAMES = (
    "jsp_scaled",
    "dual_l1_scaled",
    "dual_nnz_frac",
    "violation_scaled",
    "iter_frac",
    "scen_energy_norm",
    "scen_rank_frac",
)

_CUT_BYTES_PER_COEF = 8
_CUT_BYTES_OVERHEAD = 64


class CutError(Exception):
    pass


@dataclass
class Cut:
    scenario: int
    iteration: int  # Benders iteration that generated the cut
    j_sp: float
    duals: np.ndarray  # gens x hours
    anchor_u: np.ndarray  # gens x hours, 0/1
    alpha_at_gen: float = None  # proxy value of this scenario when generated
    label: str = LABEL_UNLABELED
    retained: bool = True
    features: np.ndarray = None

    @property
    def key(self):
        return f"k{self.iteration}w{self.scenario}"

    def value(self, u) -> float:
        """psi(u) = J_SP + sum lam * (u - anchor)."""
        u = np.asarray(u)
        if u.shape != self.duals.shape:
            raise CutError(
                f"commitment shape {u.shape} does not match cut {self.duals.shape}"
            )
        return float(self.j_sp + (self.duals * (u - self.anchor_u)).sum())

    def est_bytes(self):
        nnz = int(np.count_nonzero(self.duals))
        return nnz * _CUT_BYTES_PER_COEF + _CUT_BYTES_OVERHEAD


def cut_value(cut: Cut, u) -> float:
    return cut.value(u)


def find_duplicate(pool, cut: Cut, tol=1e-9) -> Cut:
    """The pool cut identical to `cut` (same scenario, anchor, data), if any.

    The master revisits commitments near convergence, which regenerates
    identical cuts; those add nothing and only grow the master.
    """
    for other in pool.cuts:
        if (other.scenario == cut.scenario
                and abs(other.j_sp - cut.j_sp) <= tol
                and np.array_equal(other.anchor_u, cut.anchor_u)
                and np.allclose(other.duals, cut.duals, atol=tol)):
            return other
    return None


def is_duplicate(pool, cut: Cut, tol=1e-9) -> bool:
    return find_duplicate(pool, cut, tol) is not None


class CutPool:
    """All cuts generated so far; dropped cuts stay archived but inactive."""

    def __init__(self):
        self.cuts = []
        self.dropped_count = 0
        self._by_iteration = {}

    def add(self, cut: Cut):
        self.cuts.append(cut)
        self._by_iteration.setdefault(cut.iteration, []).append(cut)

    def add_iteration(self, cuts):
        for c in cuts:
            self.add(c)

    def active(self):
        return [c for c in self.cuts if c.retained]

    def from_iteration(self, k):
        return list(self._by_iteration.get(k, []))

    def iterations(self):
        return sorted(self._by_iteration)

    def drop(self, cut: Cut):
        if cut.retained:
            cut.retained = False
            self.dropped_count += 1

    @property
    def total(self):
        return len(self.cuts)

    @property
    def retained_count(self):
        return sum(1 for c in self.cuts if c.retained)


def filter_by_criterion(pool: CutPool, iteration, u_k, alpha_k, delta):
    """Partition the cuts generated at `iteration` given the next master solution.

    A cut for scenario w is useful iff |alpha_w - psi(u)| <= delta at the
    current master point.  Non-useful cuts are marked dropped (retention may
    restore some of them afterwards).
    """
    useful, non_useful = [], []
    for cut in pool.from_iteration(iteration):
        if abs(float(alpha_k[cut.scenario]) - cut.value(u_k)) <= delta:
            cut.label = LABEL_USEFUL
            useful.append(cut)
        else:
            cut.label = LABEL_NON_USEFUL
            pool.drop(cut)
            non_useful.append(cut)
    return useful, non_useful


def apply_retention(pool: CutPool, scen, r, iteration):
    """Force-retain the cuts of the r highest-load scenarios for an iteration.

    Ties break toward the lowest scenario id; at least one cut per iteration
    always survives.
    """
    cuts = pool.from_iteration(iteration)
    if not cuts:
        return
    order = sorted(cuts, key=lambda c: (-scen.total_energy(c.scenario), c.scenario))
    keep = max(1, int(r))
    for cut in order[:keep]:
        if not cut.retained:
            cut.retained = True
            pool.dropped_count -= 1


def pool_stats(pool: CutPool):
    total = pool.total
    useful = sum(1 for c in pool.cuts if c.label == LABEL_USEFUL)
    return {
        "total": total,
        "useful": useful,
        "fraction": (useful / total) if total else 0.0,
        "est_bytes": sum(c.est_bytes() for c in pool.cuts if c.retained),
    }


def cost_scale(case) -> float:
    """Normalization constant for cut features: max conceivable dispatch cost."""
    s = case.horizon * sum(g.cost_lin * g.p_max for g in case.generators)
    return max(s, 1.0)


def cut_features(case, scen, cut: Cut, iteration_cap) -> np.ndarray:
    """Feature vector for the usefulness classifier; scale-free by design."""
    scale = cost_scale(case)
    lam = cut.duals
    nnz = int(np.count_nonzero(lam))
    violation = cut.j_sp - (cut.alpha_at_gen if cut.alpha_at_gen is not None else 0.0)
    energies = [scen.total_energy(i) for i in range(scen.n)]
    emax = max(energies) or 1.0
    return np.array([
        cut.j_sp / scale,
        float(np.abs(lam).sum()) / scale,
        nnz / lam.size,
        violation / scale,
        cut.iteration / max(1, iteration_cap),
        energies[cut.scenario] / emax,
        scen.demand_rank(cut.scenario) / scen.n,
    ])


@dataclass
class CutLabelRecord:
    cut: Cut
    features: np.ndarray
    label: str
    lb_gain: float


def label_by_replay(case, scen, pool: CutPool, alpha_floors, backend,
                    gap_tol=1e-6, counter=None, max_cuts=None):
    """Ground-truth labels: replay the master, adding archived cuts one at a time.

    A cut is useful iff the master objective strictly increases (beyond
    numerical tolerance) when it is added.  One master solve per cut; the
    solve count is recorded in `counter` (dict with key 'solves') if given.
    """
    records = []
    added = []
    model = build_master(case, scen, added, alpha_floors)
    base = backend.solve_milp(model, gap_tol)
    if base.status != STATUS_OPTIMAL:
        raise CutError(f"replay baseline master not optimal: {base.status}")
    lb = base.objective
    for k in pool.iterations():
        for cut in pool.from_iteration(k):
            if max_cuts is not None and len(records) >= max_cuts:
                return records
            added.append(cut)
            model = build_master(case, scen, added, alpha_floors)
            sol = backend.solve_milp(model, gap_tol)
            if sol.status != STATUS_OPTIMAL:
                raise CutError(f"replay master not optimal: {sol.status}")
            if counter is not None:
                counter["solves"] = counter.get("solves", 0) + 1
            gain = sol.objective - lb
            lb = max(lb, sol.objective)
            label = LABEL_USEFUL if gain > REPLAY_LB_EPS else LABEL_NON_USEFUL
            feats = cut.features
            if feats is None:
                feats = cut_features(case, scen, cut, iteration_cap=max(pool.iterations()))
            records.append(CutLabelRecord(cut, feats, label, float(gain)))
    return records


# ---------------------------------------------------------------------------
# serialization


def save_cut_archive(pool: CutPool, path):
    doc = [
        {
            "scenario": c.scenario,
            "iteration": c.iteration,
            "j_sp": c.j_sp,
            "duals": c.duals.tolist(),
            "anchor_u": c.anchor_u.tolist(),
            "alpha_at_gen": c.alpha_at_gen,
            "label": c.label,
            "retained": c.retained,
            "features": None if c.features is None else c.features.tolist(),
        }
        for c in pool.cuts
    ]
    with open(path, "w") as fh:
        json.dump({"format_version": 1, "cuts": doc}, fh)
        fh.write("\n")


def load_cut_archive(path) -> CutPool:
    with open(path) as fh:
        doc = json.load(fh)
    pool = CutPool()
    for cd in doc["cuts"]:
        cut = Cut(
            scenario=int(cd["scenario"]),
            iteration=int(cd["iteration"]),
            j_sp=float(cd["j_sp"]),
            duals=np.array(cd["duals"], dtype=float),
            anchor_u=np.array(cd["anchor_u"], dtype=int),
            alpha_at_gen=cd["alpha_at_gen"],
            label=cd["label"],
            retained=bool(cd["retained"]),
            features=None if cd["features"] is None else np.array(cd["features"]),
        )
        pool.add(cut)
    pool.dropped_count = sum(1 for c in pool.cuts if not c.retained)
    return pool


def save_label_records(records, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "iteration", *FEATURE_NAMES, "label", "lb_gain"])
        for r in records:
            w.writerow([
                r.cut.scenario, r.cut.iteration,
                *(f"{v:.10g}" for v in r.features),
                r.label, f"{r.lb_gain:.10g}",
            ])


def load_label_table(path):
    """Feature matrix and 0/1 labels from a label-record file."""
    feats, labels = [], []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            feats.append([float(row[name]) for name in FEATURE_NAMES])
            labels.append(1.0 if row["label"] == LABEL_USEFUL else 0.0)
    if not feats:
        raise CutError(f"no label rows in {path}")
    return np.array(feats), np.array(labels)
