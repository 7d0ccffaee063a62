"""Multi-cut Benders engine and the learning-assisted strategy variants.

Strategies:
  conventional - keep every cut, constant proxy floors
  r            - regressor-predicted proxy floors + criterion-based cut
                 filtering one iteration behind
  c            - classifier-based cut filtering at generation time
  cr           - classifier filtering + regressor floors
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .backends import get_backend
from .cuts import (
    Cut,
    CutPool,
    DEFAULT_DELTA,
    DEFAULT_RETAIN,
    LABEL_NON_USEFUL,
    LABEL_USEFUL,
    apply_retention,
    cut_features,
    filter_by_criterion,
    find_duplicate,
    pool_stats,
)
from .formulations import (
    Commitment,
    DEFAULT_SLACK_PENALTY,
    ScucError,
    build_master,
    master_values,
    solve_subproblem,
)
from .lp import STATUS_OPTIMAL
from .nn import classify_cuts, predict_alpha
from .system import build_shift_factors

STRATEGIES = ("conventional", "r", "c", "cr")

DEFAULT_EPSILON = 0.01  # 1 % convergence tolerance
DEFAULT_MAX_ITERATIONS = 400
DEFAULT_ALPHA_MIN = -1e6  # constant proxy floor for non-regressor strategies


@dataclass
class BendersConfig:
    epsilon: float = DEFAULT_EPSILON
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    delta: float = DEFAULT_DELTA
    retain: int = DEFAULT_RETAIN
    alpha_min: float = DEFAULT_ALPHA_MIN
    alpha_eta: float = None  # None: use the regressor's calibrated value
    slack_penalty: float = DEFAULT_SLACK_PENALTY
    master_gap: float = 1e-6
    lazy_network: bool = False
    backend: str = "highs"
    # explicit per-scenario proxy floors; overrides the strategy default
    alpha_floors: np.ndarray = None

    def validate(self):
        if self.epsilon <= 0:
            raise ScucError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ScucError("iteration cap must be >= 1")


@dataclass
class IterationRow:
    k: int
    lb: float
    ub: float
    gap: float
    cuts_added: int
    cuts_retained: int
    mp_time: float
    sp_time: float


@dataclass
class RunReport:
    strategy: str
    rows: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0
    final_objective: float = math.inf  # best upper bound
    final_lb: float = -math.inf
    commitment: Commitment = None
    dispatch: dict = None  # base-topology dispatch of the incumbent
    alpha_star: np.ndarray = None  # proxy values at the terminal master
    pool: CutPool = None
    alpha_floors: np.ndarray = None

    @property
    def stats(self):
        return pool_stats(self.pool) if self.pool else None

    @property
    def total_mp_time(self):
        return sum(r.mp_time for r in self.rows)

    @property
    def total_sp_time(self):
        return sum(r.sp_time for r in self.rows)


def make_cut(res, com: Commitment, iteration, alpha_at_gen=None) -> Cut:
    """Optimality cut from one subproblem solve, anchored at its commitment."""
    return Cut(
        scenario=res.scenario,
        iteration=iteration,
        j_sp=float(res.objective),
        duals=np.array(res.duals, dtype=float),
        anchor_u=np.array(com.u, dtype=int),
        alpha_at_gen=None if alpha_at_gen is None else float(alpha_at_gen),
    )


def _safe_gap(lb, ub):
    if abs(lb) < 1e-9:
        return 0.0 if ub - lb <= 1e-9 else math.inf
    return (ub - lb) / abs(lb)


def run(strategy, case, scen, cfg: BendersConfig = None, shift_factors=None,
        regressor=None, classifier=None, backend=None) -> RunReport:
    """Algorithm loop: master -> subproblems -> cuts -> filter -> gap test."""
    if strategy not in STRATEGIES:
        raise ScucError(f"unknown strategy '{strategy}' (expected one of {STRATEGIES})")
    cfg = cfg or BendersConfig()
    cfg.validate()
    if strategy in ("r", "cr") and regressor is None:
        raise ScucError(f"strategy '{strategy}' requires a trained regressor")
    if strategy in ("c", "cr") and classifier is None:
        raise ScucError(f"strategy '{strategy}' requires a trained classifier")
    backend = backend or get_backend(cfg.backend)
    if shift_factors is None:
        shift_factors = build_shift_factors(case)

    if cfg.alpha_floors is not None:
        floors = np.asarray(cfg.alpha_floors, dtype=float)
        if floors.shape != (scen.n,):
            raise ScucError("need one alpha floor per scenario")
    elif strategy in ("r", "cr"):
        floors = predict_alpha(regressor, scen, cfg.alpha_eta)
    else:
        floors = np.full(scen.n, cfg.alpha_min)

    report = RunReport(strategy=strategy, pool=CutPool(), alpha_floors=floors)
    pool = report.pool
    lb = -math.inf
    ub_best = math.inf

    for k in range(1, cfg.max_iterations + 1):
        t0 = time.perf_counter()
        master = build_master(case, scen, pool.active(), floors)
        msol = backend.solve_milp(master, cfg.master_gap)
        mp_time = time.perf_counter() - t0
        if msol.status != STATUS_OPTIMAL:
            raise ScucError(f"master problem not optimal at iteration {k}: {msol.status}")
        com, alpha = master_values(case, master, msol.x)
        j_mp = msol.objective
        lb = max(lb, j_mp)

        t0 = time.perf_counter()
        results = [
            solve_subproblem(case, scen, w, com, shift_factors, backend,
                             cfg.slack_penalty, cfg.lazy_network)
            for w in range(scen.n)
        ]
        sp_time = time.perf_counter() - t0
        j_sp = sum(r.objective for r in results)
        ub_k = j_sp + j_mp - float(alpha.sum())
        if ub_k < ub_best:
            ub_best = ub_k
            report.commitment = com
            report.dispatch = {
                (r.scenario, gi, t): v
                for r in results
                for (c, gi, t), v in r.dispatch.items()
                if c == "base"
            }

        cuts_k = [make_cut(r, com, k, alpha[r.scenario]) for r in results]
        fresh = []
        for cut in cuts_k:
            dup = find_duplicate(pool, cut)
            if dup is None:
                fresh.append(cut)
            elif not dup.retained:
                # the filtered copy is needed after all; restore it rather
                # than archiving an identical twin
                dup.retained = True
                pool.dropped_count -= 1
        cuts_k = fresh
        for cut in cuts_k:
            cut.features = cut_features(case, scen, cut, cfg.max_iterations)

        # strategy-specific filtering
        if strategy == "r" and k > 1:
            filter_by_criterion(pool, k - 1, com.u, alpha, cfg.delta)
            apply_retention(pool, scen, cfg.retain, k - 1)
        pool.add_iteration(cuts_k)
        if strategy in ("c", "cr") and cuts_k:
            feats = np.array([c.features for c in cuts_k])
            keep = classify_cuts(classifier, feats)
            for cut, ok in zip(cuts_k, keep):
                cut.label = LABEL_USEFUL if ok else LABEL_NON_USEFUL
                if not ok:
                    pool.drop(cut)
            apply_retention(pool, scen, cfg.retain, k)

        gap = _safe_gap(lb, ub_best)
        report.rows.append(IterationRow(
            k=k, lb=lb, ub=ub_best, gap=gap,
            cuts_added=len(cuts_k), cuts_retained=pool.retained_count,
            mp_time=mp_time, sp_time=sp_time,
        ))
        report.iterations = k
        report.alpha_star = alpha
        report.final_lb = lb
        report.final_objective = ub_best
        if gap <= cfg.epsilon:
            report.converged = True
            break

    return report


def cost_gap(f_variant: float, f_conventional: float) -> float:
    """Percent objective difference of a variant vs conventional Benders."""
    if abs(f_conventional) < 1e-12:
        raise ScucError("conventional objective is zero; cost gap undefined")
    return 100.0 * abs(f_variant - f_conventional) / abs(f_conventional)
