"""SCUC algebra: commitment constraints, extensive form, master, subproblems.

Ramp constraints are written in terms of u alone, using the identity
startup = (u_t - u_{t-1})+ at binary points, so the subproblem value
function depends on the commitment only through u and the fixing-row duals
give exact sensitivities.  Ramps apply from the second hour onward; the
first hour is free relative to the initial state.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .lp import INF, LpModel, STATUS_OPTIMAL
from .system import BASE_CONTINGENCY, SystemCase

DEFAULT_SLACK_PENALTY = 1e4  # $/MW on capacity/ramp relaxation slacks
FLOW_TOL = 1e-6


class ScucError(Exception):
    pass


@dataclass
class Commitment:
    u: np.ndarray  # gens x hours, 0/1
    y: np.ndarray
    z: np.ndarray

    def validate(self, case: SystemCase):
        T = case.horizon
        for arr in (self.u, self.y, self.z):
            if arr.shape != (case.n_gens, T):
                raise ScucError("commitment matrix shape mismatch")
        for gi, g in enumerate(case.generators):
            u_prev = 1 if g.initially_on else 0
            for t in range(T):
                if self.y[gi, t] - self.z[gi, t] != self.u[gi, t] - u_prev:
                    raise ScucError(f"startup/shutdown logic violated for {g.id} at t={t}")
                if self.y[gi, t] + self.z[gi, t] > 1:
                    raise ScucError(f"simultaneous startup and shutdown for {g.id} at t={t}")
                u_prev = self.u[gi, t]


def commitment_from_u(case: SystemCase, u) -> Commitment:
    """Derive the implied startup/shutdown indicators from a u matrix."""
    u = np.asarray(u, dtype=int)
    T = case.horizon
    y = np.zeros_like(u)
    z = np.zeros_like(u)
    for gi, g in enumerate(case.generators):
        prev = 1 if g.initially_on else 0
        for t in range(T):
            d = u[gi, t] - prev
            y[gi, t] = max(0, d)
            z[gi, t] = max(0, -d)
            prev = u[gi, t]
    return Commitment(u, y, z)


def first_stage_cost(case: SystemCase, com: Commitment) -> float:
    total = 0.0
    for gi, g in enumerate(case.generators):
        total += g.startup_cost * com.y[gi].sum() + g.shutdown_cost * com.z[gi].sum()
    return float(total)


def commitment_is_feasible(case: SystemCase, u) -> bool:
    """Check min-up/min-down and initial-condition horizons for a u matrix."""
    u = np.asarray(u, dtype=int)
    T = case.horizon
    for gi, g in enumerate(case.generators):
        ut = g.must_run_hours(T)
        dt = g.must_off_hours(T)
        if (u[gi, :ut] != 1).any() or (u[gi, :dt] != 0).any():
            return False
        seq = [1 if g.initially_on else 0] + u[gi].tolist()
        for t in range(1, T + 1):
            if seq[t] > seq[t - 1]:  # startup: stay on min_up hours (or to horizon)
                if any(seq[tau] != 1 for tau in range(t, min(T, t + g.min_up - 1) + 1)):
                    return False
            if seq[t] < seq[t - 1]:  # shutdown
                if any(seq[tau] != 0 for tau in range(t, min(T, t + g.min_down - 1) + 1)):
                    return False
    return True


# ---------------------------------------------------------------------------
# model building blocks


def add_commitment_vars(model: LpModel, case: SystemCase, binary=True):
    T = case.horizon
    nG = case.n_gens
    u = np.empty((nG, T), dtype=int)
    y = np.empty((nG, T), dtype=int)
    z = np.empty((nG, T), dtype=int)
    for gi, g in enumerate(case.generators):
        for t in range(T):
            u[gi, t] = model.add_var(f"u[{g.id},{t}]", 0.0, 1.0, binary=binary)
            y[gi, t] = model.add_var(f"y[{g.id},{t}]", 0.0, 1.0,
                                     obj=g.startup_cost, binary=binary)
            z[gi, t] = model.add_var(f"z[{g.id},{t}]", 0.0, 1.0,
                                     obj=g.shutdown_cost, binary=binary)
    return u, y, z


def add_commitment_logic(model: LpModel, case: SystemCase, u, y, z):
    """First-stage constraints: startup/shutdown logic and min up/down times."""
    T = case.horizon
    for gi, g in enumerate(case.generators):
        u0 = 1 if g.initially_on else 0
        for t in range(T):
            prev = {u[gi, t - 1]: 1.0} if t > 0 else {}
            coeffs = {y[gi, t]: 1.0, z[gi, t]: -1.0, u[gi, t]: -1.0}
            for j, v in prev.items():
                coeffs[j] = coeffs.get(j, 0.0) + v
            rhs = -u0 if t == 0 else 0.0
            model.add_row(f"logic[{g.id},{t}]", coeffs, rhs, rhs)
            model.add_row(f"excl[{g.id},{t}]", {y[gi, t]: 1.0, z[gi, t]: 1.0}, -INF, 1.0)

        ut = g.must_run_hours(T)
        dt = g.must_off_hours(T)
        for t in range(ut):
            model.add_row(f"mustrun[{g.id},{t}]", {u[gi, t]: 1.0}, 1.0, 1.0)
        for t in range(dt):
            model.add_row(f"mustoff[{g.id},{t}]", {u[gi, t]: 1.0}, 0.0, 0.0)

        # min-up: units started at t stay on min_up hours
        for t1 in range(ut + 1, T - g.min_up + 2):  # 1-based window fully inside horizon
            coeffs = {y[gi, t1 - 1]: -float(g.min_up)}
            for tau in range(t1, t1 + g.min_up):
                coeffs[u[gi, tau - 1]] = coeffs.get(u[gi, tau - 1], 0.0) + 1.0
            model.add_row(f"minup[{g.id},{t1}]", coeffs, 0.0, INF)
        for t1 in range(max(ut + 1, T - g.min_up + 2), T + 1):  # tail windows
            coeffs = {y[gi, t1 - 1]: -float(T - t1 + 1)}
            for tau in range(t1, T + 1):
                coeffs[u[gi, tau - 1]] = coeffs.get(u[gi, tau - 1], 0.0) + 1.0
            model.add_row(f"minup_t[{g.id},{t1}]", coeffs, 0.0, INF)

        # min-down
        for t1 in range(dt + 1, T - g.min_down + 2):
            coeffs = {z[gi, t1 - 1]: -float(g.min_down)}
            rhs = -float(g.min_down)
            for tau in range(t1, t1 + g.min_down):
                coeffs[u[gi, tau - 1]] = coeffs.get(u[gi, tau - 1], 0.0) - 1.0
            model.add_row(f"mindown[{g.id},{t1}]", coeffs, rhs, INF)
        for t1 in range(max(dt + 1, T - g.min_down + 2), T + 1):
            coeffs = {z[gi, t1 - 1]: -float(T - t1 + 1)}
            rhs = -float(T - t1 + 1)
            for tau in range(t1, T + 1):
                coeffs[u[gi, tau - 1]] = coeffs.get(u[gi, tau - 1], 0.0) - 1.0
            model.add_row(f"mindown_t[{g.id},{t1}]", coeffs, rhs, INF)


def _ramp_rhs_terms(g, u, gi, t):
    """u-coefficients of the startup/shutdown indicator in the ramp RHS."""
    # (p_min - ramp) * (u_t - u_{t-1}) moved to the LHS
    return {u[gi, t]: 1.0, u[gi, t - 1]: -1.0}


def add_dispatch_block(
    model: LpModel,
    case: SystemCase,
    demand,  # bus x hour for this scenario
    shift_factors,  # ShiftFactorSet or None
    u,  # var indices (gens x hours)
    prob,
    tag,
    slack_penalty=None,  # None: hard capacity (extensive form / oracle)
    network=True,
):
    """Second-stage dispatch for one scenario; returns variable index maps."""
    T = case.horizon
    nG = case.n_gens
    demand = np.asarray(demand, dtype=float)
    cids = shift_factors.contingency_ids if shift_factors else [BASE_CONTINGENCY]

    p = {}
    for c in cids:
        for gi, g in enumerate(case.generators):
            for t in range(T):
                cost = prob * g.cost_lin if c == BASE_CONTINGENCY else 0.0
                p[c, gi, t] = model.add_var(f"p[{tag},{c},{g.id},{t}]", 0.0, INF, obj=cost)

    nu = gam = None
    if slack_penalty is not None:
        nu = np.array([
            [model.add_var(f"nu[{tag},{g.id},{t}]", 0.0, INF, obj=slack_penalty)
             for t in range(T)] for g in case.generators
        ])
        gam = np.array([
            model.add_var(f"gam[{tag},{t}]", 0.0, INF, obj=slack_penalty) for t in range(T)
        ])

    for c in cids:
        for gi, g in enumerate(case.generators):
            for t in range(T):
                up = {p[c, gi, t]: 1.0, u[gi, t]: -g.p_max}
                lo = {p[c, gi, t]: 1.0, u[gi, t]: -g.p_min}
                if slack_penalty is not None:
                    up[nu[gi, t]] = -1.0
                    up[gam[t]] = -1.0
                    lo[nu[gi, t]] = 1.0
                    lo[gam[t]] = 1.0
                model.add_row(f"cap_hi[{tag},{c},{g.id},{t}]", up, -INF, 0.0)
                model.add_row(f"cap_lo[{tag},{c},{g.id},{t}]", lo, 0.0, INF)

        # system balance per hour
        hourly = demand.sum(axis=0)
        for t in range(T):
            coeffs = {p[c, gi, t]: 1.0 for gi in range(nG)}
            model.add_row(f"bal[{tag},{c},{t}]", coeffs, hourly[t], hourly[t])

        if shift_factors is not None and network:
            sf = shift_factors[c]
            gen_bus = [case.bus_index[g.bus] for g in case.generators]
            for li, ln in enumerate(case.lines):
                if ln.id == c:
                    continue
                row_sf = sf[li]
                if not np.any(row_sf):
                    continue
                for t in range(T):
                    coeffs = {}
                    for gi in range(nG):
                        v = row_sf[gen_bus[gi]]
                        if v:
                            coeffs[p[c, gi, t]] = coeffs.get(p[c, gi, t], 0.0) + v
                    load_part = float(row_sf @ demand[:, t])
                    model.add_row(
                        f"flow[{tag},{c},{ln.id},{t}]", coeffs,
                        -ln.flow_limit + load_part, ln.flow_limit + load_part,
                    )

    # ramping, base topology only, from hour 2 on
    c0 = BASE_CONTINGENCY
    for gi, g in enumerate(case.generators):
        for t in range(1, T):
            up = {p[c0, gi, t]: 1.0, p[c0, gi, t - 1]: -1.0,
                  u[gi, t]: -(g.p_min - g.ramp_up), u[gi, t - 1]: (g.p_min - g.ramp_up)}
            dn = {p[c0, gi, t]: -1.0, p[c0, gi, t - 1]: 1.0,
                  u[gi, t]: (g.p_min - g.ramp_down), u[gi, t - 1]: -(g.p_min - g.ramp_down)}
            if slack_penalty is not None:
                up[gam[t]] = up.get(gam[t], 0.0) - 1.0
                dn[gam[t]] = dn.get(gam[t], 0.0) - 1.0
            model.add_row(f"ramp_up[{tag},{g.id},{t}]", up, -INF, g.ramp_up)
            model.add_row(f"ramp_dn[{tag},{g.id},{t}]", dn, -INF, g.ramp_down)

    return p, nu, gam


# ---------------------------------------------------------------------------
# extensive form


def build_extensive_form(case: SystemCase, scen, shift_factors=None) -> LpModel:
    """Monolithic deterministic-equivalent MILP over all scenarios."""
    for d in scen.demands:
        if np.asarray(d).shape != (case.n_buses, case.horizon):
            raise ScucError("scenario demand shape does not match case dimensions")
    model = LpModel(f"ef[{case.name}]")
    u, y, z = add_commitment_vars(model, case, binary=True)
    add_commitment_logic(model, case, u, y, z)
    for w in range(scen.n):
        add_dispatch_block(
            model, case, scen.demands[w], shift_factors, u,
            prob=float(scen.probabilities[w]), tag=f"w{w}", slack_penalty=None,
        )
    model._uc_vars = (u, y, z)
    return model


def extract_commitment(case: SystemCase, model: LpModel, x) -> Commitment:
    u, y, z = model._uc_vars
    take = lambda idx: np.rint(np.asarray([[x[j] for j in row] for row in idx])).astype(int)
    return Commitment(take(u), take(y), take(z))


def enumerate_oracle(case: SystemCase, scen, shift_factors, backend):
    """Brute-force reference: enumerate feasible commitments + LP dispatch.

    Only viable for n_gens * horizon small.  Returns (objective, Commitment).
    """
    nG, T = case.n_gens, case.horizon
    if nG * T > 16:
        raise ScucError("enumeration oracle limited to n_gens * horizon <= 16")
    best_obj, best_com = INF, None
    for mask in range(2 ** (nG * T)):
        u = np.array([[(mask >> (gi * T + t)) & 1 for t in range(T)]
                      for gi in range(nG)], dtype=int)
        if not commitment_is_feasible(case, u):
            continue
        com = commitment_from_u(case, u)
        cost = first_stage_cost(case, com)
        if cost >= best_obj:
            continue
        total = cost
        ok = True
        for w in range(scen.n):
            res = solve_dispatch(case, scen.demands[w], float(scen.probabilities[w]),
                                 com, shift_factors, backend)
            if res is None:
                ok = False
                break
            total += res
            if total >= best_obj:
                ok = False
                break
        if ok and total < best_obj:
            best_obj, best_com = total, com
    if best_com is None:
        raise ScucError("no feasible commitment found by enumeration")
    return best_obj, best_com


def solve_dispatch(case, demand, prob, com: Commitment, shift_factors, backend):
    """Hard (slack-free) dispatch cost of one scenario at a fixed commitment.

    Returns the probability-weighted cost, or None if infeasible.
    """
    model = LpModel("dispatch")
    u = np.empty((case.n_gens, case.horizon), dtype=int)
    for gi, g in enumerate(case.generators):
        for t in range(case.horizon):
            v = float(com.u[gi, t])
            u[gi, t] = model.add_var(f"u[{g.id},{t}]", v, v)
    add_dispatch_block(model, case, demand, shift_factors, u, prob, "d", slack_penalty=None)
    sol = backend.solve_lp(model)
    if sol.status != STATUS_OPTIMAL:
        return None
    return float(sol.objective)


# ---------------------------------------------------------------------------
# Benders master and subproblem


@dataclass
class SubproblemResult:
    scenario: int
    objective: float  # J_SP: probability-weighted dispatch cost + slack penalty
    duals: np.ndarray  # gens x hours, from the u-fixing rows
    dispatch: dict  # (contingency, gen, hour) -> MW
    slack_nu: np.ndarray
    slack_gamma: np.ndarray
    network_rows_added: int = 0

    @property
    def total_slack(self):
        return float(self.slack_nu.sum() + self.slack_gamma.sum())


def solve_subproblem(
    case: SystemCase,
    scen,
    w: int,
    com: Commitment,
    shift_factors,
    backend,
    slack_penalty=DEFAULT_SLACK_PENALTY,
    lazy_network=False,
) -> SubproblemResult:
    """Always-feasible scenario subproblem at a fixed commitment.

    With lazy_network, network rows start absent and violated line/contingency
    rows are added until all flows are within limits.
    """
    demand = np.asarray(scen.demands[w], dtype=float)
    prob = float(scen.probabilities[w])
    T, nG = case.horizon, case.n_gens

    model = LpModel(f"sp[{w}]")
    u = np.empty((nG, T), dtype=int)
    fix_rows = np.empty((nG, T), dtype=int)
    for gi, g in enumerate(case.generators):
        for t in range(T):
            u[gi, t] = model.add_var(f"u[{g.id},{t}]", 0.0, 1.0)
    for gi, g in enumerate(case.generators):
        for t in range(T):
            v = float(com.u[gi, t])
            fix_rows[gi, t] = model.add_row(f"fix[{g.id},{t}]", {u[gi, t]: 1.0}, v, v)

    p, nu, gam = add_dispatch_block(
        model, case, demand, shift_factors, u, prob, f"w{w}",
        slack_penalty=slack_penalty, network=not lazy_network,
    )

    gen_bus = [case.bus_index[g.bus] for g in case.generators]
    rows_added = 0
    while True:
        sol = backend.solve_lp(model)
        if sol.status != STATUS_OPTIMAL:
            raise ScucError(f"subproblem {w} backend failure: {sol.status}")
        if not lazy_network or shift_factors is None:
            break
        violations = []
        for c in shift_factors.contingency_ids:
            sf = shift_factors[c]
            for li, ln in enumerate(case.lines):
                if ln.id == c or not np.any(sf[li]):
                    continue
                for t in range(T):
                    gen_inj = sum(sf[li, gen_bus[gi]] * sol.x[p[c, gi, t]]
                                  for gi in range(nG))
                    flow = gen_inj - float(sf[li] @ demand[:, t])
                    if abs(flow) > ln.flow_limit + FLOW_TOL:
                        name = f"flow[w{w},{c},{ln.id},{t}]"
                        if any(r[0] == name for r in model.rows):
                            continue
                        coeffs = {}
                        for gi in range(nG):
                            v = sf[li, gen_bus[gi]]
                            if v:
                                coeffs[p[c, gi, t]] = coeffs.get(p[c, gi, t], 0.0) + v
                        load_part = float(sf[li] @ demand[:, t])
                        violations.append((name, coeffs,
                                           -ln.flow_limit + load_part,
                                           ln.flow_limit + load_part))
        if not violations:
            break
        for name, coeffs, lo, hi in violations:
            model.add_row(name, coeffs, lo, hi)
            rows_added += 1

    duals = np.array([[sol.duals[fix_rows[gi, t]] for t in range(T)] for gi in range(nG)])
    dispatch = {key: float(sol.x[j]) for key, j in p.items()}
    nu_v = np.array([[sol.x[nu[gi, t]] for t in range(T)] for gi in range(nG)])
    gam_v = np.array([sol.x[gam[t]] for t in range(T)])
    return SubproblemResult(w, float(sol.objective), duals, dispatch, nu_v, gam_v, rows_added)


def build_master(case: SystemCase, scen, cuts, alpha_floors) -> LpModel:
    """Benders master: first-stage constraints, retained cuts, proxy floors."""
    n = scen.n
    alpha_floors = np.asarray(alpha_floors, dtype=float)
    if alpha_floors.shape != (n,):
        raise ScucError("need one alpha floor per scenario")
    model = LpModel(f"master[{case.name}]")
    u, y, z = add_commitment_vars(model, case, binary=True)
    add_commitment_logic(model, case, u, y, z)
    alpha = np.array([
        model.add_var(f"alpha[{w}]", float(alpha_floors[w]), INF, obj=1.0) for w in range(n)
    ])
    for cut in cuts:
        # alpha_w - sum lam*u >= J_SP - sum lam*anchor
        coeffs = {alpha[cut.scenario]: 1.0}
        rhs = cut.j_sp
        for gi in range(case.n_gens):
            for t in range(case.horizon):
                lam = cut.duals[gi, t]
                if lam:
                    coeffs[u[gi, t]] = coeffs.get(u[gi, t], 0.0) - lam
                    rhs -= lam * cut.anchor_u[gi, t]
        model.add_row(f"cut[{cut.key}]", coeffs, rhs, INF)
    model._uc_vars = (u, y, z)
    model._alpha_vars = alpha
    return model


def master_values(case: SystemCase, model: LpModel, x):
    com = extract_commitment(case, model, x)
    alpha = np.array([float(x[j]) for j in model._alpha_vars])
    return com, alpha


def benders_gap(lb: float, ub: float) -> float:
    """Relative duality gap (UB - LB) / |LB|."""
    if abs(lb) < 1e-9:
        raise ScucError("lower bound too close to zero for a relative gap")
    return (ub - lb) / abs(lb)
