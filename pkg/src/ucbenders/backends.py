"""Solver backends behind a common solve_lp / solve_milp interface.

The default backend binds the HiGHS engine through scipy.optimize.  A
pure-python dense simplex + branch-and-bound backend (see simplex.py)
provides an independent implementation for cross-checking at desk scale.
"""

from __future__ import annotations

import numpy as np
from scipy import sparse
from scipy.optimize import LinearConstraint, linprog, milp

from .lp import (
    INF,
    LpError,
    LpModel,
    LpSolution,
    STATUS_INFEASIBLE,
    STATUS_ITERATION_LIMIT,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
)

DEFAULT_MILP_GAP = 1e-6


class HighsBackend:
    """scipy/HiGHS adapter with dual extraction for LPs."""

    name = "highs"

    def solve_lp(self, model: LpModel) -> LpSolution:
        if model.has_binaries:
            raise LpError("solve_lp called on a model with binary variables")
        n = model.n_vars
        # split ranged rows into eq rows and one-sided <= rows, remembering
        # how to reassemble the dual of the original row
        eq_rows, eq_rhs = [], []
        ub_rows, ub_rhs = [], []
        # per original row: ("eq", i) or ("ub", i_hi, i_lo) with -1 for absent
        dual_map = []
        for _, coeffs, lo, hi in model.rows:
            idx = np.fromiter(coeffs.keys(), dtype=int, count=len(coeffs))
            val = np.fromiter(coeffs.values(), dtype=float, count=len(coeffs))
            if lo == hi:
                dual_map.append(("eq", len(eq_rows)))
                eq_rows.append((idx, val))
                eq_rhs.append(lo)
            else:
                i_hi = i_lo = -1
                if hi < INF:
                    i_hi = len(ub_rows)
                    ub_rows.append((idx, val))
                    ub_rhs.append(hi)
                if lo > -INF:
                    i_lo = len(ub_rows)
                    ub_rows.append((idx, -val))
                    ub_rhs.append(-lo)
                dual_map.append(("ub", i_hi, i_lo))

        def assemble(rows):
            if not rows:
                return None
            data, ri, ci = [], [], []
            for i, (idx, val) in enumerate(rows):
                ri.extend([i] * len(idx))
                ci.extend(idx.tolist())
                data.extend(val.tolist())
            return sparse.csr_matrix((data, (ri, ci)), shape=(len(rows), n))

        res = linprog(
            c=np.asarray(model.obj),
            A_ub=assemble(ub_rows),
            b_ub=np.asarray(ub_rhs) if ub_rows else None,
            A_eq=assemble(eq_rows),
            b_eq=np.asarray(eq_rhs) if eq_rows else None,
            bounds=list(zip(model.lb, model.ub)),
            method="highs",
        )
        if res.status == 2:
            return LpSolution(STATUS_INFEASIBLE)
        if res.status == 3:
            return LpSolution(STATUS_UNBOUNDED)
        if res.status == 1:
            return LpSolution(STATUS_ITERATION_LIMIT)
        if res.status != 0:
            raise LpError(f"HiGHS failure: {res.message}")

        duals = np.zeros(model.n_rows)
        eq_marg = res.eqlin.marginals if eq_rows else None
        ub_marg = res.ineqlin.marginals if ub_rows else None
        for r, entry in enumerate(dual_map):
            if entry[0] == "eq":
                duals[r] = eq_marg[entry[1]]
            else:
                _, i_hi, i_lo = entry
                d = 0.0
                if i_hi >= 0:
                    d += ub_marg[i_hi]
                if i_lo >= 0:
                    d -= ub_marg[i_lo]
                duals[r] = d
        return LpSolution(STATUS_OPTIMAL, np.asarray(res.x), float(res.fun), duals)

    def solve_milp(self, model: LpModel, gap_tol=DEFAULT_MILP_GAP) -> LpSolution:
        n = model.n_vars
        constraints = []
        if model.rows:
            A, rlb, rub = _sparse_matrix(model)
            constraints.append(LinearConstraint(A, rlb, rub))
        res = milp(
            c=np.asarray(model.obj),
            constraints=constraints,
            integrality=np.asarray(model.binary, dtype=int),
            bounds=(np.asarray(model.lb), np.asarray(model.ub)),
            options={"mip_rel_gap": gap_tol},
        )
        if res.status == 2:
            return LpSolution(STATUS_INFEASIBLE)
        if res.status == 3:
            return LpSolution(STATUS_UNBOUNDED)
        if res.status == 1:
            sol = LpSolution(STATUS_ITERATION_LIMIT)
            if res.x is not None:
                sol.x = _round_binaries(model, res.x)
                sol.objective = float(res.fun)
            return sol
        if res.status != 0:
            raise LpError(f"HiGHS MILP failure: {res.message}")
        x = _round_binaries(model, res.x)
        return LpSolution(STATUS_OPTIMAL, x, float(res.fun))


def _sparse_matrix(model):
    data, ri, ci = [], [], []
    rlb = np.empty(model.n_rows)
    rub = np.empty(model.n_rows)
    for i, (_, coeffs, lo, hi) in enumerate(model.rows):
        for j, v in coeffs.items():
            ri.append(i)
            ci.append(j)
            data.append(v)
        rlb[i] = lo
        rub[i] = hi
    A = sparse.csr_matrix((data, (ri, ci)), shape=(model.n_rows, model.n_vars))
    return A, rlb, rub


def _round_binaries(model, x):
    x = np.array(x, dtype=float)
    for j, is_bin in enumerate(model.binary):
        if is_bin:
            r = round(x[j])
            if abs(x[j] - r) > 1e-6:
                raise LpError(
                    f"binary variable {model.var_names[j]} not integral: {x[j]}"
                )
            x[j] = r
    return x


def get_backend(name="highs"):
    if name == "highs":
        return HighsBackend()
    if name == "internal":
        from .simplex import InternalBackend

        return InternalBackend()
    raise ValueError(f"unknown backend '{name}' (expected 'highs' or 'internal')")
