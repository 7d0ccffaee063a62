"""Self-contained dense two-phase simplex and branch-and-bound.

Independent of the HiGHS adapter so that solver results can be
cross-checked against a second implementation.  Dense tableau with
Bland's rule; intended for desk-scale models only.
"""

from __future__ import annotations

import numpy as np

from .lp import (
    INF,
    LpError,
    LpModel,
    LpSolution,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    STATUS_UNBOUNDED,
)

_TOL = 1e-9
_MAX_PIVOTS = 200_000


class _Standard:
    """min c.z  s.t.  G z = h, z >= 0, after slack/artificial augmentation."""

    def __init__(self, model: LpModel):
        n = model.n_vars
        # column mapping: each original var -> (col_plus, col_minus or -1, offset)
        self.colmap = []
        cols = 0
        for j in range(n):
            lo = model.lb[j]
            if lo > -INF:
                self.colmap.append((cols, -1, lo))
                cols += 1
            else:
                self.colmap.append((cols, cols + 1, 0.0))
                cols += 2
        self.n_struct = cols

        c = np.zeros(cols)
        self.obj_const = 0.0
        for j in range(n):
            cp, cm, off = self.colmap[j]
            c[cp] = model.obj[j]
            if cm >= 0:
                c[cm] = -model.obj[j]
            self.obj_const += model.obj[j] * off
        self.c = c

        # rows: (coeffs over struct cols, sense, rhs, orig_row, orig_sign)
        # orig_row = -1 for synthetic upper-bound rows
        rows = []
        for j in range(n):
            hi = model.ub[j]
            if hi < INF:
                cp, cm, off = self.colmap[j]
                coeffs = {cp: 1.0}
                if cm >= 0:
                    coeffs[cm] = -1.0
                rows.append((coeffs, "<=", hi - off, -1, 0.0))
        for r, (_, coeffs, lo, hi) in enumerate(model.rows):
            shift = sum(v * self.colmap[j][2] for j, v in coeffs.items())
            mapped = {}
            for j, v in coeffs.items():
                cp, cm, _ = self.colmap[j]
                mapped[cp] = mapped.get(cp, 0.0) + v
                if cm >= 0:
                    mapped[cm] = mapped.get(cm, 0.0) - v
            if lo == hi:
                rows.append((mapped, "=", lo - shift, r, 1.0))
            else:
                if hi < INF:
                    rows.append((mapped, "<=", hi - shift, r, 1.0))
                if lo > -INF:
                    rows.append((dict(mapped), ">=", lo - shift, r, 1.0))
        self.rows = rows

    def recover_x(self, z, n):
        x = np.empty(n)
        for j in range(n):
            cp, cm, off = self.colmap[j]
            x[j] = z[cp] + off - (z[cm] if cm >= 0 else 0.0)
        return x


def _pivot(T, basis, r, col):
    T[r] /= T[r, col]
    for i in range(T.shape[0]):
        if i != r and abs(T[i, col]) > _TOL:
            T[i] -= T[i, col] * T[r]
    basis[r] = col


def _run_simplex(T, basis, n_cols):
    """Minimize the objective in the last row of tableau T; Bland's rule."""
    m = T.shape[0] - 1
    for _ in range(_MAX_PIVOTS):
        col = -1
        for j in range(n_cols):
            if T[m, j] < -_TOL:
                col = j
                break
        if col < 0:
            return STATUS_OPTIMAL
        ratio, row = None, -1
        for i in range(m):
            if T[i, col] > _TOL:
                r = T[i, -1] / T[i, col]
                if ratio is None or r < ratio - _TOL or (
                    abs(r - ratio) <= _TOL and basis[i] < basis[row]
                ):
                    ratio, row = r, i
        if row < 0:
            return STATUS_UNBOUNDED
        _pivot(T, basis, row, col)
    raise LpError("simplex pivot limit exceeded")


def solve_lp_internal(model: LpModel) -> LpSolution:
    if model.has_binaries:
        raise LpError("solve_lp called on a model with binary variables")
    std = _Standard(model)
    m = len(std.rows)
    ns = std.n_struct

    G = np.zeros((m, ns))
    h = np.empty(m)
    senses = []
    row_sign = np.ones(m)  # -1 if the row was negated to make h >= 0
    for i, (coeffs, sense, rhs, _, _) in enumerate(std.rows):
        for j, v in coeffs.items():
            G[i, j] = v
        h[i] = rhs
        senses.append(sense)
    for i in range(m):
        if h[i] < 0:
            G[i] *= -1
            h[i] *= -1
            row_sign[i] = -1
            if senses[i] == "<=":
                senses[i] = ">="
            elif senses[i] == ">=":
                senses[i] = "<="

    # augment: slacks for <=, surplus+artificial for >=, artificial for =
    slack_col = {}
    art_col = {}
    cols = ns
    for i in range(m):
        if senses[i] == "<=":
            slack_col[i] = cols
            cols += 1
        elif senses[i] == ">=":
            slack_col[i] = cols
            art_col[i] = cols + 1
            cols += 2
        else:
            art_col[i] = cols
            cols += 1

    A = np.zeros((m, cols))
    A[:, :ns] = G
    basis = np.empty(m, dtype=int)
    for i in range(m):
        if senses[i] == "<=":
            A[i, slack_col[i]] = 1.0
            basis[i] = slack_col[i]
        elif senses[i] == ">=":
            A[i, slack_col[i]] = -1.0
            A[i, art_col[i]] = 1.0
            basis[i] = art_col[i]
        else:
            A[i, art_col[i]] = 1.0
            basis[i] = art_col[i]

    artificials = set(art_col.values())

    # phase 1
    T = np.zeros((m + 1, cols + 1))
    T[:m, :cols] = A
    T[:m, -1] = h
    for i in range(m):
        if basis[i] in artificials:
            T[m] -= T[i]
    T[m, list(artificials)] = 0.0
    status = _run_simplex(T, basis, cols)
    if status != STATUS_OPTIMAL or T[m, -1] < -1e-7:
        return LpSolution(STATUS_INFEASIBLE)

    # drive remaining artificials out of the basis if possible
    for i in range(m):
        if basis[i] in artificials:
            for j in range(ns):
                if j not in artificials and abs(T[i, j]) > 1e-7:
                    _pivot(T, basis, i, j)
                    break

    # phase 2
    c_full = np.zeros(cols)
    c_full[:ns] = std.c
    T[m, :] = 0.0
    T[m, :cols] = c_full
    for i in range(m):
        if abs(c_full[basis[i]]) > 0:
            T[m] -= c_full[basis[i]] * T[i]
    for j in artificials:
        T[m, j] = 1e30  # keep artificials out
    status = _run_simplex(T, basis, cols)
    if status == STATUS_UNBOUNDED:
        return LpSolution(STATUS_UNBOUNDED)

    z = np.zeros(cols)
    for i in range(m):
        z[basis[i]] = T[i, -1]
    x = std.recover_x(z, model.n_vars)
    obj = float(std.c @ z[:ns] + std.obj_const)

    # duals: y = c_B B^-1 on the standard rows, mapped back to model rows
    B = A[:, basis]
    cB = c_full[basis]
    y = np.linalg.solve(B.T, cB)
    duals = np.zeros(model.n_rows)
    for i, (_, _, _, orig, osign) in enumerate(std.rows):
        if orig >= 0:
            duals[orig] += osign * row_sign[i] * y[i]
    return LpSolution(STATUS_OPTIMAL, x, obj, duals)


def solve_milp_internal(model: LpModel, gap_tol=1e-6) -> LpSolution:
    binaries = [j for j, b in enumerate(model.binary) if b]
    relax = LpModel(model.name, list(model.obj), list(model.lb), list(model.ub),
                    [False] * model.n_vars, list(model.var_names), list(model.rows))

    best = {"obj": INF, "x": None}
    int_tol = 1e-6

    def recurse(lb, ub):
        relax.lb, relax.ub = lb, ub
        sol = solve_lp_internal(relax)
        if sol.status == STATUS_INFEASIBLE:
            return
        if sol.status == STATUS_UNBOUNDED:
            raise LpError("unbounded LP relaxation in branch-and-bound")
        if sol.objective >= best["obj"] - max(gap_tol * abs(best["obj"]), 1e-9):
            return
        frac_j, frac_d = -1, int_tol
        for j in binaries:
            d = abs(sol.x[j] - round(sol.x[j]))
            if d > frac_d:
                frac_j, frac_d = j, d
        if frac_j < 0:
            x = sol.x.copy()
            for j in binaries:
                x[j] = round(x[j])
            best["obj"], best["x"] = sol.objective, x
            return
        v = sol.x[frac_j]
        lo, hi = list(lb), list(ub)
        # branch down first
        hi2 = list(hi)
        hi2[frac_j] = float(np.floor(v))
        lo2 = list(lo)
        lo2[frac_j] = float(np.ceil(v))
        recurse(lo, hi2)
        recurse(lo2, hi)

    recurse(list(model.lb), list(model.ub))
    if best["x"] is None:
        return LpSolution(STATUS_INFEASIBLE)
    return LpSolution(STATUS_OPTIMAL, best["x"], float(best["obj"]))


class InternalBackend:
    name = "internal"

    def solve_lp(self, model):
        return solve_lp_internal(model)

    def solve_milp(self, model, gap_tol=1e-6):
        return solve_milp_internal(model, gap_tol)
