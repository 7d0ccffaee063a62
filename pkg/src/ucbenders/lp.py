"""Generic LP/MILP model container shared by all solver backends.

Models are built incrementally (add_var / add_row) and handed to a backend
for solving.  Rows are stored in ranged form ``row_lb <= a.x <= row_ub``;
equalities have row_lb == row_ub.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

INF = float("inf")

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_ITERATION_LIMIT = "iteration-limit"


class LpError(Exception):
    """Raised on malformed models or backend failures."""


@dataclass
class LpModel:
    name: str = "model"
    obj: list = field(default_factory=list)
    lb: list = field(default_factory=list)
    ub: list = field(default_factory=list)
    binary: list = field(default_factory=list)
    var_names: list = field(default_factory=list)
    # each row: (name, {var_index: coef}, row_lb, row_ub)
    rows: list = field(default_factory=list)

    @property
    def n_vars(self):
        return len(self.obj)

    @property
    def n_rows(self):
        return len(self.rows)

    @property
    def has_binaries(self):
        return any(self.binary)

    def add_var(self, name, lb=0.0, ub=INF, obj=0.0, binary=False):
        if binary:
            lb, ub = 0.0, 1.0
        if lb > ub:
            raise LpError(f"variable {name}: lb {lb} > ub {ub}")
        self.var_names.append(name)
        self.lb.append(float(lb))
        self.ub.append(float(ub))
        self.obj.append(float(obj))
        self.binary.append(bool(binary))
        return len(self.obj) - 1

    def add_row(self, name, coeffs, lb=-INF, ub=INF):
        if lb > ub:
            raise LpError(f"row {name}: lb {lb} > ub {ub}")
        n = self.n_vars
        for j in coeffs:
            if not 0 <= j < n:
                raise LpError(f"row {name} references undeclared variable {j}")
        self.rows.append((name, dict(coeffs), float(lb), float(ub)))
        return len(self.rows) - 1

    def set_obj(self, idx, coef):
        self.obj[idx] = float(coef)

    def row_index(self, name):
        for i, (rname, _, _, _) in enumerate(self.rows):
            if rname == name:
                return i
        raise KeyError(name)

    def dense_matrix(self):
        """Dense (A, row_lb, row_ub) arrays; for small models and debugging."""
        A = np.zeros((self.n_rows, self.n_vars))
        rlb = np.empty(self.n_rows)
        rub = np.empty(self.n_rows)
        for i, (_, coeffs, lo, hi) in enumerate(self.rows):
            for j, v in coeffs.items():
                A[i, j] = v
            rlb[i] = lo
            rub[i] = hi
        return A, rlb, rub

    def write_lp(self, path):
        """Export in CPLEX LP text format for inspection with external tools."""
        with open(path, "w") as fh:
            fh.write(f"\\ {self.name}\nMinimize\n obj:")
            for j, c in enumerate(self.obj):
                if c:
                    fh.write(f" {'+' if c >= 0 else '-'} {abs(c):.12g} {self.var_names[j]}")
            fh.write("\nSubject To\n")
            for name, coeffs, lo, hi in self.rows:
                terms = "".join(
                    f" {'+' if v >= 0 else '-'} {abs(v):.12g} {self.var_names[j]}"
                    for j, v in sorted(coeffs.items())
                )
                if lo == hi:
                    fh.write(f" {name}:{terms} = {lo:.12g}\n")
                else:
                    if hi < INF:
                        fh.write(f" {name}_u:{terms} <= {hi:.12g}\n")
                    if lo > -INF:
                        fh.write(f" {name}_l:{terms} >= {lo:.12g}\n")
            fh.write("Bounds\n")
            for j in range(self.n_vars):
                fh.write(f" {self.lb[j]:.12g} <= {self.var_names[j]} <= {self.ub[j]:.12g}\n")
            if self.has_binaries:
                fh.write("Binary\n")
                for j in range(self.n_vars):
                    if self.binary[j]:
                        fh.write(f" {self.var_names[j]}\n")
            fh.write("End\n")


@dataclass
class LpSolution:
    status: str
    x: np.ndarray = None
    objective: float = None
    # dual value per row, aligned with LpModel.rows; LP solves only
    duals: np.ndarray = None

    @property
    def is_optimal(self):
        return self.status == STATUS_OPTIMAL

    def value(self, idx):
        return float(self.x[idx])
