"""Grid data model: case files, DC shift factors, N-1 contingency set."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

BASE_CONTINGENCY = "base"


class CaseError(Exception):
    """Malformed or inconsistent case data."""


@dataclass
class Generator:
    id: str
    bus: str
    p_min: float
    p_max: float
    cost_lin: float
    startup_cost: float
    shutdown_cost: float
    ramp_up: float
    ramp_down: float
    min_up: int
    min_down: int
    # signed hours: > 0 means already on for that many hours, < 0 already off
    initial_status: int

    def validate(self):
        if not 0 <= self.p_min <= self.p_max:
            raise CaseError(f"generator {self.id}: need 0 <= p_min <= p_max")
        if self.startup_cost < 0 or self.shutdown_cost < 0:
            raise CaseError(f"generator {self.id}: negative startup/shutdown cost")
        if self.ramp_up <= 0 or self.ramp_down <= 0:
            raise CaseError(f"generator {self.id}: ramp rates must be positive")
        if self.min_up < 1 or self.min_down < 1:
            raise CaseError(f"generator {self.id}: min up/down times must be >= 1")
        if self.initial_status == 0:
            raise CaseError(f"generator {self.id}: initial_status must be nonzero")

    @property
    def initially_on(self):
        return self.initial_status > 0

    def must_run_hours(self, horizon):
        """Hours at the start of the horizon the unit must stay on (UT)."""
        if not self.initially_on:
            return 0
        return max(0, min(horizon, self.min_up - self.initial_status))

    def must_off_hours(self, horizon):
        """Hours at the start of the horizon the unit must stay off (DT)."""
        if self.initially_on:
            return 0
        return max(0, min(horizon, self.min_down + self.initial_status))


@dataclass
class Line:
    id: str
    from_bus: str
    to_bus: str
    reactance: float
    flow_limit: float
    outage_eligible: bool = True

    def validate(self):
        if self.reactance <= 0:
            raise CaseError(f"line {self.id}: reactance must be positive")
        if self.flow_limit <= 0:
            raise CaseError(f"line {self.id}: flow limit must be positive")
        if self.from_bus == self.to_bus:
            raise CaseError(f"line {self.id}: from and to bus are identical")


@dataclass
class SystemCase:
    buses: list
    generators: list
    lines: list
    horizon: int
    base_demand: np.ndarray  # bus x hour, MW
    reference_bus: str
    name: str = "case"

    def __post_init__(self):
        self.bus_index = {b: i for i, b in enumerate(self.buses)}
        self.validate()

    @property
    def n_buses(self):
        return len(self.buses)

    @property
    def n_gens(self):
        return len(self.generators)

    @property
    def n_lines(self):
        return len(self.lines)

    def validate(self):
        if len(set(self.buses)) != len(self.buses):
            raise CaseError("duplicate bus ids")
        if self.reference_bus not in self.bus_index:
            raise CaseError(f"reference bus {self.reference_bus} not in bus list")
        if self.horizon < 1:
            raise CaseError("horizon must be >= 1")
        seen = set()
        for g in self.generators:
            g.validate()
            if g.id in seen:
                raise CaseError(f"duplicate generator id {g.id}")
            seen.add(g.id)
            if g.bus not in self.bus_index:
                raise CaseError(f"generator {g.id} attached to unknown bus {g.bus}")
        seen = set()
        for ln in self.lines:
            ln.validate()
            if ln.id in seen:
                raise CaseError(f"duplicate line id {ln.id}")
            seen.add(ln.id)
            for b in (ln.from_bus, ln.to_bus):
                if b not in self.bus_index:
                    raise CaseError(f"line {ln.id} references unknown bus {b}")
        self.base_demand = np.asarray(self.base_demand, dtype=float)
        if self.base_demand.shape != (self.n_buses, self.horizon):
            raise CaseError(
                f"demand matrix shape {self.base_demand.shape} does not match "
                f"(buses={self.n_buses}, horizon={self.horizon})"
            )
        if (self.base_demand < 0).any():
            raise CaseError("demand must be non-negative")
        if not _connected(self.n_buses, self._edge_list()):
            raise CaseError("network graph is not connected")

    def _edge_list(self, skip_line=None):
        return [
            (self.bus_index[ln.from_bus], self.bus_index[ln.to_bus])
            for ln in self.lines
            if ln.id != skip_line
        ]

    def total_demand(self, demand=None):
        d = self.base_demand if demand is None else demand
        return float(d.sum())

    def to_dict(self):
        return {
            "name": self.name,
            "horizon": self.horizon,
            "reference_bus": self.reference_bus,
            "buses": list(self.buses),
            "generators": [
                {
                    "id": g.id, "bus": g.bus, "p_min": g.p_min, "p_max": g.p_max,
                    "cost_lin": g.cost_lin, "startup_cost": g.startup_cost,
                    "shutdown_cost": g.shutdown_cost, "ramp_up": g.ramp_up,
                    "ramp_down": g.ramp_down, "min_up": g.min_up,
                    "min_down": g.min_down, "initial_status": g.initial_status,
                }
                for g in self.generators
            ],
            "lines": [
                {
                    "id": ln.id, "from_bus": ln.from_bus, "to_bus": ln.to_bus,
                    "reactance": ln.reactance, "flow_limit": ln.flow_limit,
                    "outage_eligible": ln.outage_eligible,
                }
                for ln in self.lines
            ],
            "demand": {b: self.base_demand[i].tolist() for i, b in enumerate(self.buses)},
        }


def _connected(n_buses, edges):
    if n_buses == 0:
        return False
    adj = [[] for _ in range(n_buses)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {0}
    stack = [0]
    while stack:
        for nb in adj[stack.pop()]:
            if nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == n_buses


_GEN_FIELDS = {
    "id", "bus", "p_min", "p_max", "cost_lin", "startup_cost", "shutdown_cost",
    "ramp_up", "ramp_down", "min_up", "min_down", "initial_status",
}
_LINE_FIELDS = {"id", "from_bus", "to_bus", "reactance", "flow_limit", "outage_eligible"}
_TOP_FIELDS = {"name", "horizon", "reference_bus", "buses", "generators", "lines", "demand"}


def case_from_dict(doc, name=None):
    unknown = set(doc) - _TOP_FIELDS
    if unknown:
        raise CaseError(f"unknown case fields: {sorted(unknown)}")
    for key in ("horizon", "reference_bus", "buses", "generators", "lines", "demand"):
        if key not in doc:
            raise CaseError(f"missing case field '{key}'")
    gens = []
    for gd in doc["generators"]:
        unknown = set(gd) - _GEN_FIELDS
        if unknown:
            raise CaseError(f"generator {gd.get('id', '?')}: unknown fields {sorted(unknown)}")
        gens.append(Generator(
            id=str(gd["id"]), bus=str(gd["bus"]),
            p_min=float(gd["p_min"]), p_max=float(gd["p_max"]),
            cost_lin=float(gd["cost_lin"]),
            startup_cost=float(gd["startup_cost"]),
            shutdown_cost=float(gd["shutdown_cost"]),
            ramp_up=float(gd["ramp_up"]), ramp_down=float(gd["ramp_down"]),
            min_up=int(gd["min_up"]), min_down=int(gd["min_down"]),
            initial_status=int(gd["initial_status"]),
        ))
    lines = []
    for ld in doc["lines"]:
        unknown = set(ld) - _LINE_FIELDS
        if unknown:
            raise CaseError(f"line {ld.get('id', '?')}: unknown fields {sorted(unknown)}")
        lines.append(Line(
            id=str(ld["id"]), from_bus=str(ld["from_bus"]), to_bus=str(ld["to_bus"]),
            reactance=float(ld["reactance"]), flow_limit=float(ld["flow_limit"]),
            outage_eligible=bool(ld.get("outage_eligible", True)),
        ))
    buses = [str(b) for b in doc["buses"]]
    horizon = int(doc["horizon"])
    demand = np.zeros((len(buses), horizon))
    extra = set(doc["demand"]) - set(buses)
    if extra:
        raise CaseError(f"demand given for unknown buses: {sorted(extra)}")
    for i, b in enumerate(buses):
        row = doc["demand"].get(b, [0.0] * horizon)
        if len(row) != horizon:
            raise CaseError(f"demand row for bus {b} has length {len(row)}, expected {horizon}")
        demand[i] = row
    return SystemCase(
        buses=buses, generators=gens, lines=lines, horizon=horizon,
        base_demand=demand, reference_bus=str(doc["reference_bus"]),
        name=name or doc.get("name", "case"),
    )


def load_case(path) -> SystemCase:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CaseError(f"cannot parse case file {path}: {exc}") from exc
    return case_from_dict(doc)


def save_case(case: SystemCase, path):
    with open(path, "w") as fh:
        json.dump(case.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


class IslandingError(CaseError):
    """Removing the requested line disconnects the network."""


def compute_ptdf(case: SystemCase, contingency=None) -> np.ndarray:
    """Shift-factor matrix (line x bus) for the given topology.

    contingency is an outaged line id or None for the base topology.  The
    outaged line keeps its row (all zeros) so that line indexing is stable
    across contingencies.  The reference-bus column is zero.
    """
    if contingency is not None and contingency not in {ln.id for ln in case.lines}:
        raise CaseError(f"unknown contingency line {contingency}")
    active = [ln for ln in case.lines if ln.id != contingency]
    if not _connected(case.n_buses, case._edge_list(skip_line=contingency)):
        raise IslandingError(f"outage of line {contingency} islands the network")

    nb = case.n_buses
    ref = case.bus_index[case.reference_bus]
    B = np.zeros((nb, nb))
    for ln in active:
        i, j = case.bus_index[ln.from_bus], case.bus_index[ln.to_bus]
        b = 1.0 / ln.reactance
        B[i, i] += b
        B[j, j] += b
        B[i, j] -= b
        B[j, i] -= b
    keep = [i for i in range(nb) if i != ref]
    B_red = B[np.ix_(keep, keep)]
    ptdf = np.zeros((case.n_lines, nb))
    Binv = np.linalg.inv(B_red)
    for li, ln in enumerate(case.lines):
        if ln.id == contingency:
            continue
        i, j = case.bus_index[ln.from_bus], case.bus_index[ln.to_bus]
        row = np.zeros(nb - 1)
        b = 1.0 / ln.reactance
        if i != ref:
            row += b * Binv[keep.index(i)]
        if j != ref:
            row -= b * Binv[keep.index(j)]
        ptdf[li, keep] = row
    return ptdf


def dc_flows(case: SystemCase, injections, contingency=None) -> np.ndarray:
    """Reference DC power-flow solve (B theta = P), for cross-checking PTDF.

    injections must be balanced (sum to zero).  Returns per-line MW flows,
    zero on the outaged line.
    """
    injections = np.asarray(injections, dtype=float)
    if abs(injections.sum()) > 1e-6:
        raise CaseError("injections are not balanced")
    nb = case.n_buses
    ref = case.bus_index[case.reference_bus]
    active = [ln for ln in case.lines if ln.id != contingency]
    if not _connected(nb, case._edge_list(skip_line=contingency)):
        raise IslandingError(f"outage of line {contingency} islands the network")
    B = np.zeros((nb, nb))
    for ln in active:
        i, j = case.bus_index[ln.from_bus], case.bus_index[ln.to_bus]
        b = 1.0 / ln.reactance
        B[i, i] += b
        B[j, j] += b
        B[i, j] -= b
        B[j, i] -= b
    keep = [i for i in range(nb) if i != ref]
    theta = np.zeros(nb)
    theta[keep] = np.linalg.solve(B[np.ix_(keep, keep)], injections[keep])
    flows = np.zeros(case.n_lines)
    for li, ln in enumerate(case.lines):
        if ln.id == contingency:
            continue
        i, j = case.bus_index[ln.from_bus], case.bus_index[ln.to_bus]
        flows[li] = (theta[i] - theta[j]) / ln.reactance
    return flows


@dataclass
class ShiftFactorSet:
    """PTDF matrices keyed by contingency id ('base' for the intact grid)."""

    matrices: dict = field(default_factory=dict)
    contingency_ids: list = field(default_factory=list)

    def __getitem__(self, cid):
        return self.matrices[cid]

    def __len__(self):
        return len(self.contingency_ids)


def enumerate_contingencies(case: SystemCase) -> list:
    """Base topology plus every outage-eligible, non-islanding line outage."""
    out = [BASE_CONTINGENCY]
    for ln in case.lines:
        if not ln.outage_eligible:
            continue
        if _connected(case.n_buses, case._edge_list(skip_line=ln.id)):
            out.append(ln.id)
        else:
            log.info("skipping islanding contingency %s", ln.id)
    return out


def build_shift_factors(case: SystemCase, contingencies=None) -> ShiftFactorSet:
    cids = list(contingencies) if contingencies is not None else enumerate_contingencies(case)
    sf = ShiftFactorSet()
    for cid in cids:
        outage = None if cid == BASE_CONTINGENCY else cid
        sf.matrices[cid] = compute_ptdf(case, outage)
        sf.contingency_ids.append(cid)
    return sf
