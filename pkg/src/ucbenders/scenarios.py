"""Two-stage demand randomness: profile samples and per-sample scenarios.

A profile sample applies one uniform scale factor to the whole base demand
matrix; each scenario then perturbs the sample entry-wise (hourly, and by
default per-bus).  Draws come from a counter-based generator keyed by
(seed, sample, scenario), so results do not depend on iteration order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class ScenarioError(Exception):
    pass


@dataclass
class ScenarioConfig:
    sample_low: float = 0.70
    sample_high: float = 1.30
    scenario_low: float = 0.95
    scenario_high: float = 1.05
    n_scenarios: int = 40
    n_samples: int = 1
    seed: int = 0
    per_bus: bool = True  # False: one scenario factor per hour, shared by buses

    def validate(self):
        if not 0 < self.sample_low <= self.sample_high:
            raise ScenarioError("need 0 < sample_low <= sample_high")
        if not 0 < self.scenario_low <= self.scenario_high:
            raise ScenarioError("need 0 < scenario_low <= scenario_high")
        if self.n_scenarios < 1 or self.n_samples < 1:
            raise ScenarioError("n_scenarios and n_samples must be >= 1")


@dataclass
class ScenarioSet:
    demands: list  # n matrices, each bus x hour
    probabilities: np.ndarray

    def __post_init__(self):
        self.probabilities = np.asarray(self.probabilities, dtype=float)
        if len(self.demands) != len(self.probabilities):
            raise ScenarioError("probability count does not match scenario count")
        if abs(self.probabilities.sum() - 1.0) > 1e-9:
            raise ScenarioError("probabilities must sum to 1")
        for d in self.demands:
            if (np.asarray(d) < 0).any():
                raise ScenarioError("scenario demand must be non-negative")

    @property
    def n(self):
        return len(self.demands)

    def total_energy(self, w):
        """Sum of demand over all buses and hours for scenario w, MW·h."""
        return float(np.asarray(self.demands[w]).sum())

    def demand_rank(self, w):
        """Rank of scenario w by total energy; 0 = highest load."""
        totals = [self.total_energy(i) for i in range(self.n)]
        order = sorted(range(self.n), key=lambda i: (-totals[i], i))
        return order.index(w)


def _rng(seed, *key):
    if len(key) > 3:
        raise ValueError("at most three stream identifiers")
    counter = np.zeros(4, dtype=np.uint64)
    counter[1 : 1 + len(key)] = key
    bg = np.random.Philox(key=np.array([seed, 0], dtype=np.uint64), counter=counter)
    return np.random.Generator(bg)


def draw_sample(base_demand, cfg: ScenarioConfig, sample_index=0) -> np.ndarray:
    """One scalar uniform scale in [sample_low, sample_high] on the whole profile."""
    cfg.validate()
    eta = _rng(cfg.seed, 1, sample_index).uniform()
    scale = cfg.sample_low + eta * (cfg.sample_high - cfg.sample_low)
    return np.asarray(base_demand, dtype=float) * scale


def draw_scenarios(sample_demand, cfg: ScenarioConfig, sample_index=0) -> ScenarioSet:
    """n equiprobable scenarios; independent uniform factor per hour (and bus)."""
    cfg.validate()
    sample_demand = np.asarray(sample_demand, dtype=float)
    nb, T = sample_demand.shape
    demands = []
    for w in range(cfg.n_scenarios):
        rng = _rng(cfg.seed, 2, sample_index, w)
        if cfg.per_bus:
            eta = rng.uniform(size=(nb, T))
        else:
            eta = np.tile(rng.uniform(size=(1, T)), (nb, 1))
        scale = cfg.scenario_low + eta * (cfg.scenario_high - cfg.scenario_low)
        demands.append(sample_demand * scale)
    probs = np.full(cfg.n_scenarios, 1.0 / cfg.n_scenarios)
    return ScenarioSet(demands, probs)


def save_scenarios(scen: ScenarioSet, buses, path):
    """Columnar text: one row per scenario x hour x bus."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "hour", "bus", "demand_mw", "probability"])
        for s, d in enumerate(scen.demands):
            d = np.asarray(d)
            for t in range(d.shape[1]):
                for bi, bus in enumerate(buses):
                    w.writerow([s, t, bus, f"{d[bi, t]:.10g}", f"{scen.probabilities[s]:.10g}"])


def load_scenarios(path, buses, horizon) -> ScenarioSet:
    bus_index = {b: i for i, b in enumerate(buses)}
    data = {}
    probs = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            s = int(row["scenario"])
            t = int(row["hour"])
            b = row["bus"]
            if b not in bus_index:
                raise ScenarioError(f"scenario file references unknown bus {b}")
            data.setdefault(s, np.zeros((len(buses), horizon)))[bus_index[b], t] = float(
                row["demand_mw"]
            )
            probs[s] = float(row["probability"])
    if not data:
        raise ScenarioError(f"no scenario rows in {path}")
    ids = sorted(data)
    if ids != list(range(len(ids))):
        raise ScenarioError("scenario ids must be contiguous from 0")
    return ScenarioSet([data[s] for s in ids], np.array([probs[s] for s in ids]))
