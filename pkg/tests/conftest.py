import numpy as np
import pytest

from ucbenders.backends import get_backend
from ucbenders.cases import builtin_case
from ucbenders.scenarios import ScenarioConfig, ScenarioSet, draw_scenarios
from ucbenders.system import build_shift_factors


@pytest.fixture(scope="session")
def highs():
    return get_backend("highs")


@pytest.fixture(scope="session")
def internal():
    return get_backend("internal")


@pytest.fixture(scope="session")
def desk1():
    return builtin_case("desk1")


@pytest.fixture(scope="session")
def desk1_sf(desk1):
    return build_shift_factors(desk1)


@pytest.fixture(scope="session")
def tiny2():
    return builtin_case("tiny2")


def make_scen(case, n=3, seed=0, lo=0.95, hi=1.05):
    cfg = ScenarioConfig(n_scenarios=n, scenario_low=lo, scenario_high=hi, seed=seed)
    return draw_scenarios(case.base_demand, cfg)


def fixed_scen(case) -> ScenarioSet:
    """Single scenario equal to the base demand."""
    return ScenarioSet([np.array(case.base_demand)], np.array([1.0]))
