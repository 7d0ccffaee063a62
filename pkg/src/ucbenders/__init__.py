"""Learning-assisted multi-cut Benders decomposition for two-stage stochastic SCUC."""

from .backends import get_backend
from .benders import BendersConfig, RunReport, cost_gap, run
from .cuts import Cut, CutPool, cut_value, filter_by_criterion, apply_retention, pool_stats
from .formulations import (
    Commitment,
    benders_gap,
    build_extensive_form,
    build_master,
    commitment_from_u,
    solve_subproblem,
)
from .scenarios import ScenarioConfig, ScenarioSet, draw_sample, draw_scenarios
from .system import (
    SystemCase,
    build_shift_factors,
    compute_ptdf,
    enumerate_contingencies,
    load_case,
    save_case,
)

__version__ = "0.1.0"
