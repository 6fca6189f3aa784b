"""Optimal control of two competing SIS epidemics on complex networks.

The network enters only through its degree distribution (degree-based
mean-field model). Under a constant curing effort ``u`` the two strains never
coexist at steady state, so the cost-optimal ``u`` is found regime by regime.
"""

__version__ = "0.1.0"

from .dynamics import (
    ControlEffort,
    EpidemicParams,
    MeanFieldState,
    effective_spreading_rate,
    integrate,
)
from .equilibrium import (
    EquilibriumState,
    Regime,
    classify,
    exclusive_severity,
    reproduction_numbers,
    solve_theta_star,
    steady_state,
)
from .errors import EpicureError, ParseError, ValidationError
from .network import (
    DegreeDistribution,
    ba_degree_sequence,
    from_histogram,
    from_moments,
    power_law,
    regular,
)
from .optimizer import (
    CostModel,
    feasible_region,
    solve_disease_free,
    solve_exclusive,
    solve_global,
)
from .scenarios import Scenario, bundled_scenario, cross_apply, load_scenario
from .switching import fulfilling_threshold, predict_switching_pattern, symmetric_sweep

__all__ = [
    "ControlEffort",
    "CostModel",
    "DegreeDistribution",
    "EpicureError",
    "EpidemicParams",
    "EquilibriumState",
    "MeanFieldState",
    "ParseError",
    "Regime",
    "Scenario",
    "ValidationError",
    "ba_degree_sequence",
    "bundled_scenario",
    "classify",
    "cross_apply",
    "effective_spreading_rate",
    "exclusive_severity",
    "feasible_region",
    "from_histogram",
    "from_moments",
    "fulfilling_threshold",
    "integrate",
    "load_scenario",
    "power_law",
    "predict_switching_pattern",
    "regular",
    "reproduction_numbers",
    "solve_disease_free",
    "solve_exclusive",
    "solve_global",
    "solve_theta_star",
    "steady_state",
    "symmetric_sweep",
]
