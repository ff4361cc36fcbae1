"""Simulation and analysis of strategic play in cryptographic self-selection leader election."""

from .analytics import (
    RECURRENCE_THRESHOLD,
    expected_stop_bound,
    honest_revenue,
    lookahead_revenue,
    revenue_upper_bound,
    tail_bound,
)
from .branching import forced_stop_stats, grow_tree, tree_height
from .errors import (
    CSSPAError,
    DivergenceError,
    DomainError,
    NonRecurrenceError,
    ProtocolViolation,
    QueryDisabled,
    ResourceError,
    TieError,
    UnsupportedConfiguration,
)
from .estimator import RevenueEstimate, estimate_revenue
from .game import Engine, GameParams, play_round, run_cycles
from .mdp import TreePolicyStrategy, best_value, solve_optimal_rho, value_of_policy
from .strategies import HonestStrategy, LookaheadStrategy, Strategy, make_strategy

__version__ = "0.1.0"

__all__ = [
    "CSSPAError",
    "DivergenceError",
    "DomainError",
    "Engine",
    "GameParams",
    "HonestStrategy",
    "LookaheadStrategy",
    "NonRecurrenceError",
    "ProtocolViolation",
    "QueryDisabled",
    "RECURRENCE_THRESHOLD",
    "ResourceError",
    "RevenueEstimate",
    "Strategy",
    "TieError",
    "TreePolicyStrategy",
    "UnsupportedConfiguration",
    "best_value",
    "estimate_revenue",
    "expected_stop_bound",
    "forced_stop_stats",
    "grow_tree",
    "honest_revenue",
    "lookahead_revenue",
    "make_strategy",
    "play_round",
    "revenue_upper_bound",
    "run_cycles",
    "solve_optimal_rho",
    "tail_bound",
    "tree_height",
    "value_of_policy",
]
