"""Simultaneous single-item auctions: simulation, learning and equilibrium checks."""

from .learning import (
    ActionSet,
    EmpiricalCce,
    LearningConfig,
    build_action_set,
    candidate_bundles,
    cce_metrics,
    counterfactual_utilities,
    menu_description,
    no_regret_learn,
)
from .lower_bound import NeReport, NeStrategy, closed_form_utility, poa_lb_instance, verify_mixed_ne
from .simulator import RULES, AuctionOutcome, BidProfile, check_rule, item_payments, run_auction
from .smoothness import (
    DEVIATIONS,
    SmoothnessReport,
    density_deviation_utility,
    sample_profiles,
    smoothness_check,
)

__all__ = [
    "ActionSet",
    "AuctionOutcome",
    "BidProfile",
    "DEVIATIONS",
    "EmpiricalCce",
    "LearningConfig",
    "NeReport",
    "NeStrategy",
    "RULES",
    "SmoothnessReport",
    "build_action_set",
    "candidate_bundles",
    "cce_metrics",
    "check_rule",
    "closed_form_utility",
    "counterfactual_utilities",
    "density_deviation_utility",
    "item_payments",
    "menu_description",
    "no_regret_learn",
    "poa_lb_instance",
    "run_auction",
    "sample_profiles",
    "smoothness_check",
    "verify_mixed_ne",
]
