"""Set-function hierarchy tools: classification, welfare LPs and auction simulation.

Subpackages and modules:

``setfn``      set functions over bitmask item sets, transforms and property checks
``ple``        positive lower envelopes, hierarchy levels and symmetric certificates
``welfare``    exact optimum, configuration LP and random-permutation rounding
``auction``    simultaneous single-item auctions, learning and equilibrium checks
``instances``  named valuations and seeded random generators
``cli``        the ``mphk`` command
"""

from __future__ import annotations

from .errors import (
    CapacityError,
    InvalidInput,
    MphkError,
    PreconditionError,
    SolverError,
    VerificationError,
)
from .setfn import (
    ExplicitValuation,
    Hypergraph,
    MphValuation,
    SymmetricValuation,
    check_properties,
    from_hypergraph,
    ranks,
    supermodular_degree,
    to_hypergraph,
    to_items,
    to_mask,
)
from .welfare import (
    Allocation,
    AuctionInstance,
    estimate_rounded_welfare,
    integrality_gap_instance,
    optimal_welfare,
    solve_config_lp,
)

__version__ = "0.1.0"

__all__ = [
    "Allocation",
    "AuctionInstance",
    "CapacityError",
    "ExplicitValuation",
    "Hypergraph",
    "InvalidInput",
    "MphValuation",
    "MphkError",
    "PreconditionError",
    "SolverError",
    "SymmetricValuation",
    "VerificationError",
    "check_properties",
    "estimate_rounded_welfare",
    "from_hypergraph",
    "integrality_gap_instance",
    "optimal_welfare",
    "ranks",
    "solve_config_lp",
    "supermodular_degree",
    "to_hypergraph",
    "to_items",
    "to_mask",
]
