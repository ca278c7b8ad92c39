"""Positive lower envelopes: LP oracle, constructors and classification."""

from __future__ import annotations

from .constructors import laminar_crossing, ple1_matching, ple2_flow, ple_laminar, supermodular_ple
from .envelope import (
    HierarchyLevel,
    PleWitness,
    envelope_violation,
    is_valid_ple,
    kfrac_cover_value,
    kfrac_subadditive_check,
    mph_level,
    ple_exists,
    ple_level,
    ple_lp_witness,
    ple_max_lp,
)
from .symmetric import (
    SymmetricLpCertificate,
    canonical_symmetric_ple,
    closed_form_dual,
    dual_residual,
    symmetric_mph_level,
    symmetric_worstcase_lp,
)

__all__ = [
    "HierarchyLevel",
    "PleWitness",
    "SymmetricLpCertificate",
    "canonical_symmetric_ple",
    "closed_form_dual",
    "dual_residual",
    "envelope_violation",
    "is_valid_ple",
    "kfrac_cover_value",
    "kfrac_subadditive_check",
    "laminar_crossing",
    "mph_level",
    "ple1_matching",
    "ple2_flow",
    "ple_exists",
    "ple_laminar",
    "ple_level",
    "ple_lp_witness",
    "ple_max_lp",
    "supermodular_ple",
    "symmetric_mph_level",
    "symmetric_worstcase_lp",
]
