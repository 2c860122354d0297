"""Hardness reductions, their gadgets, and machine checks of the gadget claims."""

from .duals import DualCandidate, DualReport, builtin_dual_for_path, path_query, user_dual, validate_dual
from .flatten import ReductionArtifact, flatten, label_text, load_artifact
from .maxcut import (MaxcutMaps, chain_definition, maxcut_brute, maxcut_maps, maxcut_reduction,
                     maxcut_value)
from .psi import (CLAIMED_OPTIMA, ROLES, CycleDecomposition, OITReduction, PsiGadgets,
                  WitnessStructureA, build_psi_gadgets, build_witness_structure, closed_walk,
                  decompose_cycle, oit_reduction, oit_satisfying, verify_gadget_optima)
from .selfjoin import check_lift_preconditions, self_join_lift
from .tournament import (EdgeTypeCase, edge_type_cases, is_tournament, majo_type, mino_type,
                         power_tournament, random_tournament, tournament_polymorphism_check)

__all__ = [
    "CLAIMED_OPTIMA", "ROLES", "CycleDecomposition", "DualCandidate", "DualReport", "EdgeTypeCase",
    "MaxcutMaps", "OITReduction", "PsiGadgets", "ReductionArtifact", "WitnessStructureA",
    "build_psi_gadgets", "build_witness_structure", "builtin_dual_for_path", "chain_definition",
    "check_lift_preconditions", "closed_walk", "decompose_cycle", "edge_type_cases", "flatten",
    "is_tournament", "label_text", "load_artifact", "majo_type", "maxcut_brute", "maxcut_maps",
    "maxcut_reduction", "maxcut_value", "mino_type", "oit_reduction", "oit_satisfying", "path_query",
    "power_tournament", "random_tournament", "self_join_lift", "tournament_polymorphism_check",
    "user_dual", "validate_dual", "verify_gadget_optima",
]
