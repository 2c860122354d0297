"""Finite-domain valued structures, expressions and exact minimization."""

from .expression import (BOT, EQ, Atom, Expression, Feas, Node, Opt, PPDefinition, PPPowerSpec,
                         Project, Scale, Shift, Sum, atom, crisp_atom, pp_reduce)
from .relations import (ValuedRelation, ValuedStructure, clone_op, feas, gamma_mc, oit_structure,
                        opt, project, scale, shift, structure_from_dict, structure_from_json,
                        structure_to_dict, valued_dual)
from .solver import Solution, brute_min_cost, evaluate, min_cost
from .translate import resilience_to_vcsp, vcsp_to_resilience
from .values import INF, format_value, is_finite, to_value

__all__ = [
    "BOT", "EQ", "INF", "Atom", "Expression", "Feas", "Node", "Opt", "PPDefinition", "PPPowerSpec",
    "Project", "Scale", "Shift", "Solution", "Sum", "ValuedRelation", "ValuedStructure", "atom",
    "brute_min_cost", "clone_op", "crisp_atom", "evaluate", "feas", "format_value", "gamma_mc",
    "is_finite", "min_cost", "oit_structure", "opt", "pp_reduce", "project", "resilience_to_vcsp",
    "scale", "shift", "structure_from_dict", "structure_from_json", "structure_to_dict", "to_value",
    "valued_dual", "vcsp_to_resilience",
]
