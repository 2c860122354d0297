"""Resilience of unions of conjunctive queries over binary signatures.

Parsing and normalizing queries, classifying resilience as polynomial or
NP-complete, exact solvers with a brute-force oracle, a valued CSP engine,
and machine-checked hardness reductions.
"""

from .classify import Verdict, classify, classify_text
from .errors import GuardExceeded, InputError, VerificationError
from .kernels import BACKEND
from .query import UCQ, ConjunctiveQuery, holds, minimize, normalize, parse_ucq
from .resilience import (ResilienceResult, decide, resilience, resilience_brute, resilience_exact,
                         resilience_poly)
from .structures import BagDatabase, FiniteStructure, Signature, find_homomorphism, read_graph

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BagDatabase", "ConjunctiveQuery", "FiniteStructure", "GuardExceeded", "InputError",
    "ResilienceResult", "Signature", "UCQ", "Verdict", "VerificationError", "classify",
    "classify_text", "decide", "find_homomorphism", "holds", "minimize", "normalize", "parse_ucq",
    "read_graph", "resilience", "resilience_brute", "resilience_exact", "resilience_poly",
]
