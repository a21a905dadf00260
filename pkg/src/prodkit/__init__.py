"""Infinite products of positive reals, evaluated in the log domain."""
from .accum import (
    Kind, Verdict, Trace, LogAccumulator, partial_products, estimate_convergence,
    m_absolute_verdict, weighted_geometric_means, oracle_compare,
)
from .errors import (
    DomainError, EvaluationError, ExprSyntaxError, HypothesisError, HypothesisWarning,
    ProdkitError, UnknownIdentifierError,
)
from .expr import parse_seq, to_text
from .modulus import mmod, mparts
from .seq import as_seq, eval_term, exponentiate, interleave_blocks, mask_subproduct, permute

__all__ = [
    "Kind", "Verdict", "Trace", "LogAccumulator", "partial_products", "estimate_convergence",
    "m_absolute_verdict", "weighted_geometric_means", "oracle_compare",
    "DomainError", "EvaluationError", "ExprSyntaxError", "HypothesisError", "HypothesisWarning",
    "ProdkitError", "UnknownIdentifierError",
    "parse_seq", "to_text", "mmod", "mparts",
    "as_seq", "eval_term", "exponentiate", "interleave_blocks", "mask_subproduct", "permute",
]

__version__ = "0.1.0"
