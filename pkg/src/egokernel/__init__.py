"""Symbolic kernel for a self-referential finite-set language and a homeostatic simulator built on it."""

from .assembly import (
    EMPTY,
    Assembly,
    EFormula,
    Limits,
    SentenceClass,
    TruthValue,
    classify,
    desugar,
    ef,
    eval_truth,
    is_member,
    normalize,
    parse,
    parse_formula,
    render,
    set_equal,
    wrap,
)
from .errors import DomainError, EgoError, ParseError, ResourceError, ScenarioError

__version__ = "0.1.0"
