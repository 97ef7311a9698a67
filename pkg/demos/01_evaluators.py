"""
Relational evaluators
=====================

Build the equality evaluator of two formulas, read it as a sentence and
classify it. Equal arguments give a tautology, anything else a
contradiction.
"""

from __future__ import annotations

from egokernel import classify, parse_formula
from egokernel.evaluator import (
    equality_evaluator,
    equality_expression,
    intersection,
    membership_evaluator,
    reconstruct_arguments,
    render_expr,
)

# Two small formulas; 0 is the empty symbol.
x = parse_formula("{0}")
y = parse_formula("{0,{0}}")

# The sugared expansion keeps the nested equalities readable.
print(render_expr(equality_expression(x, y)))
print("x = y is a", classify(equality_evaluator(x, y)).value)
print("x = x is a", classify(equality_evaluator(x, x)).value)

# The evaluator carries its own arguments.
a, b = reconstruct_arguments(equality_evaluator(x, y))
print("recovered:", a.render, b.render)

# Membership and intersection are built from equality.
print("x in y is a", classify(membership_evaluator(x, y)).value)
cap = intersection(y, parse_formula("{{0},{{0}}}"), verify=True)
print("intersection:", cap.value.render, "verified:", cap.verified)
