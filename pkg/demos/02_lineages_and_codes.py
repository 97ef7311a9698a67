"""
Lineages and node codes
=======================

Lineage sets give a quick equality test, but they are not a complete
invariant. Node codes name every position of a drawn tree.
"""

from __future__ import annotations

from egokernel import parse, parse_formula
from egokernel.lineage import code_nodes, fast_equal, lineage_set, nested_signature

u = parse_formula("{0,{{0}},{0,{0}}}")
print("lineages of", u.render, "->", lineage_set(u))

# Two different formulas with the same whole-tree lineage set.
left = parse_formula("{{0,{0},{0,{0}}},{{{0}},{{{0}}}}}")
right = parse_formula("{{0,{0},{{{0}}}},{{{0}},{0,{0}}}}")
print("set-equal:", left is right, "| lineage-equal:", fast_equal(left, right))
print("per-node signatures differ:", nested_signature(left) != nested_signature(right))

# Codes of a drawn tree, duplicates included.
tree = parse("{0,{0,0},0}")
for path, code in sorted(code_nodes(tree).items()):
    print(f"{str(path):12} {code}")
