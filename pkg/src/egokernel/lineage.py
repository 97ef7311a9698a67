"""Structural fingerprints: descendant counts, lineages and node codes.

``desc``/``lineage_set`` run on normal forms. ``code_nodes`` runs on raw
ordered assemblies because codes depend on the drawn left-to-right order.
"""

from __future__ import annotations

import itertools
from typing import Iterator, Union

from .assembly import Assembly, EFormula, normalize
from .errors import DomainError

__all__ = [
    "Lineage",
    "LineageSet",
    "code_nodes",
    "desc",
    "fast_equal",
    "h_sequence",
    "lineage_set",
    "nested_signature",
    "node_lineage_sets",
    "subassembly_at",
]

Lineage = tuple[int, ...]
LineageSet = tuple[Lineage, ...]  # sorted, deduplicated

_LD_CACHE: dict[EFormula, LineageSet] = {}
_SIG_CACHE: dict[EFormula, tuple] = {}


def desc(x: Union[EFormula, Assembly, str]) -> int:
    """Descendant count: 1 for the leaf, 1 plus the children's sum otherwise.

    On a raw :class:`Assembly` the drawn tree is counted, duplicates included.
    """
    if isinstance(x, Assembly):
        return x.size()
    return normalize(x).desc


def lineage_set(x: Union[EFormula, Assembly, str]) -> LineageSet:
    """All root-to-leaf tuples of descendant counts, sorted."""
    f = normalize(x)
    cached = _LD_CACHE.get(f)
    if cached is not None:
        return cached
    if f.is_empty:
        out: LineageSet = ((1,),)
    else:
        acc = set()
        for c in f.members:
            for tail in lineage_set(c):
                acc.add((f.desc,) + tail)
        out = tuple(sorted(acc))
    _LD_CACHE[f] = out
    return out


def fast_equal(x: Union[EFormula, Assembly, str], y: Union[EFormula, Assembly, str]) -> bool:
    """Compare whole-formula lineage sets."""
    return lineage_set(x) == lineage_set(y)


def nested_signature(x: Union[EFormula, Assembly, str]) -> tuple:
    """Per-node variant: every node keeps its own lineage set, nested by children.

    Two normal forms share a signature exactly when they are set-equal.
    """
    f = normalize(x)
    cached = _SIG_CACHE.get(f)
    if cached is not None:
        return cached
    sig = (lineage_set(f), tuple(sorted(nested_signature(c) for c in f.members)))
    _SIG_CACHE[f] = sig
    return sig


def node_lineage_sets(x: Assembly) -> dict[str, LineageSet]:
    """Lineage set of the normalized subtree at every node code."""
    codes = code_nodes(x)
    return {code: lineage_set(_subtree(x, path)) for path, code in codes.items()}


# ---------------------------------------------------------------------------
# Node codification


def h_sequence() -> Iterator[int]:
    """Naturals whose decimal form has no zero digit: 1..9, 11..19, 21, ..."""
    # count in base 9 with digits shifted to 1..9
    for length in itertools.count(1):
        for digits in itertools.product("123456789", repeat=length):
            yield int("".join(digits))


def _h(n: int) -> str:
    """n-th term (1-based) of :func:`h_sequence`, via bijective base nine."""
    digits = []
    while n > 0:
        n, r = divmod(n - 1, 9)
        digits.append(str(r + 1))
    return "".join(reversed(digits))


def _split_code(code: str) -> tuple[str, str]:
    """Split a code into (prefix through its last zero, trailing digits)."""
    cut = code.rfind("0")
    return code[: cut + 1], code[cut + 1 :]


def _child_code(parent: str, index: int) -> str:
    """Code of the ``index``-th child (0-based, drawn order) of a node coded ``parent``."""
    if parent == "0":
        return "0" + _h(index + 1)
    prefix, tail = _split_code(parent)
    if index == 0:
        return prefix + "0" + tail
    return parent + "0" + _h(index)


Path = tuple[int, ...]


def code_nodes(x: Assembly) -> dict[Path, str]:
    """Map each node path (child indices from the root) to its digit code."""
    if isinstance(x, EFormula):
        x = x.to_assembly()
    elif isinstance(x, str):
        from .assembly import parse

        x = parse(x)
    out: dict[Path, str] = {(): "0"}
    stack: list[tuple[Assembly, Path, str]] = [(x, (), "0")]
    while stack:
        node, path, code = stack.pop()
        for i, child in enumerate(node.children):
            c = _child_code(code, i)
            out[path + (i,)] = c
            stack.append((child, path + (i,), c))
    return out


def _subtree(x: Assembly, path: Path) -> Assembly:
    for i in path:
        x = x.children[i]
    return x


def subassembly_at(x: Assembly, code: str) -> Assembly:
    """Inverse of :func:`code_nodes`: the subtree carrying ``code``."""
    if isinstance(x, EFormula):
        x = x.to_assembly()
    elif isinstance(x, str):
        from .assembly import parse

        x = parse(x)
    for path, c in code_nodes(x).items():
        if c == code:
            return _subtree(x, path)
    raise DomainError(f"no node coded {code!r}")
