"""Subassemblies, common aspects, categories and the homeostatic ledger."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .assembly import EFormula, ef, normalize
from .errors import DomainError
from .lineage import code_nodes

__all__ = [
    "Category",
    "HomeostaticLedger",
    "category",
    "common_aspects",
    "is_instance",
    "ledger_apply",
    "subassemblies",
    "subformula_set",
]

_SUB_CACHE: dict[EFormula, frozenset[EFormula]] = {}


def subformula_set(x: EFormula) -> frozenset[EFormula]:
    """Distinct values occurring anywhere in ``x``, ``x`` included."""
    hit = _SUB_CACHE.get(x)
    if hit is not None:
        return hit
    acc = {x}
    for m in x.members:
        acc |= subformula_set(m)
    out = frozenset(acc)
    _SUB_CACHE[x] = out
    return out


def subassemblies(x: EFormula) -> list[tuple[str, EFormula]]:
    """Every occurrence in ``x`` with its node code, in canonical drawn order."""
    x = normalize(x)
    out: list[tuple[str, EFormula]] = []
    for path, code in sorted(code_nodes(x.to_assembly()).items()):
        node = x
        for i in path:
            node = node.children[i]
        out.append((code, node))
    return out


def _occurrences(x: EFormula) -> dict[EFormula, list[tuple[EFormula, ...]]]:
    """Value -> strict-ancestor values of each of its occurrences in ``x``."""
    out: dict[EFormula, list[tuple[EFormula, ...]]] = {}
    stack: list[tuple[EFormula, tuple[EFormula, ...]]] = [(x, ())]
    while stack:
        node, anc = stack.pop()
        out.setdefault(node, []).append(anc)
        inner = anc + (node,)
        stack.extend((c, inner) for c in node.members)
    return out


def common_aspects(xs: Sequence[EFormula]) -> list[EFormula]:
    """Maximal shared subassemblies of the inputs.

    Candidates shared by every input are scanned from the largest down. A
    candidate is kept when every input holds an occurrence of it that is not
    strictly inside an occurrence of an aspect already kept.
    """
    if not xs:
        raise DomainError("common aspects need at least one input")
    fs = [normalize(x) for x in xs]
    shared = set(subformula_set(fs[0]))
    for f in fs[1:]:
        shared &= subformula_set(f)
    occ = {f: _occurrences(f) for f in set(fs)}
    selected: list[EFormula] = []
    chosen: set[EFormula] = set()
    for y in sorted(shared, key=lambda v: (-v.desc, v.render)):
        if all(
            any(not any(a in chosen for a in anc) for anc in occ[f][y]) for f in occ
        ):
            selected.append(y)
            chosen.add(y)
    return sorted(selected, key=lambda v: (v.desc, v.render))


@dataclass(frozen=True)
class Category:
    """Common aspects of a batch of instances, held as the members of ``properties``."""

    properties: EFormula
    provenance: tuple[str, ...] = field(default=(), compare=False)

    @property
    def key(self) -> str:
        return self.properties.render

    @property
    def aspects(self) -> frozenset[EFormula]:
        return self.properties.members

    def __str__(self) -> str:
        return self.key


def category(xs: Sequence[EFormula], provenance: Iterable[str] = ()) -> Category:
    return Category(ef(*common_aspects(xs)), tuple(provenance))


def is_instance(x: EFormula, c: Category | EFormula | Iterable[EFormula]) -> bool:
    """Every property of ``c`` occurs somewhere in ``x``."""
    if isinstance(c, Category):
        props: Iterable[EFormula] = c.aspects
    elif isinstance(c, EFormula):
        props = c.members
    else:
        props = c
    subs = subformula_set(normalize(x))
    return all(p in subs for p in props)


class HomeostaticLedger:
    """Signed produced-minus-consumed counters per category key."""

    def __init__(self, counts: dict[str, int] | None = None) -> None:
        self.counts: dict[str, int] = dict(counts or {})

    def apply(self, key: str, delta: int) -> "HomeostaticLedger":
        self.counts[key] = self.counts.get(key, 0) + delta
        return self

    def index(self, key: str) -> int:
        return self.counts.get(key, 0)

    def at_equilibrium(self, key: str) -> bool:
        return self.index(key) == 0

    def surplus(self) -> dict[str, int]:
        return {k: v for k, v in self.counts.items() if v > 0}

    def deficit(self) -> dict[str, int]:
        return {k: v for k, v in self.counts.items() if v < 0}

    def copy(self) -> "HomeostaticLedger":
        return HomeostaticLedger(self.counts)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HomeostaticLedger):
            return NotImplemented
        a = {k: v for k, v in self.counts.items() if v}
        b = {k: v for k, v in other.counts.items() if v}
        return a == b

    def __repr__(self) -> str:
        return f"HomeostaticLedger({self.counts})"


def ledger_apply(ledger: HomeostaticLedger, key: str, delta: int) -> HomeostaticLedger:
    """Functional form: returns an updated copy."""
    return ledger.copy().apply(key, delta)
