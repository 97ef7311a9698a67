"""Named, typed knowledge records and their store.

A name is the ordered tuple ``<prefix, serial, typology>`` where the prefix
identifies the individual, the serial is an E-binary incremented per record
and the typology is a marker formula. The meaning is ``(vinculum, datum)``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .assembly import EMPTY, EFormula, ef, wrap
from .codec import ebinary_from_int, ordered_pair, ordered_tuple, unpair
from .errors import DomainError

__all__ = [
    "Archetype",
    "ArchetypeStore",
    "MARK_A",
    "MARK_B",
    "Typology",
    "datum_pair",
    "split_datum_pair",
    "typology_formula",
    "unit_code",
]


class Typology(enum.Enum):
    """Archetype kinds with their unit codes."""

    PERCEPTION = "Perception"
    QUANTITY = "Quantity"
    QUANTITY_PAIR = "QuantityPair"
    ABSTRACT_BASE = "AbstractBase"
    ABSTRACT_COMPOSED = "AbstractComposed"
    SENSUS_UNDAM = "SensusUndam"
    PARADIGMA = "Paradigma"
    FACTORS = "Factors"
    QUANTITY_EVENT = "QuantityEvent"
    EVENT = "Event"
    CHAIN = "Chain"
    GENUS_PARADIGMA = "GenusParadigma"


_UNITS = {
    Typology.PERCEPTION: 10,
    Typology.QUANTITY: 11,
    Typology.QUANTITY_PAIR: 12,
    Typology.ABSTRACT_BASE: 0,
    Typology.ABSTRACT_COMPOSED: 0,
    Typology.SENSUS_UNDAM: 21,
    Typology.PARADIGMA: 2,
    Typology.FACTORS: 1,
    Typology.QUANTITY_EVENT: 7,
    Typology.EVENT: 9,
    Typology.CHAIN: 20,
    Typology.GENUS_PARADIGMA: 3,
}


def unit_code(t: Typology) -> int:
    return _UNITS[t]


TYPOLOGY_BASE = ef(wrap(EMPTY, 4), wrap(EMPTY))  # {{{{{0}}}},{0}}
BASE_MARKER = ef(wrap(EMPTY, 6), wrap(EMPTY, 4))
COMPOSED_MARKER = ef(wrap(EMPTY, 7), wrap(EMPTY, 4))
PREFIX_MARKER = wrap(EMPTY, 5)
MARK_A = wrap(EMPTY, 8)
MARK_B = wrap(EMPTY, 9)


def typology_formula(t: Typology) -> EFormula:
    """Vinculum of an archetype kind: the typology marker paired with its unit code."""
    return ordered_pair(TYPOLOGY_BASE, ebinary_from_int(_UNITS[t]))


def _name_marker(t: Typology) -> EFormula:
    if t is Typology.ABSTRACT_BASE:
        return BASE_MARKER
    if t is Typology.ABSTRACT_COMPOSED:
        return COMPOSED_MARKER
    return typology_formula(t)


_MARKER_TO_TYPOLOGY = {_name_marker(t): t for t in Typology}


def datum_pair(first: EFormula, second: EFormula) -> EFormula:
    """``{{A, first}, {B, second}}``: an unordered set made ordered by the A/B markers."""
    return ef(ef(MARK_A, first), ef(MARK_B, second))


def split_datum_pair(d: EFormula) -> tuple[EFormula, EFormula]:
    first = second = None
    for m in d.members:
        if MARK_A in m.members:
            rest = m.members - {MARK_A}
            first = next(iter(rest)) if rest else MARK_A
        elif MARK_B in m.members:
            rest = m.members - {MARK_B}
            second = next(iter(rest)) if rest else MARK_B
    if first is None or second is None:
        raise DomainError("not an A/B datum pair")
    return first, second


@dataclass(frozen=True)
class Archetype:
    name: EFormula
    serial: int
    typology: Typology
    vinculum: EFormula
    datum: EFormula
    refs: tuple[EFormula, ...] = ()
    note: str = field(default="", compare=False)

    @property
    def short(self) -> str:
        """Log form of the name."""
        return f"{self.serial}:{self.typology.value}"


class ArchetypeStore:
    """Memory of archetypes keyed by name."""

    def __init__(self, individual: int = 1) -> None:
        self.prefix = ordered_pair(PREFIX_MARKER, ebinary_from_int(individual))
        self._by_name: dict[EFormula, Archetype] = {}
        self._serial = 0

    def __len__(self) -> int:
        return len(self._by_name)

    def __iter__(self):
        return iter(self._by_name.values())

    def make_name(self, serial: int, t: Typology) -> EFormula:
        return ordered_tuple([self.prefix, ebinary_from_int(serial), _name_marker(t)])

    @staticmethod
    def typology_of(name: EFormula) -> Typology:
        """Read the kind back from a name."""
        _, marker = unpair(name)
        try:
            return _MARKER_TO_TYPOLOGY[marker]
        except KeyError:
            raise DomainError("name carries no known typology") from None

    def create(
        self, t: Typology, datum: EFormula, refs: Sequence[EFormula] = (), note: str = ""
    ) -> Archetype:
        self._serial += 1
        a = Archetype(
            self.make_name(self._serial, t), self._serial, t, typology_formula(t), datum, tuple(refs), note
        )
        self.put(a)
        return a

    def put(self, a: Archetype) -> None:
        if a.name in self._by_name:
            raise DomainError(f"duplicate archetype name {a.short}")
        self._by_name[a.name] = a

    def get_by_name(self, name: EFormula) -> Archetype:
        try:
            return self._by_name[name]
        except KeyError:
            raise DomainError("unknown archetype name") from None

    def find_by_typology(self, t: Typology) -> list[Archetype]:
        return [a for a in self._by_name.values() if self.typology_of(a.name) is t]

    def descend_to_level0(self, name: EFormula) -> list[EFormula]:
        """Left-to-right leaves of a Composed or Chain nesting."""
        out: list[EFormula] = []
        path: set[EFormula] = set()

        def walk(n: EFormula) -> None:
            if n in path:
                raise DomainError("cycle in archetype nesting")
            a = self.get_by_name(n)
            if a.typology in (Typology.ABSTRACT_COMPOSED, Typology.CHAIN):
                path.add(n)
                for r in a.refs:
                    walk(r)
                path.discard(n)
            elif a.typology is Typology.ABSTRACT_BASE:
                out.append(a.datum)
            else:
                out.append(n)

        walk(name)
        return out

    def category_archetype(self, aspects: Iterable[EFormula], cache: dict[EFormula, EFormula]) -> EFormula:
        """Name of the archetype for a category: Base records per aspect folded left by Composed records."""
        names = []
        for asp in aspects:
            hit = cache.get(asp)
            if hit is None:
                hit = self.create(Typology.ABSTRACT_BASE, asp).name
                cache[asp] = hit
            names.append(hit)
        if not names:
            raise DomainError("a category needs at least one aspect")
        acc = names[0]
        for n in names[1:]:
            acc = self.create(Typology.ABSTRACT_COMPOSED, datum_pair(acc, n), refs=(acc, n)).name
        return acc
