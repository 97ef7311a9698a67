"""Term representation of the E-language.

Two tree disciplines live here:

* :class:`Assembly` is a raw ordered tree exactly as written. Siblings may
  repeat and their order is kept, which node codification relies on.
* :class:`EFormula` is the normal form. Instances are hash-consed, so two
  set-equal formulas are the *same object* and ``is`` decides set equality.
  Children are exposed in a canonical order (by ``(desc, render)``).

Both read and print the ASCII grammar ``formula := "0" | "{" formula ("," formula)* "}"``
where ``0`` stands for the empty symbol.
"""

from __future__ import annotations

import enum
import threading
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

from .errors import DomainError, ParseError, ResourceError

__all__ = [
    "Assembly",
    "EFormula",
    "EMPTY",
    "Limits",
    "SentenceClass",
    "TruthValue",
    "as_formula",
    "classify",
    "desugar",
    "ef",
    "eval_truth",
    "is_member",
    "normalize",
    "parse",
    "parse_formula",
    "render",
    "set_equal",
    "wrap",
]


@dataclass(frozen=True)
class Limits:
    """Size bounds for parsed input. Exceeding them raises :class:`ResourceError`."""

    max_depth: int = 64
    max_width: int = 1024


DEFAULT_LIMITS = Limits()


class TruthValue(enum.Enum):
    T = True
    F = False

    def __bool__(self) -> bool:
        return self.value


class SentenceClass(enum.Enum):
    TAUTOLOGY = "Tautology"
    CONTRADICTION = "Contradiction"
    CONTINGENT = "Contingent"


# ---------------------------------------------------------------------------
# Raw assemblies


@dataclass(frozen=True)
class Assembly:
    """Ordered tree over the single leaf symbol. An empty ``children`` tuple is the leaf."""

    children: tuple["Assembly", ...] = ()

    @property
    def is_leaf(self) -> bool:
        return not self.children

    @staticmethod
    def branch(*children: "Assembly") -> "Assembly":
        if not children:
            raise DomainError("a branch needs at least one child")
        return Assembly(tuple(children))

    def size(self) -> int:
        """Node count of the tree as drawn (duplicates counted)."""
        return 1 + sum(c.size() for c in self.children)

    def depth(self) -> int:
        return 0 if not self.children else 1 + max(c.depth() for c in self.children)

    def __str__(self) -> str:
        return render(self)


LEAF = Assembly()


# ---------------------------------------------------------------------------
# Normal forms


class EFormula:
    """Interned duplicate-free formula.

    Do not call the constructor directly; use :meth:`of`, :func:`ef` or
    :func:`normalize`. ``members`` is a frozenset, ``children`` the canonical
    ordering of it. ``desc`` is the node count, ``truth_t``/``truth_f`` the
    values under the two assignments of the leaf.
    """

    __slots__ = ("members", "desc", "truth_t", "truth_f", "_render", "_children", "__weakref__")

    _table: dict[frozenset, "EFormula"] = {}
    _lock = threading.Lock()

    members: frozenset
    desc: int
    truth_t: bool
    truth_f: bool

    @classmethod
    def of(cls, members: Iterable["EFormula"]) -> "EFormula":
        key = frozenset(members)
        found = cls._table.get(key)
        if found is not None:
            return found
        with cls._lock:
            found = cls._table.get(key)
            if found is not None:
                return found
            obj = object.__new__(cls)
            obj.members = key
            if key:
                obj.desc = 1 + sum(m.desc for m in key)
                obj.truth_t = not all(m.truth_t for m in key)
                obj.truth_f = not all(m.truth_f for m in key)
            else:
                obj.desc = 1
                obj.truth_t = True
                obj.truth_f = False
            obj._render = "0" if not key else None
            obj._children = () if not key else None
            cls._table[key] = obj
            return obj

    @property
    def is_empty(self) -> bool:
        return not self.members

    @property
    def children(self) -> tuple["EFormula", ...]:
        if self._children is None:
            self._children = tuple(sorted(self.members, key=_order_key))
        return self._children

    @property
    def render(self) -> str:
        if self._render is None:
            # iterative post-order to survive deep formulas
            stack: list[tuple[EFormula, bool]] = [(self, False)]
            while stack:
                node, ready = stack.pop()
                if node._render is not None:
                    continue
                if ready:
                    node._render = "{" + ",".join(c._render for c in node.children) + "}"
                else:
                    stack.append((node, True))
                    stack.extend((c, False) for c in node.members if c._render is None)
        return self._render

    @property
    def only(self) -> "EFormula":
        """The sole member of a singleton."""
        if len(self.members) != 1:
            raise DomainError("not a singleton")
        return next(iter(self.members))

    def to_assembly(self) -> Assembly:
        if not self.members:
            return LEAF
        return Assembly(tuple(c.to_assembly() for c in self.children))

    def depth(self) -> int:
        return 0 if not self.members else 1 + max(c.depth() for c in self.members)

    def __repr__(self) -> str:
        return f"EFormula({self.render})"

    def __str__(self) -> str:
        return self.render

    def __reduce__(self):
        return (parse_formula, (self.render,))


def _order_key(x: EFormula) -> tuple[int, str]:
    return (x.desc, x.render)


EMPTY = EFormula.of(())

Formulaish = Union[EFormula, Assembly, str]


def ef(*members: EFormula) -> EFormula:
    """Build a formula from members; no members gives the empty symbol."""
    return EFormula.of(members)


def wrap(x: EFormula, times: int = 1) -> EFormula:
    for _ in range(times):
        x = EFormula.of((x,))
    return x


def normalize(a: Formulaish) -> EFormula:
    """Bottom-up deduplication of set-equal siblings into the interned normal form."""
    if isinstance(a, EFormula):
        return a
    if isinstance(a, str):
        a = parse(a)
    if not a.children:
        return EMPTY
    return EFormula.of(normalize(c) for c in a.children)


as_formula = normalize


# ---------------------------------------------------------------------------
# Text


_SPACE = frozenset(b" \t\r\n")


def parse(text: str, limits: Limits = DEFAULT_LIMITS) -> Assembly:
    """Parse formula text into a raw ordered :class:`Assembly`."""
    data = text.encode("utf-8")
    n = len(data)
    pos = 0

    def skip(p: int) -> int:
        while p < n and data[p] in _SPACE:
            p += 1
        return p

    # frames hold the children collected so far for each open brace
    frames: list[list[Assembly]] = []
    opens: list[int] = []
    result: Assembly | None = None
    pos = skip(pos)
    expect_formula = True
    while True:
        if expect_formula:
            if pos >= n:
                raise ParseError("unexpected end of input", pos)
            ch = data[pos]
            if ch == ord("0"):
                node = LEAF
                pos += 1
            elif ch == ord("{"):
                if len(frames) >= limits.max_depth:
                    raise ResourceError(f"depth exceeds {limits.max_depth}")
                frames.append([])
                opens.append(pos)
                pos = skip(pos + 1)
                if pos < n and data[pos] == ord("}"):
                    raise ParseError("empty braces", opens[-1])
                continue
            elif ch == ord(","):
                raise ParseError("stray comma", pos)
            elif ch == ord("}"):
                raise ParseError("unbalanced closing brace", pos)
            else:
                raise ParseError(f"unexpected character {chr(ch)!r}", pos)
            expect_formula = False
            if not frames:
                result = node
            else:
                frames[-1].append(node)
                if len(frames[-1]) > limits.max_width:
                    raise ResourceError(f"width exceeds {limits.max_width}")
            pos = skip(pos)
            continue
        # after a formula: comma, closing brace or end
        if not frames:
            if pos != n:
                raise ParseError("trailing input", pos)
            assert result is not None
            return result
        if pos >= n:
            raise ParseError("unbalanced opening brace", opens[-1])
        ch = data[pos]
        if ch == ord(","):
            comma = pos
            pos = skip(pos + 1)
            if pos >= n or data[pos] in (ord(","), ord("}")):
                raise ParseError("stray comma", comma)
            expect_formula = True
        elif ch == ord("}"):
            kids = frames.pop()
            opens.pop()
            node = Assembly(tuple(kids))
            pos = skip(pos + 1)
            if not frames:
                result = node
            else:
                frames[-1].append(node)
                if len(frames[-1]) > limits.max_width:
                    raise ResourceError(f"width exceeds {limits.max_width}")
        else:
            raise ParseError(f"expected ',' or '}}', found {chr(ch)!r}", pos)


def parse_formula(text: str, limits: Limits = DEFAULT_LIMITS) -> EFormula:
    """Parse and normalize in one step."""
    return normalize(parse(text, limits))


def render(a: Union[Assembly, EFormula]) -> str:
    """Print a formula. Raw assemblies keep their drawn order; normal forms print canonically."""
    if isinstance(a, EFormula):
        return a.render
    if not a.children:
        return "0"
    return "{" + ",".join(render(c) for c in a.children) + "}"


# ---------------------------------------------------------------------------
# Set and truth semantics


def set_equal(x: Formulaish, y: Formulaish) -> bool:
    return normalize(x) is normalize(y)


def is_member(x: Formulaish, y: Formulaish) -> bool:
    return normalize(x) in normalize(y).members


def eval_truth(x: Formulaish, v: TruthValue) -> TruthValue:
    f = normalize(x)
    return TruthValue(f.truth_t if v is TruthValue.T else f.truth_f)


def classify(x: Formulaish) -> SentenceClass:
    f = normalize(x)
    if f.truth_t and f.truth_f:
        return SentenceClass.TAUTOLOGY
    if not f.truth_t and not f.truth_f:
        return SentenceClass.CONTRADICTION
    return SentenceClass.CONTINGENT


_ARITY = {"not": (1, 1), "implies": (2, 2), "equiv": (2, 2), "and": (1, None), "or": (1, None)}


def desugar(connective: str, args: Sequence[Formulaish]) -> EFormula:
    """Expand a propositional connective into its brace form."""
    if connective not in _ARITY:
        raise DomainError(f"unknown connective {connective!r}")
    lo, hi = _ARITY[connective]
    if len(args) < lo or (hi is not None and len(args) > hi):
        raise DomainError(f"{connective} takes {lo if lo == hi else f'at least {lo}'} argument(s)")
    xs = [normalize(a) for a in args]
    if connective == "not":
        return wrap(xs[0])
    if connective == "and":
        return wrap(ef(*xs))
    if connective == "or":
        return ef(*(wrap(x) for x in xs))
    if connective == "implies":
        return ef(xs[0], wrap(xs[1]))
    a, b = xs
    return wrap(ef(ef(a, wrap(b)), ef(b, wrap(a))))
