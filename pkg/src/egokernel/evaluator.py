"""Self-referential relational evaluators.

Every evaluator is built twice in spirit: as a small sugared expression tree
(:class:`Expr`) used for display, and as its lowered normal form. The
lowered form is what gets classified. :func:`equality_evaluator` returns the
normal form directly and :func:`equality_expression` the display tree;
``lower(equality_expression(x, y)) is equality_evaluator(x, y)`` holds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .assembly import EMPTY, EFormula, SentenceClass, classify, desugar, ef, normalize
from .errors import DomainError, ResourceError

__all__ = [
    "DEFAULT_PAIRING_LIMIT",
    "And",
    "Atom",
    "Equiv",
    "Eq",
    "Expr",
    "In",
    "Or",
    "Pairing",
    "PairingSet",
    "SetResult",
    "check_self_reference",
    "container",
    "enumerate_pairings",
    "equality_evaluator",
    "equality_expression",
    "intersection",
    "lower",
    "membership_evaluator",
    "membership_expression",
    "reconstruct_arguments",
    "render_expr",
    "subset_evaluator",
    "subset_expression",
    "surjection_count",
    "union",
]

DEFAULT_PAIRING_LIMIT = 10_000

Formulaish = Union[EFormula, str]


def container(x: Formulaish) -> EFormula:
    """``x`` itself when it has members, otherwise the singleton of the empty symbol."""
    f = normalize(x)
    return ef(EMPTY) if f.is_empty else f


# ---------------------------------------------------------------------------
# Pairings


@dataclass(frozen=True)
class Pairing:
    """A surjection between containers as ordered pairs, first coordinate from ``x``'s side."""

    pairs: tuple[tuple[EFormula, EFormula], ...]
    direction: str  # "XtoY" or "YtoX"


@dataclass(frozen=True)
class PairingSet:
    pairings: tuple[Pairing, ...]
    overflow: bool = False
    total: int = 0


def _stirling2(m: int, n: int) -> int:
    return sum((-1) ** k * math.comb(n, k) * (n - k) ** m for k in range(n + 1)) // math.factorial(n)


def surjection_count(m: int, n: int) -> int:
    """Number of surjections from an m-set onto an n-set."""
    if n > m:
        return 0
    return math.factorial(n) * _stirling2(m, n)


def _surjections(m: int, n: int) -> Iterator[tuple[int, ...]]:
    """Surjections {0..m-1} -> {0..n-1} as image tuples, in lexicographic order."""
    image = [0] * m
    hits = [0] * n

    def rec(i: int, uncovered: int) -> Iterator[tuple[int, ...]]:
        if m - i < uncovered:
            return
        if i == m:
            yield tuple(image)
            return
        for j in range(n):
            image[i] = j
            hits[j] += 1
            yield from rec(i + 1, uncovered - (hits[j] == 1))
            hits[j] -= 1

    yield from rec(0, n)


def enumerate_pairings(
    x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT, exact: bool = False
) -> PairingSet:
    """All surjections Cont(x)->Cont(y) if any exist, else all Cont(y)->Cont(x).

    Pairs are always ordered with the ``x``-side member first. When the count
    exceeds ``limit`` the result is truncated and flagged, or a
    :class:`ResourceError` is raised if ``exact`` is set.
    """
    if limit <= 0:
        raise DomainError("limit must be positive")
    cx, cy = container(x).children, container(y).children
    if len(cx) >= len(cy):
        src, dst, direction = cx, cy, "XtoY"
    else:
        src, dst, direction = cy, cx, "YtoX"
    total = surjection_count(len(src), len(dst))
    if total > limit and exact:
        raise ResourceError(f"{total} pairings exceed limit {limit}")
    out = []
    for image in _surjections(len(src), len(dst)):
        if len(out) >= limit:
            break
        if direction == "XtoY":
            pairs = tuple((src[i], dst[j]) for i, j in enumerate(image))
        else:
            pairs = tuple((dst[j], src[i]) for i, j in enumerate(image))
        out.append(Pairing(pairs, direction))
    return PairingSet(tuple(out), total > limit, total)


# ---------------------------------------------------------------------------
# Sugared expressions


class Expr:
    """Display tree for evaluators."""


@dataclass(frozen=True)
class Atom(Expr):
    formula: EFormula


@dataclass(frozen=True)
class Equiv(Expr):
    left: EFormula
    right: EFormula


@dataclass(frozen=True)
class Eq(Expr):
    """Reference to the equality evaluator of a pair; ``body`` is its expansion."""

    left: EFormula
    right: EFormula
    body: Expr = field(compare=False, repr=False)


@dataclass(frozen=True)
class In(Expr):
    left: EFormula
    right: EFormula
    body: Expr = field(compare=False, repr=False)


@dataclass(frozen=True)
class And(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Or(Expr):
    items: tuple[Expr, ...]


@dataclass(frozen=True)
class Iff(Expr):
    """Biconditional between two evaluator expressions."""

    left: Expr
    right: Expr


def _conj(items: Sequence[Expr]) -> Expr:
    return items[0] if len(items) == 1 else And(tuple(items))


def _disj(items: Sequence[Expr]) -> Expr:
    return items[0] if len(items) == 1 else Or(tuple(items))


_LOWER_CACHE: dict[Expr, EFormula] = {}


def lower(e: Expr) -> EFormula:
    """Lower a display tree to its brace form."""
    if isinstance(e, Atom):
        return e.formula
    if isinstance(e, Equiv):
        return desugar("equiv", [e.left, e.right])
    if isinstance(e, (Eq, In)):
        hit = _LOWER_CACHE.get(e)
        if hit is None:
            hit = _LOWER_CACHE[e] = lower(e.body)
        return hit
    if isinstance(e, And):
        return desugar("and", [lower(i) for i in e.items])
    if isinstance(e, Or):
        return desugar("or", [lower(i) for i in e.items])
    if isinstance(e, Iff):
        return desugar("equiv", [lower(e.left), lower(e.right)])
    raise TypeError(type(e))


def render_expr(e: Expr, expand: bool = True, empty: str = "0") -> str:
    """Print a display tree; ``expand=False`` keeps nested evaluators as ``{x=y}``/``{x∈y}``."""

    def f(x: EFormula) -> str:
        return x.render.replace("0", empty) if empty != "0" else x.render

    def go(e: Expr, top: bool) -> str:
        if isinstance(e, Atom):
            return f(e.formula)
        if isinstance(e, Equiv):
            return "{" + f(e.left) + "≡" + f(e.right) + "}"
        if isinstance(e, Eq):
            return go(e.body, top) if (expand or top) else "{" + f(e.left) + "=" + f(e.right) + "}"
        if isinstance(e, In):
            return go(e.body, top) if (expand or top) else "{" + f(e.left) + "∈" + f(e.right) + "}"
        if isinstance(e, And):
            return "{" + " ∧ ".join(go(i, False) for i in e.items) + "}"
        if isinstance(e, Or):
            return "{" + " ∨ ".join(go(i, False) for i in e.items) + "}"
        if isinstance(e, Iff):
            return "{" + go(e.left, False) + "≡" + go(e.right, False) + "}"
        raise TypeError(type(e))

    return go(e, True)


# ---------------------------------------------------------------------------
# Equality


_EQ_EXPR: dict[tuple[EFormula, EFormula, int], Eq] = {}
_EQ_FORM: dict[tuple[EFormula, EFormula, int], EFormula] = {}
_SINGLETON_EMPTY = ef(EMPTY)


def equality_expression(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> Eq:
    """Display tree of the equality evaluator of ``x`` and ``y``."""
    fx, fy = normalize(x), normalize(y)
    key = (fx, fy, limit)
    hit = _EQ_EXPR.get(key)
    if hit is not None:
        return hit
    head = Equiv(fx, fy)
    cx_unit = container(fx) is _SINGLETON_EMPTY
    cy_unit = container(fy) is _SINGLETON_EMPTY
    if cx_unit and cy_unit:
        body: Expr = head
    else:
        ps = enumerate_pairings(fx, fy, limit, exact=True)
        branches = [
            _conj([equality_expression(w, z, limit) for w, z in p.pairs]) for p in ps.pairings
        ]
        if cx_unit or cy_unit:
            # the surjection onto a singleton is unique
            body = And((head, branches[0]))
        else:
            body = And((head, _disj(branches)))
    out = Eq(fx, fy, body)
    _EQ_EXPR[key] = out
    return out


def equality_evaluator(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> EFormula:
    """The equality evaluator of ``x`` and ``y`` as a normal form."""
    fx, fy = normalize(x), normalize(y)
    key = (fx, fy, limit)
    hit = _EQ_FORM.get(key)
    if hit is not None:
        return hit
    head = desugar("equiv", [fx, fy])
    cx_unit = container(fx) is _SINGLETON_EMPTY
    cy_unit = container(fy) is _SINGLETON_EMPTY
    if cx_unit and cy_unit:
        out = head
    else:
        ps = enumerate_pairings(fx, fy, limit, exact=True)
        branches = []
        for p in ps.pairings:
            parts = [equality_evaluator(w, z, limit) for w, z in p.pairs]
            branches.append(parts[0] if len(parts) == 1 else desugar("and", parts))
        if cx_unit or cy_unit:
            out = desugar("and", [head, branches[0]])
        else:
            alt = branches[0] if len(branches) == 1 else desugar("or", branches)
            out = desugar("and", [head, alt])
    _EQ_FORM[key] = out
    return out


def check_self_reference(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> bool:
    """True when the evaluator is a tautology for equal arguments and a contradiction otherwise."""
    fx, fy = normalize(x), normalize(y)
    cls = classify(equality_evaluator(fx, fy, limit))
    expected = SentenceClass.TAUTOLOGY if fx is fy else SentenceClass.CONTRADICTION
    return cls is expected


def _equiv_candidates(f: EFormula) -> Iterator[tuple[EFormula, EFormula]]:
    """Argument pairs that could have produced ``f`` as a biconditional head."""
    if len(f.members) != 1:
        return
    inner = f.only
    for p in inner.members:
        for a in p.members:
            for b in p.members:
                if len(b.members) == 1:
                    yield a, b.only
                    yield b.only, a


def reconstruct_arguments(evaluator: EFormula, limit: int = DEFAULT_PAIRING_LIMIT) -> tuple[EFormula, EFormula]:
    """Recover the arguments of an equality evaluator through its embedded biconditional.

    The evaluator is symmetric, so the pair comes back up to order.
    """
    seen: set[tuple[EFormula, EFormula]] = set()
    heads = [evaluator]
    if len(evaluator.members) == 1:
        heads.extend(evaluator.only.members)
    for h in heads:
        for cand in _equiv_candidates(h):
            if cand in seen:
                continue
            seen.add(cand)
            if equality_evaluator(cand[0], cand[1], limit) is evaluator:
                return cand
    raise DomainError("not an equality evaluator")


# ---------------------------------------------------------------------------
# Membership and subset


def membership_expression(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> In:
    fx, fy = normalize(x), normalize(y)
    if fy.is_empty:
        raise DomainError("membership in the empty symbol is undefined")
    parts = [equality_expression(fx, m, limit) for m in fy.children]
    return In(fx, fy, _disj(parts))


def membership_evaluator(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> EFormula:
    """Tautology exactly when ``x`` is a member of ``y``."""
    return lower(membership_expression(x, y, limit))


def subset_expression(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> Expr:
    fx, fy = normalize(x), normalize(y)
    if fx.is_empty or fy.is_empty:
        raise DomainError("subset evaluator needs two non-empty arguments")
    return _conj([membership_expression(m, fy, limit) for m in fx.children])


def subset_evaluator(x: Formulaish, y: Formulaish, limit: int = DEFAULT_PAIRING_LIMIT) -> EFormula:
    """Tautology exactly when every member of ``x`` is a member of ``y``."""
    return lower(subset_expression(x, y, limit))


# ---------------------------------------------------------------------------
# Intersection and union


@dataclass(frozen=True)
class SetResult:
    """Result of a set operation plus its optional verification formula."""

    value: EFormula
    disjoint: bool = False
    verification: EFormula | None = None
    verified: bool | None = None


def intersection(
    x: Formulaish, y: Formulaish, verify: bool = False, limit: int = DEFAULT_PAIRING_LIMIT
) -> SetResult:
    """Members of ``x`` that are members of ``y``. Disjoint inputs give the empty symbol and a flag."""
    fx, fy = normalize(x), normalize(y)
    if fx.is_empty or fy.is_empty:
        raise DomainError("intersection needs two non-empty arguments")
    common = [m for m in fx.children if m in fy.members]
    if not common:
        return SetResult(EMPTY, disjoint=True)
    value = ef(*common)
    if not verify:
        return SetResult(value)
    parts = [
        Iff(membership_expression(m, value, limit), membership_expression(m, fy, limit))
        for m in fx.children
    ]
    form = lower(_conj(parts))
    return SetResult(value, verification=form, verified=classify(form) is SentenceClass.TAUTOLOGY)


def union(x: Formulaish, y: Formulaish, verify: bool = False, limit: int = DEFAULT_PAIRING_LIMIT) -> SetResult:
    """Deduplicated members of both arguments."""
    fx, fy = normalize(x), normalize(y)
    if fx.is_empty or fy.is_empty:
        raise DomainError("union needs two non-empty arguments")
    value = ef(*(fx.members | fy.members))
    if not verify:
        return SetResult(value)
    parts = [membership_expression(m, value, limit) for m in fx.children + fy.children]
    form = lower(_conj(parts))
    return SetResult(value, verification=form, verified=classify(form) is SentenceClass.TAUTOLOGY)
