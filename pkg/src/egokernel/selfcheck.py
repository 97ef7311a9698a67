"""Property suites and worked examples used by ``egokernel verify``."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from importlib import resources
from typing import Callable

from .assembly import EFormula, SentenceClass, classify, ef, parse_formula
from .categorize import category
from .codec import attractor_assemblies, ebinary_decode, ebinary_encode, ordered_pair
from .errors import ResourceError
from .evaluator import (
    equality_evaluator,
    equality_expression,
    membership_evaluator,
    render_expr,
)
from .lineage import _child_code, fast_equal, lineage_set

__all__ = [
    "CheckResult",
    "EXAMPLE_7",
    "bounded_corpus",
    "example_names",
    "scenario_path",
    "verify_examples",
    "verify_lineage",
    "verify_selfref",
]

EXAMPLE_7 = "{{{0}≡{0,{0}}} ∧ {{0≡0} ∧ {0≡{0}}}}"


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


def scenario_path(name: str):
    """Path of a bundled scenario, e.g. ``scenario_path("three_modalities")``."""
    return resources.files("egokernel") / "scenarios" / f"{name}.ini"


def bounded_corpus(max_depth: int, max_width: int, max_formulas: int = 5_000) -> list[EFormula]:
    """Every normal form with depth at most ``max_depth`` and no node wider than ``max_width``."""
    level = [ef()]
    for _ in range(max_depth):
        n = len(level)
        size = sum(math.comb(n, r) for r in range(0, min(max_width, n) + 1))
        if size > max_formulas:
            raise ResourceError(f"corpus would hold {size} formulas (limit {max_formulas})")
        nxt = []
        for r in range(0, min(max_width, n) + 1):
            nxt.extend(ef(*c) for c in itertools.combinations(level, r))
        level = nxt
    return sorted(set(level), key=lambda f: (f.desc, f.render))


def verify_selfref(corpus: list[EFormula]) -> CheckResult:
    bad = []
    for x, y in itertools.product(corpus, repeat=2):
        want = SentenceClass.TAUTOLOGY if x is y else SentenceClass.CONTRADICTION
        if classify(equality_evaluator(x, y)) is not want:
            bad.append((x.render, y.render))
    n = len(corpus) ** 2
    return CheckResult("selfref", not bad, f"{n - len(bad)}/{n} pairs agree" + (f"; first failure {bad[0]}" if bad else ""))


def verify_lineage(corpus: list[EFormula]) -> CheckResult:
    bad = [(x.render, y.render) for x, y in itertools.product(corpus, repeat=2) if fast_equal(x, y) != (x is y)]
    n = len(corpus) ** 2
    return CheckResult("lineage", not bad, f"{n - len(bad)}/{n} pairs agree" + (f"; first failure {bad[0]}" if bad else ""))


# ---------------------------------------------------------------------------
# Worked examples


def _ex7() -> tuple[bool, str]:
    text = render_expr(equality_expression("{0}", "{0,{0}}"), empty="0")
    cls = classify(equality_evaluator("{0}", "{0,{0}}"))
    return text == EXAMPLE_7 and cls is SentenceClass.CONTRADICTION, f"{text} -> {cls.value}"


def _ex5() -> tuple[bool, str]:
    cls = classify(membership_evaluator("{0}", "{0,{0}}"))
    return cls is SentenceClass.TAUTOLOGY, cls.value


def _lineages() -> tuple[bool, str]:
    got = lineage_set("{0,{{0}},{0,{0}}}")
    want = ((9, 1), (9, 3, 2, 1), (9, 4, 1), (9, 4, 2, 1))
    return got == want, str(got)


def _category() -> tuple[bool, str]:
    c = category([parse_formula("{0,{{0}},{0,{{0}}}}"), parse_formula("{{0},{{0}}}")])
    want = parse_formula("{{{0}},0}")
    return c.properties is want and parse_formula("{0}") not in c.aspects, c.key


def _ebinary() -> tuple[bool, str]:
    v = ebinary_decode(ebinary_encode("101"))
    return v == 5, str(v)


def _attractor() -> tuple[bool, str]:
    xs = attractor_assemblies([1, 2, 3, 1, 2, 1])
    ok = (
        xs[1] is parse_formula("{{{0}},{{0},0}}")
        and xs[4] is parse_formula("{{0},{0,{0}}}")
        and xs[2] is ordered_pair(ordered_pair(xs[1], ef()), ordered_pair(ef(), xs[3]))
    )
    return ok, "X2, X3, X5 as stated by the rules"


def _node_codes() -> tuple[bool, str]:
    first = _child_code("012004", 0)
    seconds = [_child_code("012004", i) for i in range(1, 11)]
    ok = first == "0120004" and seconds[:2] == ["01200401", "01200402"] and seconds[8] == "01200409"
    return ok, f"{first}; {seconds[0]}, {seconds[1]}, ..., {seconds[8]}, {seconds[9]}"


def _three_modalities() -> tuple[bool, str]:
    from .environment import load_scenario, run_scenario

    r = run_scenario(load_scenario(scenario_path("three_modalities")))
    e = r.engine
    idx = {e.label(k): e.ledger.index(k) for k in e.categories}
    counts = {mid: len(m.compliant()) for mid, m in e.modalities.items()}
    ok = (
        r.status.value == "Equilibrium"
        and (idx["{C,G,K}"], idx["{A,E,F,P}"], idx["{B,D,V}"]) == (1, 0, 3)
        and counts == {"Ma": 10, "Mb": 11, "Mc": 8}
    )
    return ok, f"{r.status.value}; residuals {idx['{C,G,K}']}/{idx['{A,E,F,P}']}/{idx['{B,D,V}']}"


def _manipulation_example() -> tuple[bool, str]:
    from .categorize import Category
    from .engine import Engine

    letters = {n: ebinary_encode(format(i + 1, "04b")) for i, n in enumerate("PQRSTLMWZ")}

    def cat(names: str) -> Category:
        return Category(ef(*(letters[n] for n in names)))

    e = Engine()
    j = e._register(cat("PQRST"))
    factors = [e._register(cat(n)) for n in ("PLM", "QRW", "STZ")]
    plan = e._build_plan(j, factors)
    inter = plan.steps[0].output
    ok = len(plan.steps) == 2 and e.categories[inter].properties is cat("PQR").properties
    return ok, f"{len(plan.steps)} steps via {{P,Q,R}}"


def _genus_example() -> tuple[bool, str]:
    from .engine import Engine, Event

    letters = {n: ebinary_encode(format(i + 1, "03b")) for i, n in enumerate("LMNOXY")}
    e = Engine()
    base = [ef(letters["L"], letters["O"], ef(letters["L"])), ef(letters["L"], letters["O"], ef(letters["O"]))]
    e.init({"Mb": base})
    lmno = [letters[c] for c in "LMNO"]
    e.perceive(Event("Mb", removed=(base[0],), emergents=(ef(*lmno, ef(lmno[0])), ef(*lmno, ef(lmno[1])))))
    a = next(k for k in e.categories if e.label(k) is None and len(e.props(k)) == 4)
    b = e.modalities["Mb"].key
    before = (e.ledger.index(a), e.ledger.index(b))
    ok = e.genus_event(a, b) and (e.ledger.index(a), e.ledger.index(b)) == (before[0] - 1, before[1] + 1)
    return ok, f"indices {before} -> {(e.ledger.index(a), e.ledger.index(b))}"


_EXAMPLES: list[tuple[str, Callable[[], tuple[bool, str]]]] = [
    ("equality evaluator expansion and contradiction", _ex7),
    ("membership evaluator tautology", _ex5),
    ("four lineages", _lineages),
    ("category of two assemblies", _category),
    ("E-binary 101 decodes to 5", _ebinary),
    ("attractor intermediates", _attractor),
    ("first-born and second-born codes", _node_codes),
    ("three-modality recursion", _three_modalities),
    ("two-step manipulation via an intermediate", _manipulation_example),
    ("genus reassignment", _genus_example),
]


def example_names() -> list[str]:
    return [name for name, _ in _EXAMPLES]


def verify_examples() -> list[CheckResult]:
    out = []
    for name, fn in _EXAMPLES:
        ok, detail = fn()
        out.append(CheckResult(name, ok, detail))
    return out
