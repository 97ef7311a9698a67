"""Acceptance suite: one summary line per criterion is printed at the end of the session."""

from __future__ import annotations

import difflib
import itertools
import random
import time
from collections import defaultdict
from pathlib import Path

import pytest

from egokernel import EMPTY, ParseError, SentenceClass, classify, ef, parse, parse_formula, set_equal
from egokernel.categorize import category
from egokernel.codec import attractor_assemblies, attractor_encode, ebinary_decode, ebinary_encode, ordered_pair
from egokernel.enumerate import random_assembly, random_formula, up_to_size
from egokernel.environment import load_scenario, parse_scenario, run_scenario
from egokernel.evaluator import equality_evaluator, equality_expression, render_expr
from egokernel.lineage import _child_code, code_nodes, fast_equal, lineage_set
from egokernel.selfcheck import EXAMPLE_7, scenario_path

from test_engine import check_contract, episodes
from test_environment import EEM

GOLDEN = Path(__file__).parent / "golden" / "three_modalities_trace.jsonl"
CORPUS = up_to_size(9)
ATTRACTOR_HISTOGRAM = [1, 2, 3, 1, 2, 1]
# literal whole-distribution string from the worked attractor example, 0 standing for the empty symbol
ATTRACTOR_LITERAL = (
    "{{{{{{{0},{{0},0}}},{{{{0},{{0},0}}},0}},{{{{{0},{{0},0}}},{{{{0},{{0},0}}},0}},0}"
)


def random_pairs(n: int = 1000) -> list:
    rng = random.Random(20240601)
    pairs = []
    for i in range(n):
        x = random_formula(rng, 4)
        # every fifth pair compares a formula with itself so both verdicts occur
        pairs.append((x, x) if i % 5 == 0 else (x, random_formula(rng, 4)))
    return pairs


def test_criterion_1_self_reference(criterion):
    c = criterion(1, "equality evaluator is a tautology exactly on equal arguments")
    start = time.perf_counter()
    bad = []
    pairs = list(itertools.product(CORPUS, repeat=2)) + random_pairs()
    for x, y in pairs:
        want = SentenceClass.TAUTOLOGY if set_equal(x, y) else SentenceClass.CONTRADICTION
        if classify(equality_evaluator(x, y)) is not want:
            bad.append((x.render, y.render))
    elapsed = time.perf_counter() - start
    assert c.part("exhaustive and random pairs", not bad, f"{len(pairs)} pairs, {len(bad)} exceptions")
    assert c.part("runtime", elapsed < 120, f"{elapsed:.1f}s")


def test_criterion_2_worked_expansion(criterion):
    c = criterion(2, "worked equality evaluator renders and classifies as stated")
    text = render_expr(equality_expression("{0}", "{0,{0}}"))
    assert c.part("rendering", text == EXAMPLE_7, text)
    cls = classify(equality_evaluator("{0}", "{0,{0}}"))
    assert c.part("class", cls is SentenceClass.CONTRADICTION, cls.value)


def test_criterion_3_lineage(criterion):
    c = criterion(3, "lineage sets agree with equality and the four lineages match")
    bad = [(x, y) for x, y in itertools.product(CORPUS, repeat=2) if fast_equal(x, y) != (x is y)]
    assert c.part("exhaustive corpus", not bad, f"{len(CORPUS) ** 2} pairs")
    got = lineage_set("{0,{{0}},{0,{0}}}")
    assert c.part("four lineages", got == ((9, 1), (9, 3, 2, 1), (9, 4, 1), (9, 4, 2, 1)), str(got))


def test_criterion_4_category(criterion):
    c = criterion(4, "category of the worked pair")
    cat = category([parse_formula("{0,{{0}},{0,{{0}}}}"), parse_formula("{{0},{{0}}}")])
    assert c.part("properties", cat.properties is parse_formula("{{{0}},0}"), cat.key)
    assert c.part("excludes {0}", ef(EMPTY) not in cat.aspects)


def test_criterion_5_codec(criterion):
    c = criterion(5, "E-binary and attractor goldens")
    assert c.part("101 decodes to 5", ebinary_decode(ebinary_encode("101")) == 5)
    bad = [
        "".join(b)
        for n in range(1, 11)
        for b in itertools.product("01", repeat=n)
        if ebinary_decode(ebinary_encode("".join(b))) != int("".join(b), 2)
    ]
    assert c.part("round trip to length 10", not bad, f"{len(bad)} mismatches")
    xs = attractor_assemblies(ATTRACTOR_HISTOGRAM)
    stated = (xs[1] is parse_formula("{{{0}},{{0},0}}"), xs[4] is parse_formula("{{0},{0,{0}}}"))
    assert c.part("attractor intermediates", all(stated), "X2 and X5 strings")
    assert c.part("attractor whole", attractor_encode(ATTRACTOR_HISTOGRAM) is ordered_pair(xs[2], xs[4]))


@pytest.mark.xfail(raises=ParseError, strict=True, reason="the printed string has 28 opening and 25 closing braces")
def test_criterion_5_attractor_literal(criterion):
    c = criterion(5, "E-binary and attractor goldens")
    ok = False
    try:
        ok = parse_formula(ATTRACTOR_LITERAL) is attractor_encode(ATTRACTOR_HISTOGRAM)
    finally:
        opens, closes = ATTRACTOR_LITERAL.count("{"), ATTRACTOR_LITERAL.count("}")
        c.part("literal attractor string", ok, f"unbalanced literal, {opens} opening vs {closes} closing braces")
    assert ok


def test_criterion_6_node_codes(criterion):
    c = criterion(6, "node codes on random trees")
    rng = random.Random(6)
    problems = 0
    for _ in range(500):
        tree = random_assembly(rng, rng.randint(1, 200))
        codes = code_nodes(tree)
        values = list(codes.values())
        problems += len(set(values)) != len(values) or codes[()] != "0"
        problems += any(code.endswith("0") for path, code in codes.items() if path)
    assert c.part("injective, rooted at 0, no trailing 0", problems == 0, "500 trees")
    worked = [_child_code("012004", 0)] + [_child_code("012004", i) for i in (1, 2, 9, 10)]
    assert c.part("worked codes", worked == ["0120004", "01200401", "01200402", "01200409", "012004011"], ", ".join(worked))
    tree = parse("{0,0,{0,0}}")
    assert c.part("row one", [code_nodes(tree)[(i,)] for i in range(3)] == ["01", "02", "03"])


def test_criterion_7_three_modalities(criterion, tmp_path):
    c = criterion(7, "three-modality scripted run")
    trace = tmp_path / "three_modalities.jsonl"
    report = run_scenario(load_scenario(scenario_path("three_modalities")), trace_path=trace)
    e = report.engine
    fails = [(r["clock"], r["modality"]) for r in e.trace if r["op"] == "manipulate.fail"]
    assert c.part("clock 1 and 2 failures", fails == [(1, "Ma"), (2, "Ma"), (2, "Mb")], str(fails))
    consumed = defaultdict(list)
    for r in e.trace:
        if r["op"] == "behave.consume" and r["clock"] == 3:
            consumed[r["modality"]].append(-r["delta"])
    want = {"Ma": [5, 5, 5], "Mc": [4, 4], "Mb": [3, 3]}
    assert c.part("order and consumptions", list(consumed.items()) == list(want.items()), str(dict(consumed)))
    counts = {m: len(x.compliant()) for m, x in e.modalities.items()}
    assert c.part("final structures", counts == {"Ma": 10, "Mb": 11, "Mc": 8}, str(counts))
    idx = {e.label(k): v for k, v in report.residuals.items()}
    residual = (idx["{C,G,K}"], idx["{A,E,F,P}"], idx["{B,D,V}"])
    assert c.part("residual indices", residual == (1, 0, 3), str(residual))
    assert c.part("status", report.status.value == "Equilibrium", report.status.value)
    got = trace.read_text(encoding="utf-8").splitlines()
    diff = list(difflib.unified_diff(GOLDEN.read_text(encoding="utf-8").splitlines(), got, lineterm="", n=0))
    assert c.part("golden trace diff", not diff, f"{len(diff)} diff lines")


def test_criterion_8_symbols_and_emotions(criterion):
    c = criterion(8, "symbol promotion and emotional chains")
    report = run_scenario(load_scenario(scenario_path("promotion")))
    kinds = [(clock, kind) for clock, _, kind in report.promotions]
    assert c.part("perceptual then objective", kinds[:2] == [(2, "PerceptualSymbol"), (3, "ObjectiveSymbol")], str(kinds))
    recalls = [r for r in report.engine.trace if r["op"] == "recall"]
    replans = [r for r in report.engine.trace if r["op"] == "manipulate.plan" and r["clock"] > 1]
    assert c.part("recall skips manipulation", len(recalls) == 2 and not replans)
    e = run_scenario(load_scenario(scenario_path("emotion"))).engine
    eps = episodes(e.trace)
    for ep in eps:
        check_contract(ep)
    assert c.part("emotional chain contract", bool(eps), f"{len(eps)} chains checked")


def test_criterion_9_determinism(criterion, tmp_path):
    c = criterion(9, "seeded determinism")
    sc = parse_scenario(EEM)

    def trace(scenario, seed, name):
        path = tmp_path / name
        run_scenario(scenario, seed=seed, trace_path=path)
        return path.read_bytes()

    assert c.part("same seed, same bytes", trace(sc, 4, "a") == trace(sc, 4, "b"))
    assert c.part("seed changes fillers", trace(sc, 4, "c") != trace(sc, 5, "d"))
    three_modalities = load_scenario(scenario_path("three_modalities"))
    assert c.part("golden unaffected by seed", trace(three_modalities, 1, "e") == trace(three_modalities, 77, "f") == GOLDEN.read_bytes())
