from __future__ import annotations

import itertools
from collections import defaultdict

import pytest

from egokernel import DomainError, ef, parse_formula, set_equal
from egokernel.categorize import is_instance
from egokernel.codec import ebinary_encode
from egokernel.engine import ChangeKind, Engine, EngineConfig, Event, Status, SymbolKind, ordinal
from egokernel.environment import load_scenario, parse_scenario, run_scenario
from egokernel.selfcheck import scenario_path

BUNDLED = ["three_modalities", "promotion", "emotion", "destroy", "eem_demo"]
LETTERS = {n: ebinary_encode(format(i + 1, "04b")) for i, n in enumerate("ABDEKLMNO")}

TOKENS = """
[tokens]
A = 001
B = 010
D = 011
E = 100
K = 101
O = 110
P = 111
"""

COMPLEX = TOKENS + """
[modalities]
Ma = A, B * 4

[schedule]
mode = scripted
budget = 1

[script.1]
modality = Ma
perturb = O, P * 2
remove = 2
emerge = A, K * 3

[script.1.2]
modality = Ma
emerge = B, K * 3
"""


def bundled(name: str, **kw):
    return run_scenario(load_scenario(scenario_path(name)), **kw)


def tokens(names: str) -> list:
    return [LETTERS[n] for n in names]


def instances(names: str, n: int) -> list:
    """``n`` distinct formulas whose only common aspects are the named tokens."""
    toks = tokens(names)
    masks = [m for m in range(1, 1 << len(toks))]
    return [ef(*toks, ef(*(t for i, t in enumerate(toks) if masks[k % len(masks)] >> i & 1))) for k in range(n)]


def episodes(trace: list[dict]) -> list[list[dict]]:
    out, cur = [], None
    for rec in trace:
        if rec["op"] == "emotion.simulate":
            cur = [rec]
        elif cur is not None and rec["op"].startswith("emotion."):
            cur.append(rec)
            if rec["op"] == "emotion.output":
                out.append(cur)
                cur = None
    return out


def check_contract(episode: list[dict]) -> None:
    head, steps = episode[0], [r for r in episode if r["op"] == "emotion.step"]
    e = head["category"]
    assert steps, "an emotion has at least one step"
    first = steps[0]["detail"]
    # 1: equilibrium state paired with a positive-index factor
    assert first["first_factor"] == e and first["first_factor_index"] == 0
    assert first["second_factor_index"] > 0 and not first["first_is_previous_output"]
    # 2: later steps chain the previous output with a positive-index factor
    for prev, rec in zip(steps, steps[1:]):
        d = rec["detail"]
        assert d["first_is_previous_output"] and d["first_factor"] == prev["category"]
        assert d["second_factor_index"] > 0
    # 3: the last output goes back to the emotional category
    assert steps[-1]["detail"]["last"] and steps[-1]["category"] == e
    assert episode[-1]["op"] == "emotion.output" and episode[-1]["category"] == e
    ledger_moves = [r for r in episode if r["ledger"]]
    assert sum(r["delta"] for r in ledger_moves if r["category"] == e) == 0


def test_ordinals_are_distinct():
    assert len({ordinal(n) for n in range(12)}) == 12
    assert ordinal(0).is_empty and ordinal(2) is parse_formula("{0,{0}}")


def test_init_errors():
    with pytest.raises(DomainError):
        Engine().init({})
    with pytest.raises(DomainError):
        Engine().init({"Ma": []})
    shared = instances("AB", 2)
    with pytest.raises(DomainError):
        Engine().init({"Ma": shared, "Mb": shared[:1]})
    e = Engine()
    with pytest.raises(DomainError):
        e.tick(1)
    e.init({"Ma": shared})
    with pytest.raises(DomainError):
        e.init({"Ma": shared})


def test_single_state_modality():
    e = Engine()
    x = instances("AB", 1)[0]
    org, snap = e.init({"Ma": [x]})
    assert e.props(e.modalities["Ma"].key) == {x}
    assert org is ef(ef(x)) and snap.states == {"Ma": (x,)}


def test_three_modalities_quantities():
    report = bundled("three_modalities")
    e = report.engine
    assert report.status is Status.EQUILIBRIUM
    fails = [(r["clock"], r["modality"]) for r in e.trace if r["op"] == "manipulate.fail"]
    assert fails == [(1, "Ma"), (2, "Ma"), (2, "Mb")]
    consumed = defaultdict(list)
    for r in e.trace:
        if r["op"] == "behave.consume":
            consumed[(r["clock"], r["modality"])].append(-r["delta"])
    assert list(consumed) == [(3, "Ma"), (3, "Mc"), (3, "Mb")]
    assert list(consumed.values()) == [[5, 5, 5], [4, 4], [3, 3]]
    assert {m: len(x.compliant()) for m, x in e.modalities.items()} == {"Ma": 10, "Mb": 11, "Mc": 8}
    labels = {e.label(k): v for k, v in report.residuals.items()}
    assert (labels["{C,G,K}"], labels["{A,E,F,P}"], labels["{B,D,V}"]) == (1, 0, 3)
    assert report.deficits[-1] == {"Ma": 0, "Mb": 0, "Mc": 0}


@pytest.mark.parametrize("name", BUNDLED)
def test_ledger_replays_from_trace(name):
    e = bundled(name).engine
    replay: dict[str, int] = defaultdict(int)
    for r in e.trace:
        if r["ledger"]:
            replay[r["category"]] += r["delta"]
    assert {k: v for k, v in replay.items() if v} == {k: v for k, v in e.ledger.counts.items() if v}


@pytest.mark.parametrize("name", BUNDLED)
def test_organisation_is_immutable(name):
    e = bundled(name).engine
    org = next(r for r in e.trace if r["op"] == "organisation")["render"][0]
    assert e.organisation.render == org
    assert e.organisation is ef(*(m.category_at_start.properties for m in e.modalities.values()))


@pytest.mark.parametrize("name", ["three_modalities", "promotion", "eem_demo"])
def test_behaviour_outputs_are_distinct_instances(name):
    e = bundled(name).engine
    for r in e.trace:
        if r["op"] in ("behave", "recall"):
            made = [parse_formula(s) for s in r["render"]]
            cat = e.categories[r["category"]]
            assert all(is_instance(x, cat) for x in made)
            assert all(not set_equal(x, y) for x, y in itertools.combinations(made, 2))


def test_behave_with_zero_deficit_is_a_noop():
    e = bundled("three_modalities").engine
    plan = next(iter(e.plans.values()))[0]
    before = (dict(e.ledger.counts), len(e.trace))
    assert e.behave(plan, 0, "Ma") == []
    assert (dict(e.ledger.counts), len(e.trace)) == before


def test_destructive_change_is_terminal():
    report = bundled("destroy")
    e = report.engine
    assert report.status is Status.DESTROYED and report.clocks == 1
    assert e.classify_change("Ma") is ChangeKind.DESTRUCTIVE
    assert any(r["op"] == "change.destructive" for r in e.trace)
    with pytest.raises(DomainError):
        e.tick(2)


def test_untouched_modality_is_structural():
    e = Engine()
    e.init({"Ma": instances("AB", 2)})
    assert e.classify_change("Ma") is ChangeKind.STRUCTURAL


def test_select_target_prefers_largest_deficit_then_lowest_id():
    e = Engine()
    ma, mb, mc = instances("AB", 3), instances("DE", 3), instances("KL", 3)
    e.init({"Mc": mc, "Mb": mb, "Ma": ma})
    assert e.select_target() is None
    e.perceive(Event("Mb", removed=(mb[0],)))
    e.perceive(Event("Ma", removed=(ma[0],)))
    assert e.select_target() == "Ma"
    assert e.select_target(exclude=["Ma"]) == "Mb"
    e.perceive(Event("Mc", removed=tuple(mc[:2])))
    assert e.select_target() == "Mc"


def test_perceive_rejects_missing_state_without_side_effects():
    e = Engine()
    ma = instances("AB", 2)
    e.init({"Ma": ma})
    before = (e.structure(), dict(e.ledger.counts), len(e.trace))
    with pytest.raises(DomainError):
        e.perceive(Event("Ma", removed=(ma[0], instances("DE", 1)[0])))
    with pytest.raises(DomainError):
        e.perceive(Event("Mz", removed=(ma[0],)))
    assert (e.structure(), dict(e.ledger.counts), len(e.trace)) == before


def test_repeated_perturbation_reuses_the_category():
    e = Engine()
    e.init({"Ma": instances("AB", 2)})
    e.perceive(Event("Ma", emergents=tuple(instances("DE", 2))))
    n = len(e.categories)
    e.perceive(Event("Ma", emergents=tuple(instances("DE", 3)[1:])))
    assert len(e.categories) == n
    key = e.categorize(instances("DE", 2))
    assert e.ledger.index(key) == 4


def genus_engine() -> tuple[Engine, str, str]:
    e = Engine()
    base = instances("LO", 3)
    e.init({"Mb": base})
    e.perceive(Event("Mb", removed=(base[0],), emergents=tuple(instances("LMNO", 2))))
    surplus = next(k for k in e.categories if len(e.props(k)) == 4)
    return e, surplus, e.modalities["Mb"].key


def test_genus_event_moves_both_indices_toward_zero():
    e, a, b = genus_engine()
    assert (e.ledger.index(a), e.ledger.index(b)) == (2, -1)
    assert e.genus_event(a, b)
    assert (e.ledger.index(a), e.ledger.index(b)) == (1, 0)
    assert e.deficit("Mb") == 0
    assert any(r["op"] == "genus.assign" and r["archetype"].endswith("GenusParadigma") for r in e.trace)


def test_genus_event_fails_on_disjoint_and_allows_equal():
    e, a, b = genus_engine()
    other = e.categorize(instances("DE", 2))
    assert not e.genus_event(other, b)
    assert not e.genus_event(b, a)
    before = e.ledger.index(a)
    assert e.genus_event(a, a)
    assert e.ledger.index(a) == before


def test_tick_runs_genus_after_failed_manipulation():
    e, a, b = genus_engine()
    e.tick(1)
    ops = [r["op"] for r in e.trace if r["clock"] == 1]
    assert ops.index("genus.assign") < ops.index("emotion.simulate")
    # the unit left in surplus feeds a one-step base emotion
    assert e.deficit("Mb") == 0 and e.ledger.index(a) == 0


def test_base_emotion_follows_contract():
    e = bundled("emotion").engine
    eps = episodes(e.trace)
    assert eps and eps[0][0]["detail"]["kind"] == "base"
    for ep in eps:
        check_contract(ep)
    assert all(e.ledger.index(k) >= 0 for k in e.categories)


def test_complex_emotion_follows_contract():
    cfg = EngineConfig(emotion_order=("complex", "base"))
    e = run_scenario(parse_scenario(COMPLEX), config=cfg).engine
    eps = episodes(e.trace)
    kinds = [ep[0]["detail"]["kind"] for ep in eps]
    assert kinds and kinds[0] == "complex"
    for ep in eps:
        check_contract(ep)
        chain = ep[0]["detail"]["chain"]
        assert all(e.props(x) & e.props(y) for x, y in zip(chain, chain[1:]))


def test_emotions_wait_for_equilibrium():
    e = Engine()
    ma = instances("AB", 2)
    e.init({"Ma": ma})
    e.perceive(Event("Ma", removed=(ma[0],), emergents=tuple(instances("AK", 2))))
    assert e.run_emotions() == []


def test_no_surplus_no_emotion():
    e = Engine()
    e.init({"Ma": instances("AB", 2)})
    assert e.run_emotions() == []


def test_symbol_promotion_sequence():
    report = bundled("promotion")
    assert report.promotions == [
        (2, "{O,P}", "PerceptualSymbol"),
        (3, "{O,P}", "ObjectiveSymbol"),
        (3, "{O,P}", "MentalImage"),
    ]
    e = report.engine
    recall_clocks = [r["clock"] for r in e.trace if r["op"] == "recall"]
    assert recall_clocks == [2, 3]
    assert not [r for r in e.trace if r["op"] == "manipulate.plan" and r["clock"] > 1]
    key = next(k for k in e.symbols)
    assert e.symbols[key] == {SymbolKind.PERCEPTUAL, SymbolKind.OBJECTIVE, SymbolKind.MENTAL_IMAGE}


def test_fresh_category_is_not_promoted():
    assert bundled("three_modalities").promotions == []
    report = run_scenario(load_scenario(scenario_path("promotion")), budget=1)
    assert report.promotions == []


def test_coupling_threshold_is_configurable():
    sc = load_scenario(scenario_path("promotion"))
    report = run_scenario(sc, config=EngineConfig(coupling_threshold=3, labels=sc.labels()))
    assert [p[2] for p in report.promotions] == ["PerceptualSymbol"]


def test_engine_config_validation():
    with pytest.raises(DomainError):
        EngineConfig(max_chain=1)
    with pytest.raises(DomainError):
        EngineConfig(emotion_order=("fear",))
