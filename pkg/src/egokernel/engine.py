"""The homeostatic individual: organisation, structure and the clock loop.

One tick runs perceive, change classification, recall of stored plans,
the manipulation/behaviour recursion, genus reassignment, emotional chains
and a structure snapshot, in that order. Every state transition is appended
to :attr:`Engine.trace` as a flat record; records whose ``ledger`` flag is set
replay to the homeostatic ledger exactly.
"""

from __future__ import annotations

import enum
import itertools
import json
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .archetypes import ArchetypeStore, Typology, datum_pair
from .assembly import EMPTY, EFormula, ef, wrap
from .categorize import Category, HomeostaticLedger, category, is_instance
from .codec import ebinary_from_int, ordered_pair, ordered_tuple
from .errors import DomainError

__all__ = [
    "ChangeKind",
    "Engine",
    "EngineConfig",
    "Event",
    "Modality",
    "Plan",
    "State",
    "Status",
    "Step",
    "StructureSnapshot",
    "SymbolKind",
    "ordinal",
    "write_trace",
]

log = logging.getLogger(__name__)
TRACE = 5  # below DEBUG: every trace record
_INFO_OPS = {"snapshot", "run.end", "change.destructive", "manipulate.fail"}

GENERIC_CATEGORY = wrap(EMPTY, 10)  # coded stand-in for "any category" in genus records


class Status(enum.Enum):
    RUNNING = "Running"
    EQUILIBRIUM = "Equilibrium"
    DESTROYED = "Destroyed"
    BUDGET_EXHAUSTED = "BudgetExhausted"


class ChangeKind(enum.Enum):
    STRUCTURAL = "structural"
    DESTRUCTIVE = "destructive"


class SymbolKind(enum.Enum):
    PERCEPTUAL = "PerceptualSymbol"
    OBJECTIVE = "ObjectiveSymbol"
    MENTAL_IMAGE = "MentalImage"


def ordinal(n: int) -> EFormula:
    """Von Neumann ordinal: 0, {0}, {0,{0}}, ..."""
    acc: list[EFormula] = []
    for _ in range(n):
        acc.append(ef(*acc))
    return ef(*acc)


@dataclass
class State:
    uid: int
    formula: EFormula
    category: str


@dataclass
class Modality:
    id: str
    category_at_start: Category
    initial_count: int
    states: list[State] = field(default_factory=list)

    @property
    def key(self) -> str:
        return self.category_at_start.key

    def compliant(self) -> list[State]:
        return [s for s in self.states if s.category == self.key]


@dataclass(frozen=True)
class Event:
    """Triggers ``X``, removed states ``Y`` and emergents ``Z`` on one modality."""

    modality: str
    triggers: tuple[EFormula, ...] = ()
    removed: tuple[EFormula, ...] = ()
    emergents: tuple[EFormula, ...] = ()
    kind: str = "exogenous"

    def to_formula(self) -> EFormula:
        return ef(ef(ef(*self.triggers), ef(*self.removed)), ef(*self.emergents))

    @property
    def is_perception(self) -> bool:
        return self.kind == "exogenous"


@dataclass(frozen=True)
class StructureSnapshot:
    clock: int
    states: Mapping[str, tuple[EFormula, ...]]


@dataclass(frozen=True)
class Step:
    """One two-factor manipulation: ``first`` and ``second`` yield ``output``."""

    first: str
    second: str
    output: str
    paradigma: EFormula


@dataclass(frozen=True)
class Plan:
    target: str
    factors: tuple[str, ...]
    steps: tuple[Step, ...]
    name: EFormula

    @property
    def intermediates(self) -> tuple[str, ...]:
        return tuple(s.output for s in self.steps[:-1])


@dataclass
class EngineConfig:
    max_chain: int = 6
    max_emotion_chain: int = 4
    coupling_threshold: int = 2
    # a complex chain always implies a base chain, so the first kind listed wins
    emotion_order: tuple[str, ...] = ("base", "complex")
    history: int = 64
    labels: Mapping[EFormula, str] = field(default_factory=dict)
    individual: int = 1

    def __post_init__(self) -> None:
        if self.max_chain < 2 or self.max_emotion_chain < 1 or self.coupling_threshold < 1:
            raise DomainError("chain bounds and coupling threshold must be positive")
        if not self.emotion_order or set(self.emotion_order) - {"base", "complex"}:
            raise DomainError("emotion_order lists 'base' and/or 'complex'")


class Engine:
    """Single deterministic individual advanced by :meth:`tick`."""

    def __init__(self, config: EngineConfig | None = None) -> None:
        self.config = config or EngineConfig()
        self.clock = 0
        self.status = Status.RUNNING
        self.modalities: dict[str, Modality] = {}
        self.organisation: EFormula | None = None
        self.ledger = HomeostaticLedger()
        self.store = ArchetypeStore(self.config.individual)
        self.categories: dict[str, Category] = {}
        self.category_names: dict[str, EFormula] = {}
        self.provenance: dict[str, set[str]] = {}
        self.plans: dict[str, list[Plan]] = {}
        self.symbol_plans: dict[str, tuple[str, Plan]] = {}
        self.symbols: dict[str, set[SymbolKind]] = {}
        self.promotions: list[tuple[int, str, SymbolKind]] = []
        self.history: deque[StructureSnapshot] = deque(maxlen=self.config.history)
        self.trace: list[dict] = []
        self._uid = itertools.count()
        self._acc: dict[str, int] = {}
        self._aspect_names: dict[EFormula, EFormula] = {}
        self._paradigmas: dict[tuple[str, str, str], EFormula] = {}
        self._pending: dict[str, list[str]] = {}
        self._perceived: list[tuple[str, str]] = []
        self._last_recall: dict[str, tuple[int, int]] = {}

    # ------------------------------------------------------------------
    # trace helpers

    def label(self, key: str | None) -> str | None:
        if key is None or key not in self.categories:
            return None
        labels = self.config.labels
        aspects = self.categories[key].aspects
        if aspects and all(a in labels for a in aspects):
            return "{" + ",".join(sorted(labels[a] for a in aspects)) + "}"
        return None

    def _emit(
        self,
        op: str,
        modality: str | None = None,
        category: str | None = None,
        delta: int | None = None,
        archetype: str | None = None,
        render: Sequence[str] | None = None,
        ledger: bool = False,
        **detail,
    ) -> None:
        rec = {
            "clock": self.clock,
            "op": op,
            "modality": modality,
            "category": category,
            "category_label": self.label(category),
            "delta": delta,
            "archetype": archetype,
            "render": list(render) if render is not None else None,
            "ledger": ledger,
        }
        if detail:
            rec["detail"] = detail
        self.trace.append(rec)
        if op in _INFO_OPS or op.startswith("symbol."):
            level = logging.INFO
        elif ledger:
            level = logging.DEBUG
        else:
            level = TRACE
        if log.isEnabledFor(level):
            cat = rec["category_label"] or (category[:40] + "..." if category and len(category) > 40 else category)
            log.log(level, "clock %s %s modality=%s category=%s delta=%s %s", self.clock, op, modality, cat, delta, detail or "")

    def _ledger(self, op: str, key: str, delta: int, modality: str | None = None, **kw) -> None:
        self.ledger.apply(key, delta)
        self._emit(op, modality=modality, category=key, delta=delta, ledger=True, **kw)

    # ------------------------------------------------------------------
    # categories

    def _register(self, cat: Category, provenance: Iterable[str] = ()) -> str:
        key = cat.key
        if key not in self.categories:
            self.categories[key] = cat
            self.provenance[key] = set()
            name = self.store.category_archetype(
                sorted(cat.aspects, key=lambda a: (a.desc, a.render)), self._aspect_names
            )
            self.category_names[key] = name
            self._emit("category.new", category=key, archetype=self.store.get_by_name(name).short)
        self.provenance[key].update(p for p in provenance if p)
        return key

    def categorize(self, xs: Sequence[EFormula], provenance: Iterable[str] = ()) -> str:
        """Key of the category a batch is assigned to; a stored category with the same aspects is reused."""
        return self._register(category(xs), provenance)

    def props(self, key: str) -> frozenset[EFormula]:
        return self.categories[key].aspects

    def _new_state(self, formula: EFormula, key: str) -> State:
        return State(next(self._uid), formula, key)

    # ------------------------------------------------------------------
    # initialisation

    def init(self, starting: Mapping[str, Sequence[EFormula]]) -> tuple[EFormula, StructureSnapshot]:
        if self.organisation is not None:
            raise DomainError("engine already initialised")
        if not starting:
            raise DomainError("at least one modality is required")
        seen: dict[EFormula, str] = {}
        for mid, xs in starting.items():
            if not xs:
                raise DomainError(f"modality {mid} is empty")
            for x in xs:
                other = seen.setdefault(x, mid)
                if other != mid:
                    raise DomainError(f"modalities {other} and {mid} share a state")
        for mid in sorted(starting):
            xs = list(starting[mid])
            cat = category(xs)
            key = self._register(cat)
            mod = Modality(mid, cat, len(xs))
            mod.states = [self._new_state(x, key) for x in xs]
            self.modalities[mid] = mod
            self._pending[mid] = []
            self._emit("init", modality=mid, category=key, delta=len(xs), render=[x.render for x in xs])
        self.organisation = ef(*(m.category_at_start.properties for m in self.modalities.values()))
        self._emit("organisation", render=[self.organisation.render])
        snap = self._snapshot()
        return self.organisation, snap

    # ------------------------------------------------------------------
    # structure queries

    def deficit(self, mid: str) -> int:
        m = self.modalities[mid]
        return m.initial_count - len(m.compliant())

    def deficits(self) -> dict[str, int]:
        return {mid: self.deficit(mid) for mid in self.modalities}

    def live(self, key: str) -> list[tuple[Modality, State]]:
        out = [(m, s) for m in self.modalities.values() for s in m.states if s.category == key]
        out.sort(key=lambda ms: ms[1].uid)
        return out

    def available(self, key: str) -> int:
        """Surplus units of ``key`` backed by live elements."""
        idx = self.ledger.index(key)
        if idx <= 0:
            return 0
        return min(idx, len(self.live(key)))

    def surplus_keys(self) -> list[str]:
        return sorted(k for k in self.categories if self.available(k) > 0)

    def structure(self) -> dict[str, tuple[EFormula, ...]]:
        return {mid: tuple(s.formula for s in m.states) for mid, m in self.modalities.items()}

    def _snapshot(self) -> StructureSnapshot:
        snap = StructureSnapshot(self.clock, self.structure())
        self.history.append(snap)
        return snap

    # ------------------------------------------------------------------
    # perception

    def perceive(self, event: Event) -> None:
        mod = self.modalities.get(event.modality)
        if mod is None:
            raise DomainError(f"unknown modality {event.modality!r}")
        # locate every Y before touching anything
        pool = list(mod.states)
        removed: list[State] = []
        for y in event.removed:
            hit = next((s for s in pool if s.formula is y), None)
            if hit is None:
                raise DomainError(f"state to remove is not present in {mod.id}: {y.render}")
            pool.remove(hit)
            removed.append(hit)

        cx = None
        if event.triggers:
            cx = self.categorize(event.triggers)
            arch = [self.store.create(Typology.PERCEPTION, x).short for x in event.triggers]
            qty = self.store.create(Typology.QUANTITY, ebinary_from_int(len(event.triggers)))
            su = self.store.create(
                Typology.SENSUS_UNDAM, datum_pair(self.category_names[cx], qty.name)
            )
            self._emit(
                "perceive.triggers",
                modality=mod.id,
                category=cx,
                delta=len(event.triggers),
                archetype=su.short,
                render=[x.render for x in event.triggers],
                perceptions=arch,
                kind=event.kind,
            )
            if event.is_perception:
                self._perceived.append((cx, mod.id))
                if cx not in self._pending[mod.id]:
                    self._pending[mod.id].append(cx)

        cy = None
        if removed:
            mod.states = pool
            by_cat: dict[str, list[State]] = {}
            for s in removed:
                by_cat.setdefault(s.category, []).append(s)
            for key in sorted(by_cat):
                group = by_cat[key]
                self._ledger(
                    "perceive.remove", key, -len(group), modality=mod.id, render=[s.formula.render for s in group]
                )
            cy = removed[0].category if len(by_cat) == 1 else self.categorize([s.formula for s in removed])

        cz = None
        if event.emergents:
            cz = self.categorize(event.emergents, provenance=[cx] if cx else [])
            mod.states.extend(self._new_state(z, cz) for z in event.emergents)
            self._ledger(
                "perceive.emerge",
                cz,
                len(event.emergents),
                modality=mod.id,
                render=[z.render for z in event.emergents],
            )

        if cx and cy and cz:
            par = self._paradigma(cx, cy, cz)
            qe = self.store.create(
                Typology.QUANTITY_EVENT,
                ordered_tuple([ebinary_from_int(len(v)) for v in (event.triggers, removed, event.emergents)]),
            )
            ev = self.store.create(Typology.EVENT, ordered_pair(par, qe.name), refs=(par, qe.name))
            self._emit("perceive.event", modality=mod.id, category=cz, archetype=ev.short, render=[event.to_formula().render])

    def _paradigma(self, first: str, second: str, output: str) -> EFormula:
        """Recall or store the interpretation ``{{C(first), C(second)}, C(output)}``."""
        k = (first, second, output)
        hit = self._paradigmas.get(k)
        if hit is not None:
            return hit
        factors = self.store.create(
            Typology.FACTORS, datum_pair(self.category_names[first], self.category_names[second])
        )
        par = self.store.create(
            Typology.PARADIGMA,
            ordered_pair(factors.name, self.category_names[output]),
            refs=(factors.name, self.category_names[output]),
        )
        self._paradigmas[k] = par.name
        return par.name

    def classify_change(self, mid: str) -> ChangeKind:
        m = self.modalities[mid]
        if any(is_instance(s.formula, m.category_at_start) for s in m.states):
            return ChangeKind.STRUCTURAL
        return ChangeKind.DESTRUCTIVE

    # ------------------------------------------------------------------
    # manipulation and behaviour

    def select_target(self, exclude: Iterable[str] = ()) -> str | None:
        skip = set(exclude)
        ranked = sorted((-d, mid) for mid, d in self.deficits().items() if d > 0 and mid not in skip)
        return ranked[0][1] if ranked else None

    def manipulate(self, mid: str) -> Plan | None:
        target = self.modalities[mid].key
        for plan in self.plans.get(target, []):
            if all(self.available(f) > 0 for f in plan.factors):
                self._emit("manipulate.recall", modality=mid, category=target, archetype=self._short(plan.name))
                return plan
        need = self.props(target)
        candidates = [k for k in self.surplus_keys() if k != target and self.props(k) & need]
        for size in range(2, self.config.max_chain + 1):
            for combo in itertools.combinations(candidates, size):
                union = frozenset().union(*(self.props(k) for k in combo))
                if need <= union:
                    plan = self._build_plan(target, combo)
                    self._emit(
                        "manipulate.plan",
                        modality=mid,
                        category=target,
                        archetype=self._short(plan.name),
                        factors=list(combo),
                        factor_labels=[self.label(k) for k in combo],
                        intermediates=list(plan.intermediates),
                    )
                    return plan
        self._emit("manipulate.fail", modality=mid, category=target)
        return None

    def _short(self, name: EFormula) -> str:
        return self.store.get_by_name(name).short

    def _build_plan(self, target: str, factors: Sequence[str]) -> Plan:
        need = self.props(target)
        steps: list[Step] = []
        acc = factors[0]
        props = set(self.props(acc))
        for i, f in enumerate(factors[1:], start=2):
            props |= self.props(f)
            if i == len(factors):
                out = target
            else:
                out = self._register(Category(ef(*(props & need))), self.provenance.get(acc, ()))
            steps.append(Step(acc, f, out, self._paradigma(acc, f, out)))
            acc = out
        name = steps[0].paradigma
        for s in steps[1:]:
            name = self.store.create(
                Typology.CHAIN, datum_pair(name, s.paradigma), refs=(name, s.paradigma)
            ).name
        plan = Plan(target, tuple(factors), tuple(steps), name)
        self.plans.setdefault(target, []).append(plan)
        return plan

    def _next_acc(self, key: str, props: frozenset[EFormula]) -> EFormula:
        n = self._acc.get(key, 0)
        while ordinal(n) in props:
            n += 1
        self._acc[key] = n + 1
        return ordinal(n)

    def _consume(self, key: str, reason: str) -> State:
        m, s = self.live(key)[0]
        m.states.remove(s)
        return s

    def behave(self, plan: Plan, d: int, mid: str, op: str = "behave") -> list[State]:
        """Execute ``plan`` up to ``d`` times; returns the produced states."""
        if d <= 0:
            return []
        q = min([d] + [self.available(f) for f in plan.factors])
        if q <= 0:
            return []
        mod = self.modalities[mid]
        target = plan.target
        need = self.props(target)
        for f in plan.factors:
            used = [self._consume(f, op) for _ in range(q)]
            self._ledger(f"{op}.consume", f, -q, modality=mid, render=[s.formula.render for s in used])
        for inter in plan.intermediates:
            before = self.ledger.index(inter)
            self.ledger.apply(inter, q).apply(inter, -q)
            assert self.ledger.index(inter) == before
            self._emit(f"{op}.intermediate", modality=mid, category=inter, delta=0)
        qe = self.store.create(Typology.QUANTITY_EVENT, ordered_tuple([ebinary_from_int(1)] * 3))
        for step in plan.steps:
            for _ in range(q):
                self.store.create(Typology.EVENT, ordered_pair(step.paradigma, qe.name), refs=(step.paradigma, qe.name))
        made = []
        for _ in range(q):
            made.append(self._new_state(ef(*need, self._next_acc(target, need)), target))
        mod.states.extend(made)
        self._ledger(
            op,
            target,
            q,
            modality=mid,
            archetype=self._short(plan.name),
            render=[s.formula.render for s in made],
        )
        return made

    def _recursion(self) -> None:
        while True:
            progressed = False
            tried: list[str] = []
            while (mid := self.select_target(tried)) is not None:
                tried.append(mid)
                plan = self.manipulate(mid)
                if plan is None:
                    continue
                if self.behave(plan, self.deficit(mid), mid):
                    self._associate(mid, plan)
                    progressed = True
                    break
            if not progressed:
                return

    # ------------------------------------------------------------------
    # genus

    def genus_event(self, surplus: str, deficit: str) -> bool:
        """Reassign one element of ``surplus`` to ``deficit`` when its properties allow."""
        if not self.props(deficit) <= self.props(surplus) or self.available(surplus) <= 0:
            self._emit("genus.fail", category=deficit, source=surplus)
            return False
        src_mod, s = self.live(surplus)[0]
        dst = next((m for m in self.modalities.values() if m.key == deficit), src_mod)
        src_mod.states.remove(s)
        s.category = deficit
        dst.states.append(s)
        gp = self.store.create(
            Typology.GENUS_PARADIGMA,
            ordered_pair(
                datum_pair(GENERIC_CATEGORY, self.category_names[surplus]), self.category_names[deficit]
            ),
        )
        self._ledger("genus.release", surplus, -1, modality=src_mod.id, render=[s.formula.render])
        self._ledger("genus.assign", deficit, 1, modality=dst.id, archetype=gp.short, render=[s.formula.render])
        return True

    def _genus(self) -> None:
        for mid in sorted(self.modalities, key=lambda m: (-self.deficit(m), m)):
            target = self.modalities[mid].key
            while self.deficit(mid) > 0:
                src = next(
                    (k for k in self.surplus_keys() if k != target and self.props(target) <= self.props(k)), None
                )
                if src is None or not self.genus_event(src, target):
                    break

    # ------------------------------------------------------------------
    # symbols

    def _associate(self, mid: str, plan: Plan) -> None:
        for cx in self._pending[mid]:
            if cx not in self.symbol_plans:
                self.symbol_plans[cx] = (mid, plan)
                self._emit("symbol.associate", modality=mid, category=cx, archetype=self._short(plan.name))
        if self.deficit(mid) == 0:
            self._pending[mid] = []

    def _mark(self, key: str, kind: SymbolKind) -> None:
        marks = self.symbols.setdefault(key, set())
        if kind in marks and kind is not SymbolKind.MENTAL_IMAGE:
            return
        marks.add(kind)
        self.promotions.append((self.clock, key, kind))
        self._emit(f"symbol.{kind.name.lower()}", category=key)

    def _recall(self) -> None:
        seen = set()
        for cx, _ in self._perceived:
            if cx in seen or cx not in self.symbol_plans:
                continue
            seen.add(cx)
            mid, plan = self.symbol_plans[cx]
            if not all(self.available(f) > 0 for f in plan.factors):
                continue
            if not self.behave(plan, self.deficit(mid), mid, op="recall"):
                continue
            self._mark(cx, SymbolKind.PERCEPTUAL)
            last, streak = self._last_recall.get(cx, (None, 0))
            streak = streak + 1 if last == self.clock - 1 else 1
            self._last_recall[cx] = (self.clock, streak)
            if streak >= self.config.coupling_threshold:
                self._mark(cx, SymbolKind.OBJECTIVE)
            if self.deficit(mid) == 0:
                self._pending[mid] = []

    # ------------------------------------------------------------------
    # emotions

    def _emotional_candidates(self) -> list[str]:
        return [k for k in sorted(self.categories) if self.ledger.index(k) == 0 and self.live(k)]

    def _base_chain(self, e: str) -> list[str] | None:
        ep = self.props(e)
        cands = [k for k in self.surplus_keys() if self.props(k) & ep]
        for size in range(1, self.config.max_emotion_chain + 1):
            for combo in itertools.combinations(cands, size):
                if ep <= frozenset().union(*(self.props(k) & ep for k in combo)):
                    return list(combo)
        return None

    def _complex_chain(self, e: str) -> list[str] | None:
        ep = self.props(e)
        cands = self.surplus_keys()
        for size in range(2, self.config.max_emotion_chain + 1):
            for perm in itertools.permutations(cands, size):
                if not (self.props(perm[0]) & ep and self.props(perm[-1]) & ep):
                    continue
                if any(not self.props(a) & self.props(b) for a, b in zip(perm, perm[1:])):
                    continue
                if ep <= frozenset().union(*(self.props(k) for k in perm)):
                    return list(perm)
        return None

    def _emotion_outputs(self, e: str, chain: Sequence[str], kind: str) -> list[frozenset[EFormula]]:
        ep = self.props(e)
        outs: list[frozenset[EFormula]] = []
        acc: frozenset[EFormula] = frozenset()
        for i, c in enumerate(chain):
            cp = self.props(c)
            acc = acc | (cp & ep)
            if kind == "complex" and i + 1 < len(chain):
                acc = acc | (cp & self.props(chain[i + 1]))
            outs.append(acc)
        return outs

    def run_emotions(self) -> list[tuple[str, tuple[str, ...], str]]:
        """Execute emotional chains until none is available; returns (kind, chain, category) triples."""
        done: list[tuple[str, tuple[str, ...], str]] = []
        if any(d > 0 for d in self.deficits().values()):
            return done
        while True:
            found = None
            for e in self._emotional_candidates():
                finders = {"base": self._base_chain, "complex": self._complex_chain}
                for kind in self.config.emotion_order:
                    chain = finders[kind](e)
                    if chain:
                        found = (kind, chain, e)
                        break
                if found:
                    break
            if found is None:
                return done
            kind, chain, e = found
            self._execute_emotion(kind, chain, e)
            done.append((kind, tuple(chain), e))

    def _execute_emotion(self, kind: str, chain: Sequence[str], e: str) -> None:
        # dry run on a ledger copy first
        sim = self.ledger.copy()
        for c in chain:
            sim.apply(c, -1)
        if any(sim.index(c) < 0 for c in chain):
            raise AssertionError("emotional chain would overdraw a surplus category")
        self._emit("emotion.simulate", category=e, kind=kind, chain=list(chain), chain_labels=[self.label(c) for c in chain])
        for c in chain:
            for cx in sorted(self.provenance.get(c, ())):
                if SymbolKind.OBJECTIVE in self.symbols.get(cx, ()):
                    self._mark(cx, SymbolKind.MENTAL_IMAGE)

        outs = self._emotion_outputs(e, chain, kind)
        emod, estate = self.live(e)[0]
        first_index = self.ledger.index(e)
        emod.states.remove(estate)
        self._ledger("emotion.state", e, -1, modality=emod.id, render=[estate.formula.render], kind="endogenous")
        prev_key = e
        for i, c in enumerate(chain):
            second_index = self.ledger.index(c)
            used = self._consume(c, "emotion")
            self._ledger("emotion.consume", c, -1, modality=emod.id, render=[used.formula.render])
            last = i == len(chain) - 1
            out_key = e if last else self._register(Category(ef(*outs[i])))
            if not last:
                before = self.ledger.index(out_key)
                self.ledger.apply(out_key, 1).apply(out_key, -1)
                assert self.ledger.index(out_key) == before
            self._emit(
                "emotion.step",
                modality=emod.id,
                category=out_key,
                step=i + 1,
                first_factor=prev_key,
                first_factor_index=first_index if i == 0 else None,
                first_is_previous_output=i > 0,
                second_factor=c,
                second_factor_index=second_index,
                last=last,
            )
            prev_key = out_key
        need = self.props(e)
        produced = self._new_state(ef(*outs[-1], self._next_acc(e, outs[-1])), e)
        assert need <= outs[-1]
        emod.states.append(produced)
        self._ledger("emotion.output", e, 1, modality=emod.id, render=[produced.formula.render], kind=kind)

    # ------------------------------------------------------------------
    # clock

    def tick(self, clock: int, events: Sequence[Event] = ()) -> Status:
        if self.organisation is None:
            raise DomainError("engine is not initialised")
        if self.status is Status.DESTROYED:
            raise DomainError("a destroyed individual cannot tick")
        self.clock = clock
        self._perceived = []
        for ev in events:
            self.perceive(ev)
        for mid in sorted({ev.modality for ev in events}):
            if self.classify_change(mid) is ChangeKind.DESTRUCTIVE:
                self._emit("change.destructive", modality=mid, category=self.modalities[mid].key)
                self.status = Status.DESTROYED
                self._snapshot()
                return self.status
        self._recall()
        self._recursion()
        self._genus()
        self.run_emotions()
        self._snapshot()
        self._emit("snapshot", deficits=self.deficits())
        return self.status


def write_trace(records: Iterable[dict], path) -> None:
    """Write records as JSON lines with sorted keys."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for rec in records:
            fh.write(json.dumps(rec, sort_keys=True, ensure_ascii=False) + "\n")
