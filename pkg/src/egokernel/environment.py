"""Deterministic environment, scenario files and the run loop.

The environment and the engine exchange two messages per clock: a batch of
perturbations, then a response to the structure the engine exposes. Both
directions carry bit strings nested in lists; the engine turns each string
into an E-binary and each list into a set.

Randomness comes from :class:`random.Random` (Mersenne Twister, the CPython
stdlib generator) seeded from the scenario.
"""

from __future__ import annotations

import configparser
import random
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence, Union

from .assembly import EFormula, ef
from .codec import ebinary_bits, ebinary_encode
from .engine import Engine, EngineConfig, Event, Status, write_trace
from .errors import DomainError, ScenarioError

__all__ = [
    "EnvironmentEventModel",
    "Environment",
    "ResponseEvent",
    "RunReport",
    "Scenario",
    "ScriptedEnvironment",
    "ScriptEvent",
    "TokenGroup",
    "load_scenario",
    "make_environment",
    "parse_scenario",
    "run_scenario",
    "to_formula",
]

Message = Union[str, list]  # bit string or nested list of messages


def to_formula(msg: Message) -> EFormula:
    """Bit string -> E-binary; list -> set of the translated items."""
    if isinstance(msg, str):
        return ebinary_encode(msg)
    return ef(*(to_formula(m) for m in msg))


# ---------------------------------------------------------------------------
# Scenario model


@dataclass(frozen=True)
class TokenGroup:
    tokens: tuple[str, ...]  # bit strings
    count: int


@dataclass(frozen=True)
class EnvironmentEventModel:
    id: str
    a: tuple[str, ...]
    b: tuple[str, ...]
    c: tuple[str, ...]
    perturbations: int = 4
    removals: int = 1
    emergents: int = 1
    phase: str = "before"

    def __post_init__(self) -> None:
        if set(self.b) == set(self.c):
            raise ScenarioError(f"{self.id}: arrays b and c must differ")
        if self.phase not in ("before", "after", "always"):
            raise ScenarioError(f"{self.id}: phase must be before, after or always")


@dataclass(frozen=True)
class ScriptEvent:
    id: str
    clock: int
    modality: str
    perturb: TokenGroup | None
    remove: int
    emerge: TokenGroup | None


@dataclass
class Scenario:
    seed: int
    modalities: dict[str, TokenGroup]
    mode: str = "eem"
    budget: int = 1
    change_clock: int | None = None
    eems: list[EnvironmentEventModel] = field(default_factory=list)
    script: list[ScriptEvent] = field(default_factory=list)
    names: dict[str, str] = field(default_factory=dict)  # bit string -> display name
    max_chain: int = 6
    filler_max: int | None = None

    def labels(self) -> dict[EFormula, str]:
        return {ebinary_encode(bits): name for bits, name in self.names.items()}


_ALLOWED = {
    "seed": {"value"},
    "tokens": None,
    "modalities": None,
    "schedule": {"mode", "budget", "change_clock", "max_chain", "filler_max"},
    "eem": {"a", "b", "c", "perturbations", "removals", "emergents", "phase"},
    "script": {"modality", "perturb", "remove", "emerge"},
}
_BITS = re.compile(r"^[01]+$")
_GROUP = re.compile(r"^(?P<tokens>[^*]+?)(?:\s*\*\s*(?P<count>\d+))?$")


def _int(cp: configparser.ConfigParser, sec: str, key: str, default: int | None) -> int | None:
    if not cp.has_option(sec, key):
        return default
    raw = cp.get(sec, key)
    try:
        return int(raw)
    except ValueError:
        raise ScenarioError(f"[{sec}] {key} must be an integer, got {raw!r}") from None


def parse_scenario(text: str) -> Scenario:
    """Parse the INI scenario format; unknown sections or keys are rejected."""
    cp = configparser.ConfigParser(interpolation=None, default_section="__none__")
    cp.optionxform = str  # keep token names case sensitive
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ScenarioError(f"malformed scenario: {exc}") from None

    for sec in cp.sections():
        kind = sec.split(".", 1)[0]
        if kind not in _ALLOWED:
            raise ScenarioError(f"unknown section [{sec}]")
        if kind in ("eem", "script") and sec == kind:
            raise ScenarioError(f"section [{sec}] needs an index")
        allowed = _ALLOWED[kind]
        if allowed is not None:
            for key in cp.options(sec):
                if key not in allowed:
                    raise ScenarioError(f"unknown key {key!r} in [{sec}]")

    names: dict[str, str] = {}
    by_name: dict[str, str] = {}
    if cp.has_section("tokens"):
        for name, bits in cp.items("tokens"):
            bits = bits.strip()
            if not _BITS.match(bits):
                raise ScenarioError(f"token {name} is not a bit string: {bits!r}")
            if bits in names:
                raise ScenarioError(f"tokens {names[bits]} and {name} share a bit string")
            names[bits] = name
            by_name[name] = bits

    def token(ref: str, where: str) -> str:
        ref = ref.strip()
        if ref in by_name:
            return by_name[ref]
        if _BITS.match(ref):
            names.setdefault(ref, ref)
            return ref
        raise ScenarioError(f"{where}: unknown token {ref!r}")

    def group(raw: str, where: str, default_count: int = 1) -> TokenGroup:
        m = _GROUP.match(raw.strip())
        if not m:
            raise ScenarioError(f"{where}: cannot read token group {raw!r}")
        toks = tuple(token(t, where) for t in m.group("tokens").split(",") if t.strip())
        if not toks:
            raise ScenarioError(f"{where}: empty token group")
        count = int(m.group("count")) if m.group("count") else default_count
        return TokenGroup(toks, count)

    def tokens(raw: str, where: str) -> tuple[str, ...]:
        return tuple(token(t, where) for t in raw.split(",") if t.strip())

    if not cp.has_section("modalities") or not cp.options("modalities"):
        raise ScenarioError("a scenario needs at least one modality")
    modalities = {mid: group(v, f"[modalities] {mid}") for mid, v in cp.items("modalities")}
    for mid, g in modalities.items():
        if g.count < 1:
            raise ScenarioError(f"modality {mid} must hold at least one state")

    seed = _int(cp, "seed", "value", 0) if cp.has_section("seed") else 0
    sched = "schedule" if cp.has_section("schedule") else None
    mode = cp.get(sched, "mode", fallback="eem") if sched else "eem"
    if mode not in ("eem", "scripted"):
        raise ScenarioError(f"unknown mode {mode!r}")

    eems = []
    script = []
    for sec in cp.sections():
        if sec.startswith("eem."):
            s = cp[sec]
            for key in ("a", "b", "c"):
                if key not in s:
                    raise ScenarioError(f"[{sec}] lacks array {key}")
            eems.append(
                EnvironmentEventModel(
                    sec,
                    tokens(s["a"], sec),
                    tokens(s["b"], sec),
                    tokens(s["c"], sec),
                    _int(cp, sec, "perturbations", 4),
                    _int(cp, sec, "removals", 1),
                    _int(cp, sec, "emergents", 1),
                    s.get("phase", "before").strip(),
                )
            )
        elif sec.startswith("script."):
            parts = sec.split(".")
            try:
                clock = int(parts[1])
                order = int(parts[2]) if len(parts) > 2 else 1
            except (ValueError, IndexError):
                raise ScenarioError(f"bad script section name [{sec}]") from None
            s = cp[sec]
            if "modality" not in s:
                raise ScenarioError(f"[{sec}] lacks a modality")
            if s["modality"] not in modalities:
                raise ScenarioError(f"[{sec}] names unknown modality {s['modality']!r}")
            script.append(
                (
                    (clock, order),
                    ScriptEvent(
                        sec,
                        clock,
                        s["modality"],
                        group(s["perturb"], sec) if "perturb" in s else None,
                        _int(cp, sec, "remove", 0),
                        group(s["emerge"], sec) if "emerge" in s else None,
                    ),
                )
            )
    script_events = [ev for _, ev in sorted(script, key=lambda t: t[0])]
    if mode == "eem" and not eems:
        raise ScenarioError("eem mode needs at least one [eem.N] section")
    if mode == "scripted" and not script_events:
        raise ScenarioError("scripted mode needs at least one [script.N] section")

    default_budget = max((e.clock for e in script_events), default=1)
    budget = _int(cp, sched, "budget", default_budget) if sched else default_budget
    scenario = Scenario(
        seed=seed,
        modalities=modalities,
        mode=mode,
        budget=budget,
        change_clock=_int(cp, sched, "change_clock", None) if sched else None,
        eems=eems,
        script=script_events,
        names=names,
        max_chain=_int(cp, sched, "max_chain", 6) if sched else 6,
        filler_max=_int(cp, sched, "filler_max", None) if sched else None,
    )
    lengths = {len(b) for b in names}
    if len(lengths) > 1 or (lengths and min(lengths) < 2):
        raise ScenarioError("all tokens must be bit strings of one common length of at least 2")
    return scenario


def load_scenario(path: Union[str, Path]) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from None
    return parse_scenario(text)


# ---------------------------------------------------------------------------
# Instances


def _mask_subset(tokens: Sequence[str], mask: int) -> list[str]:
    return [t for i, t in enumerate(tokens) if mask >> i & 1]


class _Fillers:
    """Filler = a non-empty subset of the instance's own tokens, so no foreign structure leaks into categories."""

    def __init__(self, rng: random.Random | None, filler_max: int | None) -> None:
        self.rng = rng
        self.filler_max = filler_max

    def masks(self, n_tokens: int, count: int) -> list[int]:
        full = (1 << n_tokens) - 1
        cap = self.filler_max or n_tokens
        allowed = [m for m in range(1, full + 1) if bin(m).count("1") <= cap]
        if self.rng is None:
            out = [allowed[i % len(allowed)] for i in range(count)]
        else:
            out = [self.rng.choice(allowed) for _ in range(count)]
            if count > 1 and len(set(out)) == 1 and len(allowed) > 1:
                out[-1] = allowed[(allowed.index(out[-1]) + 1) % len(allowed)]
        return out

    def instances(self, group: TokenGroup, count: int | None = None) -> list[list]:
        """Distinct instances: a repeated filler is wrapped once more per repetition."""
        n = group.count if count is None else count
        toks = list(group.tokens)
        seen: dict[int, int] = {}
        out = []
        for m in self.masks(len(toks), n):
            filler: list = _mask_subset(toks, m)
            for _ in range(seen.get(m, 0)):
                filler = [filler]
            seen[m] = seen.get(m, 0) + 1
            out.append(toks + [filler])
        return out


def _decode(x: EFormula, width: int) -> set[str]:
    """Bit strings of the top-level members of ``x`` that are E-binaries of the token width."""
    out = set()
    for m in x.members:
        try:
            bits = ebinary_bits(m)
        except DomainError:
            continue
        if len(bits) == width:
            out.add(bits)
    return out


# ---------------------------------------------------------------------------
# Environments


@dataclass
class ResponseEvent:
    source: str
    modality: str
    triggers: list
    removed: list[int]  # indices into the modality's exposed state list
    emergents: list


class Environment:
    """EEM-driven environment."""

    def __init__(self, scenario: Scenario, seed: int | None = None) -> None:
        self.scenario = scenario
        self.rng = random.Random(scenario.seed if seed is None else seed)
        self.fillers = _Fillers(self.rng, scenario.filler_max)
        self.width = len(next(iter(scenario.names))) if scenario.names else 0

    def initial_load(self) -> dict[str, list[EFormula]]:
        if not self.scenario.modalities:
            raise ScenarioError("a scenario needs at least one modality")
        return {
            mid: [to_formula(m) for m in self.fillers.instances(g)]
            for mid, g in sorted(self.scenario.modalities.items())
        }

    def active(self, clock: int) -> list[EnvironmentEventModel]:
        cc = self.scenario.change_clock
        phase = "before" if cc is None or clock < cc else "after"
        return [e for e in self.scenario.eems if e.phase in (phase, "always")]

    def emit_perturbations(self, clock: int) -> list[tuple[str, list]]:
        return [
            (e.id, self.fillers.instances(TokenGroup(e.a, e.perturbations)))
            for e in self.active(clock)
            if e.perturbations > 0
        ]

    def sensory_response(
        self, structure: Mapping[str, Sequence[EFormula]], batch: Sequence[tuple[str, list]], clock: int
    ) -> list[ResponseEvent]:
        models = {e.id: e for e in self.active(clock)}
        taken: dict[str, set[int]] = {mid: set() for mid in structure}
        out = []
        for source, triggers in batch:
            e = models[source]
            need = set(e.b)
            removed: list[int] = []
            modality = None
            for mid in sorted(structure):
                for i, x in enumerate(structure[mid]):
                    if len(removed) >= e.removals:
                        break
                    if i in taken[mid] or not need <= _decode(x, self.width):
                        continue
                    if modality is None:
                        modality = mid
                    if mid == modality:
                        removed.append(i)
                        taken[mid].add(i)
            if modality is None:
                out.append(ResponseEvent(source, sorted(structure)[0], triggers, [], []))
                continue
            emergents = self.fillers.instances(TokenGroup(e.c, e.emergents))
            out.append(ResponseEvent(source, modality, triggers, removed, emergents))
        return out


class ScriptedEnvironment:
    """Replays exact per-clock quantities; fillers are fixed so the seed has no effect."""

    def __init__(self, scenario: Scenario, seed: int | None = None) -> None:
        self.scenario = scenario
        self.fillers = _Fillers(None, scenario.filler_max)
        self.width = len(next(iter(scenario.names))) if scenario.names else 0

    def initial_load(self) -> dict[str, list[EFormula]]:
        return {
            mid: [to_formula(m) for m in self.fillers.instances(g)]
            for mid, g in sorted(self.scenario.modalities.items())
        }

    def _events(self, clock: int) -> list[ScriptEvent]:
        return [e for e in self.scenario.script if e.clock == clock]

    def emit_perturbations(self, clock: int) -> list[tuple[str, list]]:
        return [
            (e.id, self.fillers.instances(e.perturb) if e.perturb else []) for e in self._events(clock)
        ]

    def sensory_response(
        self, structure: Mapping[str, Sequence[EFormula]], batch: Sequence[tuple[str, list]], clock: int
    ) -> list[ResponseEvent]:
        triggers = dict(batch)
        taken: dict[str, set[int]] = {mid: set() for mid in structure}
        out = []
        for e in self._events(clock):
            need = set(self.scenario.modalities[e.modality].tokens)
            removed = []
            for i, x in enumerate(structure[e.modality]):
                if len(removed) >= e.remove:
                    break
                if i not in taken[e.modality] and need <= _decode(x, self.width):
                    removed.append(i)
                    taken[e.modality].add(i)
            emergents = self.fillers.instances(e.emerge) if e.emerge else []
            out.append(ResponseEvent(e.id, e.modality, triggers.get(e.id, []), removed, emergents))
        return out


def make_environment(scenario: Scenario, seed: int | None = None):
    if scenario.mode == "scripted":
        return ScriptedEnvironment(scenario, seed)
    return Environment(scenario, seed)


# ---------------------------------------------------------------------------
# Runner


@dataclass
class RunReport:
    status: Status
    clocks: int
    deficits: list[dict[str, int]]
    residuals: dict[str, int]
    residual_labels: dict[str, str | None]
    promotions: list[tuple[int, str, str]]
    trace_path: str | None
    engine: Engine = field(repr=False)

    def to_text(self) -> str:
        lines = [f"status: {self.status.value}", f"clocks: {self.clocks}"]
        for i, d in enumerate(self.deficits, start=1):
            lines.append(f"clock {i} deficits: " + ", ".join(f"{k}={v}" for k, v in sorted(d.items())))
        lines.append("residual ledger:")
        for key, v in sorted(self.residuals.items(), key=lambda kv: (self.residual_labels[kv[0]] or kv[0])):
            lines.append(f"  {self.residual_labels[key] or key}: {v}")
        for clock, key, kind in self.promotions:
            lines.append(f"promotion at clock {clock}: {kind} {key}")
        if self.trace_path:
            lines.append(f"trace: {self.trace_path}")
        return "\n".join(lines)


def run_scenario(
    scenario: Scenario,
    budget: int | None = None,
    seed: int | None = None,
    trace_path: Union[str, Path, None] = None,
    config: EngineConfig | None = None,
) -> RunReport:
    """Initialise an engine from the scenario and run it for ``budget`` clocks."""
    env = make_environment(scenario, seed)
    cfg = config or EngineConfig(max_chain=scenario.max_chain, labels=scenario.labels())
    engine = Engine(cfg)
    engine.init(env.initial_load())
    budget = scenario.budget if budget is None else budget
    if budget < 0:
        raise ScenarioError("budget must be non-negative")
    deficits = []
    clocks = 0
    for clock in range(1, budget + 1):
        batch = env.emit_perturbations(clock)
        structure = engine.structure()
        events = []
        for r in env.sensory_response(structure, batch, clock):
            states = structure[r.modality]
            events.append(
                Event(
                    r.modality,
                    tuple(to_formula(t) for t in r.triggers),
                    tuple(states[i] for i in r.removed),
                    tuple(to_formula(z) for z in r.emergents),
                )
            )
        clocks = clock
        status = engine.tick(clock, events)
        deficits.append(engine.deficits())
        if status is Status.DESTROYED:
            break
    if engine.status is not Status.DESTROYED:
        at_rest = all(d == 0 for d in engine.deficits().values())
        engine.status = Status.EQUILIBRIUM if budget > 0 and at_rest else Status.BUDGET_EXHAUSTED
    engine._emit("run.end", status=engine.status.value)
    if trace_path is not None:
        write_trace(engine.trace, trace_path)
    residuals = dict(engine.ledger.counts)
    return RunReport(
        engine.status,
        clocks,
        deficits,
        residuals,
        {k: engine.label(k) for k in residuals},
        [(c, engine.label(k) or k, kind.value) for c, k, kind in engine.promotions],
        str(trace_path) if trace_path is not None else None,
        engine,
    )
