"""Expectation-based dialogue management for the four travel parameters.

The manager prompts for departure, arrival, date, and time in a configured
order, accepts spontaneously offered parameters, confirms implicitly by
default and explicitly for low-reliability or repaired values, detects
breakdown symptoms (non-understanding, user-initiated repair,
inconsistency), switches crucial city parameters to isolated-word
acquisition after repeated failures, relaxes date and time to defaults
after exhausting their repair budget, and finally queries the timetable.
"""

from __future__ import annotations

import datetime
import json
from dataclasses import dataclass, field, replace

from .parsing import CaseFrame
from .timetable import Timetable, query
from .values import DateValue, TimeValue, MAIN_CONNECTIONS, render_clock

SLOTS = ("departure", "arrival", "date", "time")
CITY_SLOTS = ("departure", "arrival")
OPTIONAL_SLOTS = ("date", "time")
STATE_TAGS = ("ask_departure", "ask_arrival", "ask_date", "ask_time",
              "confirm_slot", "post_answer")

KIND_TO_SLOT = {"departure-city": "departure", "arrival-city": "arrival",
                "date": "date", "time": "time"}
SLOT_TO_KIND = {v: k for k, v in KIND_TO_SLOT.items()}

SYMPTOM_NON_UNDERSTANDING = "non_understanding"
SYMPTOM_REPAIR = "user_initiated_repair"
SYMPTOM_INCONSISTENCY = "inconsistency"

DEFAULT_REPAIR_ACTS = {
    SYMPTOM_NON_UNDERSTANDING: "repair_request",
    SYMPTOM_REPAIR: "explicit_confirm",
    SYMPTOM_INCONSISTENCY: "explicit_confirm",
}


class DialogueError(Exception):
    """Raised on contract violations (never by normal user input)."""


@dataclass(frozen=True)
class DialogueConfig:
    focus_order: tuple[str, ...] = SLOTS
    explicit_confirm_threshold: float = 0.7
    isolated_failure_threshold: int = 2
    optional_slot_budget: int = 3   # date/time attempts before relaxation
    required_slot_budget: int = 5   # city attempts before giving up
    max_turns: int = 30
    session_date: datetime.date = datetime.date(2024, 5, 10)
    repair_acts: dict = field(default_factory=lambda: dict(DEFAULT_REPAIR_ACTS))

    def validate(self) -> None:
        if sorted(self.focus_order) != sorted(SLOTS):
            raise DialogueError(f"focus order must permute {SLOTS}")
        if self.isolated_failure_threshold < 1 or self.optional_slot_budget < 1:
            raise DialogueError("failure thresholds must be >= 1")


def load_dialogue_config(path) -> DialogueConfig:
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    config = DialogueConfig(
        focus_order=tuple(raw.get("focus_order", SLOTS)),
        explicit_confirm_threshold=raw.get("explicit_confirm_threshold", 0.7),
        isolated_failure_threshold=raw.get("isolated_failure_threshold", 2),
        optional_slot_budget=raw.get("optional_slot_budget", 3),
        required_slot_budget=raw.get("required_slot_budget", 5),
        max_turns=raw.get("max_turns", 30),
        session_date=datetime.date.fromisoformat(
            raw.get("session_date", "2024-05-10")),
        repair_acts={**DEFAULT_REPAIR_ACTS, **raw.get("repair_acts", {})},
    )
    config.validate()
    return config


@dataclass
class SlotState:
    value: object = None
    status: str = "empty"  # empty | hypothesized | confirmed
    score: float = 0.0
    needs_explicit: bool = False  # repaired or low-confidence values


@dataclass(frozen=True)
class Expectation:
    expected_kinds: tuple[str, ...]
    predicted_classes: tuple[str, ...]
    state_tag: str
    strength: str = "permissive"  # strict during explicit confirmation


@dataclass(frozen=True)
class DialogueAct:
    act_type: str  # prompt | implicit_confirm_and_prompt | explicit_confirm |
                   # repair_request | relax_notice | answer | reject | close
    text: str
    referenced_slots: tuple[str, ...] = ()
    connections: tuple = ()


@dataclass(frozen=True)
class QueryParameters:
    departure: str
    arrival: str
    date: datetime.date
    time: TimeValue
    relaxed: frozenset[str]


@dataclass
class TurnAnalysis:
    decode_ok: bool
    frame: CaseFrame | None
    fills: dict[str, tuple[object, float]] = field(default_factory=dict)
    symptom: str | None = None
    denied: bool = False
    confirmed: bool = False
    repair_slot: str | None = None
    repair_value: object = None
    repair_score: float = 0.0
    unexpected_kinds: tuple[str, ...] = ()


@dataclass
class DialogueState:
    config: DialogueConfig
    slots: dict[str, SlotState] = field(default_factory=dict)
    focus: str = "departure"
    phase: str = "acquiring"  # acquiring | querying | closing
    outcome: str = "open"     # open | S | SC | SF
    failure_counters: dict[str, int] = field(default_factory=dict)
    pending_implicit: tuple[str, ...] = ()
    pending_explicit: tuple[str, ...] = ()
    relaxed: set[str] = field(default_factory=set)
    denied_values: dict[str, set[str]] = field(default_factory=dict)
    isolated_mode: bool = False
    turn_count: int = 0
    expectations: Expectation | None = None
    last_connections: tuple = ()

    def slot_view(self) -> dict[str, dict]:
        out = {}
        for name in SLOTS:
            s = self.slots[name]
            out[name] = {"value": _render(s.value) if s.value is not None else None,
                         "status": s.status, "score": s.score}
        return out


def _render(value) -> str:
    if hasattr(value, "render"):
        return value.render()
    return str(value)


# ---------------------------------------------------------------- prompts

_PROMPTS = {
    "departure": "Where are you leaving from?",
    "arrival": "Where do you want to go?",
    "date": "On what date do you want to travel?",
    "time": "At what time do you want to leave?",
}
_SIMPLE_PROMPTS = {
    "departure": "Please tell me the departure city.",
    "arrival": "Please tell me the arrival city.",
    "date": "Please tell me the travel date, for example tomorrow.",
    "time": "Please tell me the departure hour, for example at nine.",
}


def _slot_phrase(state: DialogueState, slot: str) -> str:
    raw = state.slots[slot].value
    value = _render(raw)
    if slot == "departure":
        return f"from {value}"
    if slot == "arrival":
        return f"to {value}"
    if slot == "date":
        return f"on {value}"
    if getattr(raw, "main_connections", False):
        return value  # already a full noun phrase
    return f"at {value}"


def _prompt_act(state: DialogueState, slot: str, simplified: bool = False,
                act_type: str = "prompt", prefix: str = "") -> DialogueAct:
    text = _SIMPLE_PROMPTS[slot] if simplified else _PROMPTS[slot]
    return DialogueAct(act_type=act_type, text=(prefix + text).strip(),
                       referenced_slots=(slot,))


# ----------------------------------------------------------- expectations

_SLOT_CLASSES = {
    "departure": ("city",),
    "arrival": ("city",),
    "date": ("weekday", "month", "number"),
    "time": ("number", "daypart"),
}
_CONTENT_KINDS = ("departure-city", "arrival-city", "date", "time",
                  "unanchored-city")


def _expectation_for(state: DialogueState) -> Expectation:
    if state.phase == "closing":
        return Expectation(expected_kinds=("confirmation", "negation"),
                           predicted_classes=("affirm", "negate", "polite"),
                           state_tag="post_answer")
    if state.pending_explicit:
        slot = state.pending_explicit[0]
        kinds = ("confirmation", "negation", "correction",
                 SLOT_TO_KIND[slot], "unanchored-city")
        classes = ("affirm", "negate") + _SLOT_CLASSES[slot]
        return Expectation(expected_kinds=kinds, predicted_classes=classes,
                           state_tag="confirm_slot", strength="strict")
    focus = state.focus
    return Expectation(expected_kinds=_CONTENT_KINDS + ("negation", "correction"),
                       predicted_classes=_SLOT_CLASSES[focus],
                       state_tag=f"ask_{focus}")


# ------------------------------------------------------------- lifecycle

def start_session(config: DialogueConfig,
                  ) -> tuple[DialogueState, DialogueAct, Expectation]:
    config.validate()
    state = DialogueState(config=config)
    state.slots = {name: SlotState() for name in SLOTS}
    state.failure_counters = {name: 0 for name in SLOTS}
    state.focus = config.focus_order[0]
    act = DialogueAct(
        act_type="prompt",
        text="Welcome to the train timetable service. " + _PROMPTS[state.focus],
        referenced_slots=(state.focus,))
    expectation = _expectation_for(state)
    state.expectations = expectation
    return state, act, expectation


def interpret(state: DialogueState, frame: CaseFrame | None,
              decode_ok: bool) -> TurnAnalysis:
    """Match the case frame against expectations and diagnose symptoms."""
    if state.outcome != "open":
        raise DialogueError("session already closed")
    if not decode_ok or frame is None:
        return TurnAnalysis(decode_ok=False, frame=None,
                            symptom=SYMPTOM_NON_UNDERSTANDING)
    analysis = TurnAnalysis(decode_ok=True, frame=frame)
    analysis.denied = frame.speech_act in ("deny", "correct")
    analysis.confirmed = frame.speech_act == "confirm"

    fills: dict[str, tuple[object, float]] = {}
    scores = {c.kind: c.score for c in frame.concepts}
    for kind, value in frame.slots.items():
        slot = KIND_TO_SLOT.get(kind)
        if slot is not None:
            fills[slot] = (value, scores.get(kind, 0.0))
    # bind unanchored cities to a city-expecting focus
    if "unanchored-city" in frame.slots:
        target = None
        if state.pending_explicit and state.pending_explicit[0] in CITY_SLOTS:
            target = state.pending_explicit[0]
        elif state.focus in CITY_SLOTS:
            target = state.focus
        if target is not None and target not in fills:
            fills[target] = (frame.slots["unanchored-city"],
                             scores.get("unanchored-city", 0.0))
    # correction concepts carry an explicit replacement city
    correction = next((c for c in frame.concepts if c.kind == "correction"), None)
    if correction is not None:
        target = None
        for slot in state.pending_explicit + state.pending_implicit + (state.focus,):
            if slot in CITY_SLOTS:
                target = slot
                break
        if target is not None:
            fills[target] = (correction.value, correction.score)

    expected = set(state.expectations.expected_kinds) if state.expectations else set()
    analysis.unexpected_kinds = tuple(sorted(
        k for k in {c.kind for c in frame.concepts} if k not in expected))

    # never re-adopt a value the user has already rejected for that slot:
    # a repeated proposal is almost surely the same recognition error
    for slot, (value, _score) in list(fills.items()):
        if _render(value) in state.denied_values.get(slot, ()):
            del fills[slot]

    if not fills and not analysis.denied and not analysis.confirmed:
        analysis.symptom = SYMPTOM_NON_UNDERSTANDING
        return analysis

    # same-city contradiction: departure and arrival may never coincide
    for slot, (value, _score) in list(fills.items()):
        other = "arrival" if slot == "departure" else "departure"
        if slot in CITY_SLOTS:
            other_state = state.slots[other]
            other_value = fills.get(other, (other_state.value, 0.0))[0] \
                if other in fills else other_state.value
            if other_value is not None and value == other_value:
                del fills[slot]
                analysis.symptom = SYMPTOM_INCONSISTENCY
                analysis.repair_slot = slot

    targeted = [s for s, (v, _) in fills.items()
                if state.slots[s].status != "empty" and state.slots[s].value != v]
    addressed = None
    if analysis.denied:
        addressed = next((s for s in targeted), None)
        if addressed is None:
            for slot in state.pending_explicit + state.pending_implicit:
                addressed = slot
                break
    elif targeted and state.pending_explicit \
            and targeted[0] in state.pending_explicit:
        addressed = targeted[0]  # restated a different value under confirmation

    if addressed is not None:
        status = state.slots[addressed].status
        analysis.symptom = (SYMPTOM_INCONSISTENCY if status == "confirmed"
                            else SYMPTOM_REPAIR)
        analysis.repair_slot = addressed
        if addressed in fills:
            value, score = fills[addressed]
            if analysis.denied and value == state.slots[addressed].value:
                pass  # "no" plus the same value re-heard: trust the denial only
            else:
                analysis.repair_value, analysis.repair_score = value, score
    elif not analysis.denied:
        for slot in targeted:
            if state.slots[slot].status == "confirmed":
                analysis.symptom = SYMPTOM_INCONSISTENCY
                analysis.repair_slot = slot
                analysis.repair_value, analysis.repair_score = fills[slot]
                break

    analysis.fills = fills
    return analysis


def should_switch_isolated(state: DialogueState) -> tuple[str, tuple[str, ...]] | None:
    """Isolated-word acquisition for crucial (city) parameters only.

    Date and time never switch: their fallback is constraint relaxation.
    """
    focus = state.focus
    if focus not in CITY_SLOTS:
        return None
    if state.failure_counters[focus] < state.config.isolated_failure_threshold:
        return None
    return focus, ("city",)


def relax_constraints(state: DialogueState) -> QueryParameters:
    """Query parameters with defaults for unresolved optional slots."""
    dep, arr = state.slots["departure"], state.slots["arrival"]
    if dep.status != "confirmed" or arr.status != "confirmed":
        raise DialogueError("cities must be confirmed before relaxation")
    relaxed = set(state.relaxed)
    date_slot, time_slot = state.slots["date"], state.slots["time"]
    if date_slot.value is None:
        date_value = DateValue("relative", offset=1)
        relaxed.add("date")
    else:
        date_value = date_slot.value
    if time_slot.value is None:
        time_value = MAIN_CONNECTIONS
        relaxed.add("time")
    else:
        time_value = time_slot.value
    if dep.value == arr.value:
        raise DialogueError("departure and arrival coincide")
    return QueryParameters(
        departure=dep.value, arrival=arr.value,
        date=date_value.resolve(state.config.session_date),
        time=time_value, relaxed=frozenset(relaxed))


def build_query_and_answer(state: DialogueState,
                           timetable: Timetable) -> DialogueAct:
    if state.phase != "querying":
        raise DialogueError("build_query_and_answer outside querying phase")
    params = relax_constraints(state)
    rows = query(timetable, params.departure, params.arrival,
                 params.date.weekday(), params.time)
    state.phase = "closing"
    if not rows:
        state.outcome = "SF"
        return DialogueAct(
            act_type="reject",
            text=(f"I am sorry, I could not find any connection from "
                  f"{params.departure} to {params.arrival} "
                  f"on {params.date.isoformat()}. Goodbye."))
    state.outcome = "SC" if params.relaxed else "S"
    state.last_connections = tuple(rows)
    listed = "; ".join(
        f"departure {render_clock(c.dep_time)} arrival {render_clock(c.arr_time)}"
        for c in rows[:3])
    count = (f"is {len(rows)} connection" if len(rows) == 1
             else f"are {len(rows)} connections")
    text = (f"There {count} from {params.departure} to "
            f"{params.arrival} on {params.date.isoformat()}: {listed}. "
            f"Thank you, goodbye.")
    return DialogueAct(act_type="answer", text=text, connections=tuple(rows))


def _next_empty_slot(state: DialogueState) -> str | None:
    for slot in state.config.focus_order:
        if state.slots[slot].status == "empty":
            return slot
    return None


def _hypothesized(state: DialogueState) -> tuple[str, ...]:
    return tuple(s for s in state.config.focus_order
                 if state.slots[s].status == "hypothesized")


def _confirm_act(state: DialogueState, slots: tuple[str, ...]) -> DialogueAct:
    summary = ", ".join(_slot_phrase(state, s) for s in slots)
    return DialogueAct(act_type="explicit_confirm",
                       text=f"Did you mean {summary}?",
                       referenced_slots=slots)


def _implicit_prompt(state: DialogueState, confirmed: tuple[str, ...],
                     next_slot: str) -> DialogueAct:
    summary = ", ".join(_slot_phrase(state, s) for s in confirmed)
    return DialogueAct(act_type="implicit_confirm_and_prompt",
                       text=f"{summary.capitalize()}. {_PROMPTS[next_slot]}",
                       referenced_slots=confirmed + (next_slot,))


def _fill(state: DialogueState, slot: str, value, score: float,
          needs_explicit: bool = False) -> None:
    state.slots[slot] = SlotState(value=value, status="hypothesized", score=score,
                                  needs_explicit=needs_explicit)


def _close_failed(state: DialogueState) -> DialogueAct:
    state.phase = "closing"
    state.outcome = "SF"
    return DialogueAct(act_type="close",
                       text="I am sorry, I am unable to complete the request. "
                            "Goodbye.")


def next_turn(state: DialogueState, analysis: TurnAnalysis, timetable: Timetable,
              ) -> tuple[DialogueState, DialogueAct, Expectation]:
    """Advance the dialogue one turn and choose the next act."""
    if state.outcome != "open":
        raise DialogueError("session already closed")
    state.turn_count += 1
    config = state.config
    act: DialogueAct | None = None
    relax_prefix = ""
    was_isolated = state.isolated_mode
    state.isolated_mode = False

    symptom = analysis.symptom
    # implicit confirmations pass on any understood turn that does not
    # object to them
    if symptom is None:
        promoted = state.pending_implicit
    elif symptom in (SYMPTOM_REPAIR, SYMPTOM_INCONSISTENCY):
        promoted = tuple(s for s in state.pending_implicit
                         if s != analysis.repair_slot)
    else:
        promoted = ()
    for slot in promoted:
        if state.slots[slot].status == "hypothesized":
            state.slots[slot].status = "confirmed"
    if promoted:
        state.pending_implicit = tuple(s for s in state.pending_implicit
                                       if s not in promoted)

    if symptom == SYMPTOM_NON_UNDERSTANDING:
        counter_slot = (state.pending_explicit[0] if state.pending_explicit
                        else state.focus)
        state.failure_counters[counter_slot] += 1
    else:
        state.failure_counters[state.focus] = 0

    # explicit confirmations: promote on yes; objections arrive as symptoms
    if state.pending_explicit and symptom is None:
        if analysis.confirmed:
            for slot in state.pending_explicit:
                st = state.slots[slot]
                if st.status == "hypothesized":
                    st.status = "confirmed"
                    st.needs_explicit = False
            state.pending_explicit = ()
        elif analysis.fills and all(
                state.slots[s].value == analysis.fills.get(s, (state.slots[s].value,))[0]
                for s in state.pending_explicit):
            # restating the hypothesized value counts as confirmation
            for slot in state.pending_explicit:
                st = state.slots[slot]
                if st.status == "hypothesized":
                    st.status = "confirmed"
                    st.needs_explicit = False
            state.pending_explicit = ()

    # apply fills
    if symptom in (SYMPTOM_REPAIR, SYMPTOM_INCONSISTENCY):
        slot = analysis.repair_slot
        if slot is not None and symptom == SYMPTOM_REPAIR:
            old = state.slots[slot]
            if old.status == "hypothesized" and old.value is not None:
                state.denied_values.setdefault(slot, set()) \
                    .add(_render(old.value))
        if slot is not None and analysis.repair_value is not None:
            # replacement value offered: adopt it, then verify explicitly
            _fill(state, slot, analysis.repair_value, analysis.repair_score,
                  needs_explicit=True)
            state.pending_explicit = (slot,)
            state.focus = slot
            act = _confirm_act(state, (slot,))
            act = replace(act, act_type=config.repair_acts[symptom])
        elif slot is not None:
            # objection without a replacement: drop the value, re-acquire
            state.slots[slot] = SlotState()
            state.pending_explicit = tuple(s for s in state.pending_explicit
                                           if s != slot)
            state.focus = slot
            act = _prompt_act(state, slot, simplified=True,
                              act_type="repair_request")
    elif symptom is None:
        for slot, (value, score) in sorted(analysis.fills.items()):
            st = state.slots[slot]
            if st.status == "confirmed":
                continue  # same value restated; contradictions were symptoms
            if st.status == "hypothesized" and slot in state.pending_explicit:
                continue  # handled by the explicit-confirmation block
            _fill(state, slot, value, score, needs_explicit=was_isolated)

    # repeated recognition failures: crucial parameters switch to isolated
    # acquisition, optional ones relax to defaults
    if symptom == SYMPTOM_NON_UNDERSTANDING and act is None:
        focus = state.pending_explicit[0] if state.pending_explicit else state.focus
        decision = should_switch_isolated(state)
        if focus in CITY_SLOTS \
                and state.failure_counters[focus] >= config.required_slot_budget:
            act = _close_failed(state)
        elif decision is not None:
            state.isolated_mode = True
            act = DialogueAct(
                act_type="repair_request",
                text=f"Let us try differently. Please say only the "
                     f"{decision[0]} city name, one word.",
                referenced_slots=(decision[0],))
        elif focus in OPTIONAL_SLOTS \
                and state.failure_counters[focus] >= config.optional_slot_budget:
            state.relaxed.add(focus)
            state.failure_counters[focus] = 0
            default = DateValue("relative", offset=1) if focus == "date" \
                else MAIN_CONNECTIONS
            state.slots[focus] = SlotState(value=default, status="confirmed",
                                           score=1.0)
            notice = ("I will assume tomorrow." if focus == "date"
                      else "I will look at the main connections of the day.")
            relax_prefix = f"I could not get the {focus}. {notice}"
            # fall through: normal progression prompts, confirms, or queries
        elif state.pending_explicit:
            confirm = _confirm_act(state, state.pending_explicit)
            act = replace(confirm, act_type=config.repair_acts[symptom],
                          text="Sorry, I did not understand. " + confirm.text)
        else:
            act = _prompt_act(state, focus, simplified=True,
                              act_type=config.repair_acts[symptom],
                              prefix="Sorry, I did not understand. ")

    # normal progression
    if act is None and state.outcome == "open":
        hypothesized = _hypothesized(state)
        needs_explicit = tuple(
            s for s in hypothesized
            if state.slots[s].needs_explicit
            or state.slots[s].score < config.explicit_confirm_threshold)
        nxt = _next_empty_slot(state)
        if needs_explicit:
            state.pending_explicit = needs_explicit
            state.focus = needs_explicit[0]
            act = _confirm_act(state, needs_explicit)
        elif nxt is not None:
            state.pending_implicit = hypothesized
            state.focus = nxt
            if hypothesized:
                act = _implicit_prompt(state, hypothesized, nxt)
            else:
                act = _prompt_act(state, nxt)
        elif hypothesized:
            state.pending_explicit = hypothesized
            state.focus = hypothesized[0]
            act = _confirm_act(state, hypothesized)
        else:
            state.phase = "querying"
            act = build_query_and_answer(state, timetable)

    if relax_prefix:
        merged_type = "relax_notice" if act.act_type == "prompt" else act.act_type
        act = replace(act, act_type=merged_type,
                      text=f"{relax_prefix} {act.text}")

    if state.outcome == "open" and state.turn_count >= config.max_turns:
        act = _close_failed(state)

    expectation = _expectation_for(state)
    state.expectations = expectation
    return state, act, expectation
