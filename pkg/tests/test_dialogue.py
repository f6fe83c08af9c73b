"""Dialogue manager: expectations, grounding, repair, relaxation, closing."""
import datetime
import json

import pytest

from traindial.dialogue import (
    CITY_SLOTS,
    DEFAULT_REPAIR_ACTS,
    DialogueConfig,
    DialogueError,
    SLOTS,
    SYMPTOM_INCONSISTENCY,
    SYMPTOM_NON_UNDERSTANDING,
    SYMPTOM_REPAIR,
    SlotState,
    build_query_and_answer,
    interpret,
    load_dialogue_config,
    next_turn,
    relax_constraints,
    should_switch_isolated,
    start_session,
)
from traindial.lexicon import tokenize
from traindial.parsing import parse_utterance
from traindial.values import MAIN_CONNECTIONS


def _say(state, text, stack):
    """Drive one turn from raw text through parse + interpret + next_turn."""
    tokens = tokenize(text, stack.lexicon)
    frame = parse_utterance(tokens, stack.grammar, stack.lexicon).frame
    analysis = interpret(state, frame, decode_ok=True)
    _, act, expectation = next_turn(state, analysis, stack.timetable)
    return analysis, act, expectation


def _fail_turn(state, stack):
    analysis = interpret(state, None, decode_ok=False)
    _, act, expectation = next_turn(state, analysis, stack.timetable)
    return analysis, act, expectation


# ------------------------------------------------------------ lifecycle

def test_start_session_welcome(stack):
    state, act, expectation = start_session(DialogueConfig())
    assert act.act_type == "prompt"
    assert act.text == ("Welcome to the train timetable service. "
                        "Where are you leaving from?")
    assert act.referenced_slots == ("departure",)
    assert state.focus == "departure"
    assert all(state.slots[s].status == "empty" for s in SLOTS)
    assert expectation.state_tag == "ask_departure"
    assert expectation.predicted_classes == ("city",)
    assert "unanchored-city" in expectation.expected_kinds


def test_happy_path_to_success(stack):
    state, _, _ = start_session(DialogueConfig())

    _, act, exp = _say(state, "i want to go from milan to rome", stack)
    assert act.act_type == "implicit_confirm_and_prompt"
    assert act.text == "From milan, to rome. On what date do you want to travel?"
    assert act.referenced_slots == ("departure", "arrival", "date")
    assert state.slots["departure"].status == "hypothesized"
    assert state.pending_implicit == ("departure", "arrival")
    assert exp.state_tag == "ask_date"

    _, act, exp = _say(state, "on monday", stack)
    # the cities pass implicit confirmation on this understood turn
    assert state.slots["departure"].status == "confirmed"
    assert state.slots["arrival"].status == "confirmed"
    assert act.act_type == "implicit_confirm_and_prompt"
    assert exp.state_tag == "ask_time"

    _, act, exp = _say(state, "at seven", stack)
    assert state.slots["date"].status == "confirmed"
    # all slots filled, the last one is recapped before querying
    assert act.act_type == "explicit_confirm"
    assert act.text == "Did you mean at 07:00-07:59?"
    assert state.pending_explicit == ("time",)
    assert exp.state_tag == "confirm_slot"
    assert exp.strength == "strict"

    _, act, exp = _say(state, "yes please", stack)
    assert state.slots["time"].status == "confirmed"
    assert act.act_type == "answer"
    assert state.outcome == "S"
    assert state.phase == "closing"
    assert act.connections
    # monday after the friday session date
    assert "on 2024-05-13" in act.text
    assert act.text.endswith("Thank you, goodbye.")
    assert exp.state_tag == "post_answer"


def test_over_answering_single_utterance(stack):
    state, _, _ = start_session(DialogueConfig())
    _, act, exp = _say(state, "from milan to rome on monday at seven", stack)
    assert all(state.slots[s].status == "hypothesized" for s in SLOTS)
    # nothing remains to acquire, so the whole frame is recapped
    assert act.act_type == "explicit_confirm"
    assert set(act.referenced_slots) == set(SLOTS)
    assert exp.state_tag == "confirm_slot"

    _, act, _ = _say(state, "yes", stack)
    assert state.outcome == "S"
    assert act.act_type == "answer"


def test_bare_city_needs_explicit_confirmation(stack):
    state, _, _ = start_session(DialogueConfig())
    analysis, act, exp = _say(state, "milan", stack)
    assert analysis.fills["departure"][1] == pytest.approx(0.5)
    assert state.slots["departure"].status == "hypothesized"
    # below the confirmation threshold: verify before moving on
    assert act.act_type == "explicit_confirm"
    assert act.text == "Did you mean from milan?"
    assert state.pending_explicit == ("departure",)
    assert exp.state_tag == "confirm_slot"
    assert exp.predicted_classes == ("affirm", "negate", "city")


def test_restating_value_counts_as_confirmation(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    _, act, _ = _say(state, "from milan", stack)
    assert state.slots["departure"].status == "confirmed"
    assert state.pending_explicit == ()
    assert act.act_type == "prompt"
    assert act.text == "Where do you want to go?"


def test_plain_yes_promotes_explicit_confirmation(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    _, act, _ = _say(state, "yes", stack)
    st = state.slots["departure"]
    assert st.status == "confirmed"
    assert not st.needs_explicit
    assert act.referenced_slots == ("arrival",)


def test_denial_resets_slot_and_records_value(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    analysis, act, _ = _say(state, "no", stack)
    assert analysis.symptom == SYMPTOM_REPAIR
    assert analysis.repair_slot == "departure"
    assert analysis.repair_value is None
    assert state.slots["departure"].status == "empty"
    assert state.denied_values["departure"] == {"milan"}
    assert act.act_type == "repair_request"
    assert act.text == "Please tell me the departure city."


def test_denied_value_is_never_readopted(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    _say(state, "no", stack)
    # the same string proposed again is treated as the same recognition error
    analysis, act, _ = _say(state, "milan", stack)
    assert analysis.fills == {}
    assert analysis.symptom == SYMPTOM_NON_UNDERSTANDING
    assert state.slots["departure"].status == "empty"


def test_replacement_under_confirmation_is_repair(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    # a different city while the first is awaiting confirmation
    analysis, act, _ = _say(state, "florence", stack)
    assert analysis.symptom == SYMPTOM_REPAIR
    assert analysis.repair_slot == "departure"
    assert analysis.repair_value == "florence"
    assert state.slots["departure"].value == "florence"
    assert state.slots["departure"].needs_explicit
    assert state.denied_values["departure"] == {"milan"}
    assert act.act_type == DEFAULT_REPAIR_ACTS[SYMPTOM_REPAIR]
    assert act.text == "Did you mean from florence?"
    assert state.pending_explicit == ("departure",)


def test_correction_phrase_targets_city_slot(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    analysis, act, _ = _say(state, "no i said florence", stack)
    assert analysis.symptom == SYMPTOM_REPAIR
    assert analysis.repair_slot == "departure"
    assert analysis.repair_value == "florence"
    # the untouched city still passes its implicit confirmation
    assert state.slots["arrival"].status == "confirmed"
    assert state.slots["departure"].value == "florence"
    assert act.act_type == "explicit_confirm"
    assert act.text == "Did you mean from florence?"


def test_contradicting_confirmed_slot_is_inconsistency(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    _say(state, "on monday", stack)  # promotes both cities
    assert state.slots["arrival"].status == "confirmed"
    analysis, act, _ = _say(state, "to venice", stack)
    assert analysis.symptom == SYMPTOM_INCONSISTENCY
    assert analysis.repair_slot == "arrival"
    assert analysis.repair_value == "venice"
    assert state.slots["arrival"].value == "venice"
    assert state.slots["arrival"].needs_explicit
    assert act.act_type == DEFAULT_REPAIR_ACTS[SYMPTOM_INCONSISTENCY]
    assert act.text == "Did you mean to venice?"


def test_same_city_for_both_slots_is_inconsistency(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    analysis, act, _ = _say(state, "to milan", stack)
    assert analysis.symptom == SYMPTOM_INCONSISTENCY
    assert analysis.repair_slot == "arrival"
    assert analysis.fills == {}
    # the doubted value is dropped and re-acquired
    assert state.slots["arrival"].status == "empty"
    assert act.act_type == "repair_request"
    assert act.text == "Please tell me the arrival city."
    # departure was not implicated and still passes implicit confirmation
    assert state.slots["departure"].status == "confirmed"


# ------------------------------------------------- failures and fallbacks

def test_non_understanding_reprompts_simplified(stack):
    state, _, _ = start_session(DialogueConfig())
    analysis, act, exp = _fail_turn(state, stack)
    assert analysis.symptom == SYMPTOM_NON_UNDERSTANDING
    assert state.failure_counters["departure"] == 1
    assert act.act_type == "repair_request"
    assert act.text == ("Sorry, I did not understand. "
                        "Please tell me the departure city.")
    assert exp.state_tag == "ask_departure"


def test_non_understanding_under_confirmation_reasks(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "milan", stack)
    _, act, _ = _fail_turn(state, stack)
    assert act.act_type == "repair_request"
    assert act.text == "Sorry, I did not understand. Did you mean from milan?"
    assert state.pending_explicit == ("departure",)


def test_pending_implicit_survives_non_understanding(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    _fail_turn(state, stack)
    assert state.slots["departure"].status == "hypothesized"
    assert state.pending_implicit == ("departure", "arrival")
    # a later understood turn still promotes them
    _say(state, "on monday", stack)
    assert state.slots["departure"].status == "confirmed"
    assert state.slots["arrival"].status == "confirmed"


def test_should_switch_isolated_only_for_cities():
    state, _, _ = start_session(DialogueConfig())
    assert should_switch_isolated(state) is None
    state.failure_counters["departure"] = 2
    assert should_switch_isolated(state) == ("departure", ("city",))
    state.focus = "date"
    state.failure_counters["date"] = 9
    assert should_switch_isolated(state) is None


def test_city_failures_switch_to_isolated_mode(stack):
    state, _, _ = start_session(DialogueConfig())
    _fail_turn(state, stack)
    assert not state.isolated_mode
    _, act, _ = _fail_turn(state, stack)
    assert state.isolated_mode
    assert act.act_type == "repair_request"
    assert act.text == ("Let us try differently. Please say only the "
                        "departure city name, one word.")
    assert act.referenced_slots == ("departure",)


def test_value_acquired_in_isolated_mode_needs_confirmation(stack):
    state, _, _ = start_session(DialogueConfig())
    _fail_turn(state, stack)
    _fail_turn(state, stack)
    assert state.isolated_mode
    _, act, _ = _say(state, "milan", stack)
    # isolated-mode hypotheses are always verified explicitly
    assert state.slots["departure"].needs_explicit
    assert act.act_type == "explicit_confirm"
    assert not state.isolated_mode


def test_city_budget_exhaustion_fails_session(stack):
    state, _, _ = start_session(DialogueConfig())
    for _ in range(4):
        _, act, _ = _fail_turn(state, stack)
        assert state.outcome == "open"
    _, act, _ = _fail_turn(state, stack)
    assert state.failure_counters["departure"] == 5
    assert act.act_type == "close"
    assert act.text == ("I am sorry, I am unable to complete the request. "
                        "Goodbye.")
    assert state.outcome == "SF"
    assert state.phase == "closing"


def test_optional_slot_relaxes_to_default(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    for _ in range(2):
        _, act, _ = _fail_turn(state, stack)
        assert "date" not in state.relaxed
    _, act, _ = _fail_turn(state, stack)
    assert state.relaxed == {"date"}
    assert state.failure_counters["date"] == 0
    assert state.slots["date"].status == "confirmed"
    assert act.text.startswith("I could not get the date. I will assume tomorrow.")
    # acquisition continues in the same act
    assert act.act_type == "implicit_confirm_and_prompt"
    assert act.text.endswith("At what time do you want to leave?")


def test_time_relaxes_to_main_connections(stack):
    state, _, _ = start_session(DialogueConfig())
    _say(state, "from milan to rome", stack)
    _say(state, "on monday", stack)
    for _ in range(3):
        _, act, _ = _fail_turn(state, stack)
    assert state.relaxed == {"time"}
    assert state.slots["time"].value is MAIN_CONNECTIONS
    assert act.text.startswith("I could not get the time. "
                               "I will look at the main connections of the day.")
    # the date never passed implicit confirmation during the failed turns,
    # so it is recapped before the query
    assert act.act_type == "explicit_confirm"
    assert act.text.endswith("Did you mean on monday?")
    _, act, _ = _say(state, "yes", stack)
    assert act.act_type == "answer"
    assert state.outcome == "SC"


def test_turn_budget_closes_session(stack):
    state, _, _ = start_session(DialogueConfig())
    state.turn_count = 29
    _, act, _ = _say(state, "from milan", stack)
    assert state.turn_count == 30
    assert act.act_type == "close"
    assert state.outcome == "SF"


# ------------------------------------------------------ queries and closing

def test_relax_constraints_requires_confirmed_cities():
    state, _, _ = start_session(DialogueConfig())
    state.slots["departure"] = SlotState(value="milan", status="hypothesized")
    state.slots["arrival"] = SlotState(value="rome", status="confirmed")
    with pytest.raises(DialogueError):
        relax_constraints(state)


def test_relax_constraints_rejects_identical_cities():
    state, _, _ = start_session(DialogueConfig())
    state.slots["departure"] = SlotState(value="milan", status="confirmed")
    state.slots["arrival"] = SlotState(value="milan", status="confirmed")
    with pytest.raises(DialogueError):
        relax_constraints(state)


def test_relax_constraints_fills_defaults():
    state, _, _ = start_session(DialogueConfig())
    state.slots["departure"] = SlotState(value="milan", status="confirmed")
    state.slots["arrival"] = SlotState(value="rome", status="confirmed")
    params = relax_constraints(state)
    assert params.relaxed == frozenset({"date", "time"})
    assert params.date == datetime.date(2024, 5, 11)  # tomorrow
    assert params.time is MAIN_CONNECTIONS


def test_query_outside_querying_phase_raises(stack):
    state, _, _ = start_session(DialogueConfig())
    with pytest.raises(DialogueError):
        build_query_and_answer(state, stack.timetable)


def test_no_connections_found_closes_with_reject(stack):
    linked = {(c.departure, c.arrival) for c in stack.timetable.connections}
    cities = sorted(stack.timetable.cities)
    pair = next((a, b) for a in cities for b in cities
                if a != b and (a, b) not in linked)
    state, _, _ = start_session(DialogueConfig())
    state.slots["departure"] = SlotState(value=pair[0], status="confirmed")
    state.slots["arrival"] = SlotState(value=pair[1], status="confirmed")
    state.phase = "querying"
    act = build_query_and_answer(state, stack.timetable)
    assert act.act_type == "reject"
    assert act.text.startswith(
        f"I am sorry, I could not find any connection from {pair[0]} to {pair[1]}")
    assert state.outcome == "SF"
    assert state.phase == "closing"


def test_closed_session_rejects_further_turns(stack):
    state, _, _ = start_session(DialogueConfig())
    state.outcome = "S"
    with pytest.raises(DialogueError):
        interpret(state, None, decode_ok=False)


# ---------------------------------------------------------- configuration

def test_load_dialogue_config_overrides(tmp_path):
    path = tmp_path / "dm.json"
    path.write_text(json.dumps({
        "explicit_confirm_threshold": 0.9,
        "max_turns": 12,
        "session_date": "2024-06-01",
        "focus_order": ["arrival", "departure", "time", "date"],
    }), encoding="utf-8")
    config = load_dialogue_config(path)
    assert config.explicit_confirm_threshold == 0.9
    assert config.max_turns == 12
    assert config.session_date == datetime.date(2024, 6, 1)
    assert config.focus_order == ("arrival", "departure", "time", "date")
    assert config.required_slot_budget == 5  # default preserved


def test_config_validation_rejects_bad_focus_order():
    config = DialogueConfig(focus_order=("departure", "arrival", "date"))
    with pytest.raises(DialogueError):
        config.validate()


def test_config_validation_rejects_zero_thresholds():
    config = DialogueConfig(isolated_failure_threshold=0)
    with pytest.raises(DialogueError):
        config.validate()
