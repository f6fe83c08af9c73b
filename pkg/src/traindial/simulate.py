"""Scripted user personas for driving whole dialogues against the system.

Each simulator owns one travel scenario (the ground truth) and reacts to
the latest system act: it answers the prompted parameter, objects to
wrongly hypothesized values, and confirms correct ones. Personas layer
speech phenomena on top of the cooperative core; every utterance is
returned together with the phenomenon tags it carries so the evaluation
harness can report tagged and untagged utterances separately.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from . import data
from .values import DateValue, TimeValue

PERSONAS = ("cooperative", "over_answering", "restarting", "oov_prone",
            "off_task")
PHENOMENA = ("restart", "shout-surrogate", "extralinguistic", "ill-formed",
             "oov")

# deliberately out-of-vocabulary filler material
_OOV_FILLERS = ("ehm", "uhm", "mah")
_EXTRALINGUISTIC = ("coughnoise", "doorslam")
# in-vocabulary but content-free: parses to an empty frame
_OFF_TASK_LINES = (
    "hello i need",
    "please the train please",
    "hello hello the train",
    "i want to go",
    "the train the train",
)


class SimulatorError(Exception):
    pass


@dataclass(frozen=True)
class Scenario:
    id: str
    departure: str
    arrival: str
    date_phrase: str
    date_value: DateValue
    time_phrase: str
    time_value: TimeValue


def _date_value_from_json(raw: dict) -> DateValue:
    form = raw["form"]
    if form == "relative":
        return DateValue("relative", offset=raw["offset"])
    if form == "weekday":
        return DateValue("weekday", weekday=raw["weekday"])
    if form == "explicit":
        return DateValue("explicit", month=raw["month"], day=raw["day"])
    raise SimulatorError(f"unknown date form {form!r}")


def load_scenarios(path=None) -> tuple[Scenario, ...]:
    with open(path or data.SCENARIOS_PATH, encoding="utf-8") as fh:
        raw = json.load(fh)
    scenarios = []
    for entry in raw:
        scenarios.append(Scenario(
            id=entry["id"],
            departure=entry["departure"],
            arrival=entry["arrival"],
            date_phrase=entry["date_phrase"],
            date_value=_date_value_from_json(entry["date_value"]),
            time_phrase=entry["time_phrase"],
            time_value=TimeValue(entry["time_value"]["start"],
                                 entry["time_value"]["end"]),
        ))
    return tuple(scenarios)


class UserSimulator:
    def __init__(self, scenario: Scenario, persona: str = "cooperative",
                 seed: int = 0):
        if persona not in PERSONAS:
            raise SimulatorError(f"unknown persona {persona!r}")
        self.scenario = scenario
        self.persona = persona
        self.rng = random.Random(seed)
        self.first_turn = True

    # ------------------------------------------------------------- truth

    def expected_value(self, slot: str) -> str:
        s = self.scenario
        if slot == "departure":
            return s.departure
        if slot == "arrival":
            return s.arrival
        if slot == "date":
            return s.date_value.render()
        return s.time_value.render()

    def _wrong_slot(self, slots_view: dict | None) -> str | None:
        """First slot hypothesized with a value that contradicts the goal.

        Values the system confirmed (including relaxation defaults) are
        accepted: the simulated user challenges only open hypotheses.
        """
        if not slots_view:
            return None
        for slot in ("departure", "arrival", "date", "time"):
            view = slots_view.get(slot, {})
            if view.get("status") == "hypothesized" and view.get("value") \
                    and view["value"] != self.expected_value(slot):
                return slot
        return None

    # ----------------------------------------------------------- answers

    def _slot_answer(self, slot: str) -> str:
        s, rng = self.scenario, self.rng
        if slot == "departure":
            return rng.choice([f"from {s.departure}",
                               f"i leave from {s.departure}",
                               f"i want to leave from {s.departure}"])
        if slot == "arrival":
            return rng.choice([f"to {s.arrival}", f"i go to {s.arrival}",
                               f"i want to go to {s.arrival}"])
        if slot == "date":
            return rng.choice([s.date_phrase, f"i travel {s.date_phrase}",
                               f"{s.date_phrase} please"])
        return rng.choice([s.time_phrase, f"i leave {s.time_phrase}",
                           f"{s.time_phrase} please"])

    def _correction(self, slot: str) -> str:
        s = self.scenario
        if slot == "departure":
            return self.rng.choice([f"no i said {s.departure}",
                                    f"no from {s.departure}"])
        if slot == "arrival":
            return self.rng.choice([f"no i said {s.arrival}",
                                    f"no to {s.arrival}"])
        if slot == "date":
            return f"no {s.date_phrase}"
        return f"no {s.time_phrase}"

    @staticmethod
    def _longest_content_word(words: list[str]) -> int | None:
        best = None
        for i, w in enumerate(words):
            if len(w) >= 4 and (best is None or len(w) > len(words[best])):
                best = i
        return best

    def _apply_phenomena(self, text: str) -> tuple[str, tuple[str, ...]]:
        tags: list[str] = []
        words = text.split()
        if self.persona == "restarting":
            roll = self.rng.random()
            idx = self._longest_content_word(words)
            if roll < 0.35:
                # false start: an abandoned fragment precedes the full word
                if idx is None:
                    words = words[:1] + words
                else:
                    words.insert(idx, words[idx][:-1])
                tags.append("restart")
            elif roll < 0.50 and idx is not None:
                # shouting surrogate: the stressed word comes out distorted
                w = words[idx]
                words[idx] = w[:2] + w[1:]
                tags.append("shout-surrogate")
        elif self.persona == "oov_prone":
            roll = self.rng.random()
            if roll < 0.35:
                filler = self.rng.choice(_OOV_FILLERS)
                pos = self.rng.randrange(len(words) + 1)
                words.insert(pos, filler)
                tags.append("oov")
            elif roll < 0.50:
                words.append(self.rng.choice(_EXTRALINGUISTIC))
                tags.append("extralinguistic")
        return " ".join(words), tuple(tags)

    # ------------------------------------------------------------ driver

    def respond(self, act_type: str, referenced_slots: tuple[str, ...],
                slots_view: dict | None = None,
                isolated: bool = False) -> tuple[str, tuple[str, ...]]:
        """The user's next utterance plus its phenomenon tags."""
        if self.persona == "off_task" and self.rng.random() < 0.7:
            self.first_turn = False
            return self.rng.choice(_OFF_TASK_LINES), ("ill-formed",)

        first = self.first_turn
        self.first_turn = False

        if isolated and referenced_slots \
                and referenced_slots[-1] in ("departure", "arrival"):
            city = self.expected_value(referenced_slots[-1])
            return self._apply_phenomena(city)

        wrong = self._wrong_slot(slots_view)
        if wrong is not None:
            return self._apply_phenomena(self._correction(wrong))

        if act_type == "explicit_confirm":
            text = self.rng.choice(["yes", "yes please"])
            return self._apply_phenomena(text)
        if act_type in ("answer", "reject", "close"):
            return self.rng.choice(["thanks goodbye", "goodbye"]), ()

        # a parameter prompt (possibly combined with confirmations)
        slot = referenced_slots[-1] if referenced_slots else "departure"
        if self.persona == "over_answering" and first:
            s = self.scenario
            text = (f"i want to go from {s.departure} to {s.arrival} "
                    f"{s.date_phrase}")
            return self._apply_phenomena(text)
        return self._apply_phenomena(self._slot_answer(slot))
