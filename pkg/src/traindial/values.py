"""Normalized slot values: calendar dates, clock-time ranges, city ids.

The parser produces symbolic values (``DateValue("weekday", 0)``) that stay
independent of the wall clock; the dialogue manager resolves them against a
session date when it builds the database query.
"""

from __future__ import annotations

import datetime
from dataclasses import dataclass

MONTHS = ("january", "february", "march", "april", "may", "june",
          "july", "august", "september", "october", "november", "december")
WEEKDAYS = ("monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday")
DAYPARTS = {
    "morning": (6 * 60, 12 * 60 - 1),
    "afternoon": (12 * 60, 18 * 60 - 1),
    "evening": (18 * 60, 24 * 60 - 1),
    "night": (0, 6 * 60 - 1),
}

_CARDINAL = {}
for _i, _w in enumerate(
    "one two three four five six seven eight nine ten eleven twelve thirteen fourteen "
    "fifteen sixteen seventeen eighteen nineteen twenty".split(), start=1,
):
    _CARDINAL[_w] = _i
for _tens_word, _tens in (("twenty", 20), ("thirty", 30), ("forty", 40), ("fifty", 50)):
    _CARDINAL[_tens_word] = _tens
    for _u_word, _u in list(_CARDINAL.items())[:9]:
        _CARDINAL[f"{_tens_word}_{_u_word}"] = _tens + _u
_CARDINAL["zero"] = 0
_CARDINAL["sixty"] = 60
_CARDINAL["seventy"] = 70
_CARDINAL["eighty"] = 80
_CARDINAL["ninety"] = 90
_CARDINAL["hundred"] = 100

_ORDINAL = {w: i for i, w in enumerate(
    "first second third fourth fifth sixth seventh eighth ninth tenth eleventh".split(),
    start=1,
)}


class ValueError_(Exception):
    """Normalization failure (day 32, hour 27, ...); concept gets discarded."""


def number_word_value(word: str) -> int | None:
    if word in _CARDINAL:
        return _CARDINAL[word]
    if word in _ORDINAL:
        return _ORDINAL[word]
    return None


@dataclass(frozen=True)
class DateValue:
    """Symbolic date: relative offset, weekday, or explicit month/day."""

    form: str  # "relative" | "weekday" | "explicit"
    offset: int = 0       # relative: days from the session date
    weekday: int = 0      # weekday: 0=monday
    month: int = 0
    day: int = 0

    def resolve(self, session_date: datetime.date) -> datetime.date:
        if self.form == "relative":
            return session_date + datetime.timedelta(days=self.offset)
        if self.form == "weekday":
            ahead = (self.weekday - session_date.weekday()) % 7
            return session_date + datetime.timedelta(days=ahead or 7)
        for year in range(session_date.year, session_date.year + 8):
            try:
                resolved = datetime.date(year, self.month, self.day)
            except ValueError:  # feb 29 in a non-leap year
                continue
            if resolved >= session_date:
                return resolved
        raise ValueError_(f"unresolvable date {self.month}/{self.day}")

    def render(self) -> str:
        if self.form == "relative":
            return "today" if self.offset == 0 else "tomorrow"
        if self.form == "weekday":
            return WEEKDAYS[self.weekday]
        return f"{MONTHS[self.month - 1]} {self.day}"


@dataclass(frozen=True)
class TimeValue:
    """Inclusive clock-time window in minutes since midnight."""

    start: int
    end: int
    main_connections: bool = False

    def render(self) -> str:
        if self.main_connections:
            return "the main connections of the day"
        return f"{self.start // 60:02d}:{self.start % 60:02d}-{self.end // 60:02d}:{self.end % 60:02d}"


MAIN_CONNECTIONS = TimeValue(0, 24 * 60 - 1, main_connections=True)


def parse_date_tokens(tokens: list[str]) -> DateValue:
    """Normalize a date yield like ["june", "five"] or ["monday"]."""
    toks = [t for t in tokens if t not in ("on", "for", "the", "of", "next")]
    if len(toks) == 1:
        w = toks[0]
        if w == "today":
            return DateValue("relative", offset=0)
        if w == "tomorrow":
            return DateValue("relative", offset=1)
        if w in WEEKDAYS:
            return DateValue("weekday", weekday=WEEKDAYS.index(w))
        raise ValueError_(f"not a date word: {w!r}")
    if len(toks) == 2:
        a, b = toks
        month = day = None
        for w in (a, b):
            if w in MONTHS:
                month = MONTHS.index(w) + 1
            else:
                day = number_word_value(w)
        if month is None or day is None:
            raise ValueError_(f"not a month/day pair: {toks!r}")
        if not 1 <= day <= 31:
            raise ValueError_(f"day out of range: {day}")
        try:
            datetime.date(2024, month, day)  # leap reference year: accepts feb 29
        except ValueError as exc:
            raise ValueError_(str(exc)) from exc
        return DateValue("explicit", month=month, day=day)
    raise ValueError_(f"unparseable date yield: {tokens!r}")


def parse_time_tokens(tokens: list[str]) -> TimeValue:
    """Normalize a time yield like ["eight"], ["eight", "thirty"], ["morning"]."""
    toks = [t for t in tokens if t not in ("at", "in", "the", "around", "oclock")]
    if len(toks) == 1 and toks[0] in DAYPARTS:
        start, end = DAYPARTS[toks[0]]
        return TimeValue(start, end)
    if len(toks) == 1:
        hour = number_word_value(toks[0])
        if hour is None or not 0 <= hour <= 23:
            raise ValueError_(f"not an hour word: {toks[0]!r}")
        return TimeValue(hour * 60, hour * 60 + 59)
    if len(toks) == 2:
        hour = number_word_value(toks[0])
        minute = number_word_value(toks[1])
        if hour is None or minute is None or not 0 <= hour <= 23 or not 0 <= minute <= 59:
            raise ValueError_(f"not an hour/minute pair: {toks!r}")
        start = hour * 60 + minute
        return TimeValue(start, min(start + 59, 24 * 60 - 1))
    raise ValueError_(f"unparseable time yield: {tokens!r}")


def parse_clock(text: str) -> int:
    """"HH:MM" -> minutes since midnight."""
    hh, mm = text.split(":")
    hour, minute = int(hh), int(mm)
    if not (0 <= hour <= 23 and 0 <= minute <= 59):
        raise ValueError_(f"invalid clock time {text!r}")
    return hour * 60 + minute


def render_clock(minutes: int) -> str:
    return f"{minutes // 60:02d}:{minutes % 60:02d}"
