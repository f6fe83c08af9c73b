"""The train-connection database that grounds the dialogue task."""

from __future__ import annotations

from dataclasses import dataclass

from .lexicon import Lexicon
from .values import TimeValue, parse_clock, render_clock

DAY_NAMES = ("mon", "tue", "wed", "thu", "fri", "sat", "sun")


class TimetableError(Exception):
    """Raised for malformed timetable files."""


@dataclass(frozen=True)
class Connection:
    departure: str
    arrival: str
    dep_time: int  # minutes since midnight
    arr_time: int
    days: frozenset[int]  # 0=monday
    main: bool

    def render(self) -> str:
        return (f"{self.departure} {render_clock(self.dep_time)} -> "
                f"{self.arrival} {render_clock(self.arr_time)}")


@dataclass
class Timetable:
    connections: list[Connection]

    @property
    def cities(self) -> set[str]:
        out = set()
        for c in self.connections:
            out.add(c.departure)
            out.add(c.arrival)
        return out


def _parse_days(field: str) -> frozenset[int]:
    if field == "daily":
        return frozenset(range(7))
    days = set()
    for part in field.split("|"):
        if part not in DAY_NAMES:
            raise TimetableError(f"unknown day name {part!r}")
        days.add(DAY_NAMES.index(part))
    return frozenset(days)


def load_timetable(path, lexicon: Lexicon | None = None) -> Timetable:
    """Load ``dep,arr,dep_time,arr_time,days,main_flag`` rows.

    With a lexicon, city fields must belong to its city class.
    """
    connections: list[Connection] = []
    city_words = set(lexicon.members_of_tag("city")) if lexicon is not None else None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            fields = line.split(",")
            if len(fields) != 6:
                raise TimetableError(f"{path}:{lineno}: expected 6 fields, got {len(fields)}")
            dep, arr, dep_t, arr_t, days, main = fields
            if dep == arr:
                raise TimetableError(f"{path}:{lineno}: departure equals arrival ({dep!r})")
            if city_words is not None:
                for city in (dep, arr):
                    if city not in city_words:
                        raise TimetableError(f"{path}:{lineno}: unknown city {city!r}")
            try:
                connections.append(Connection(
                    departure=dep, arrival=arr,
                    dep_time=parse_clock(dep_t), arr_time=parse_clock(arr_t),
                    days=_parse_days(days), main=main == "1",
                ))
            except Exception as exc:
                raise TimetableError(f"{path}:{lineno}: {exc}") from exc
    return Timetable(connections=connections)


def query(tt: Timetable, departure: str, arrival: str, weekday: int,
          time: TimeValue) -> list[Connection]:
    """Connections for the city pair on the given weekday within the time window.

    The main-connections marker selects only flagged rows over the whole day.
    Results are ordered by departure time (then arrival city for stability).
    """
    out = []
    for c in tt.connections:
        if c.departure != departure or c.arrival != arrival:
            continue
        if weekday not in c.days:
            continue
        if time.main_connections:
            if not c.main:
                continue
        elif not (time.start <= c.dep_time <= time.end):
            continue
        out.append(c)
    out.sort(key=lambda c: (c.dep_time, c.arr_time, c.arrival))
    return out
