#!/usr/bin/env python3
"""Regenerate the shipped data fixtures deterministically.

Produces, under src/traindial/data/:
  lexicon.tsv        full-domain vocabulary: 3,471 words in 358 classes
                     (10 semantic classes, city class of 2,983 members)
  timetable.csv      60 connections over 12 cities
  corpus_tagged.txt  dialogue-state-tagged training sentences for the LM
  scenarios.json     20 trip scenarios for simulated trials

Everything is seeded; rerunning this script leaves the files byte-identical.
"""

from __future__ import annotations

import json
import pathlib
import random
import sys

DATA_DIR = pathlib.Path(__file__).resolve().parent.parent / "src" / "traindial" / "data"

CITIES_CORE = [
    "milan", "turin", "rome", "naples", "florence", "venice",
    "genoa", "bologna", "verona", "trieste", "bari", "palermo",
]

# Extra cities the corpus mentions so the city-class membership model is not
# concentrated on the 12 timetable cities alone.
CITIES_EXTRA = [
    "parma", "modena", "pisa", "siena", "rimini", "ancona", "pescara", "foggia",
    "lecce", "taranto", "messina", "catania", "cagliari", "sassari", "bergamo",
    "brescia", "padua", "vicenza", "ferrara", "ravenna", "perugia", "terni",
    "latina", "salerno", "cosenza", "potenza", "campobasso", "aosta",
]

TWO_WORD_CITIES = [
    "porto alto", "villa nova", "monte verde", "castel fiore", "sesto marina",
    "borgo vecchio", "ponte lungo", "santa rosa", "riva bianca", "colle verde",
    "pietra alta", "torre chiara", "val brenta", "campo largo", "selva nera",
    "prato fondo", "rocca bruna", "lido verde", "passo corto", "serra lunga",
]

PREFIXES = [
    "bren", "cor", "dal", "fal", "gor", "lan", "mar", "nor", "os", "pal",
    "quar", "ros", "sal", "tar", "ur", "val", "zan", "bel", "cam", "dor",
    "fer", "gal", "lor", "mon", "nov", "or", "per", "ril", "sor", "tor",
    "ved", "al", "bor", "cas", "den", "far", "gris", "lim", "mol", "ner",
]

SUFFIXES = [
    "ago", "ano", "aro", "asca", "ate", "azzo", "edo", "ella", "eno", "etto",
    "iago", "ico", "iga", "ina", "isio", "fort", "ona", "one", "ora", "osa",
    "otto", "ucca", "udine", "iano", "etta", "ino", "aro2", "ole", "ord", "ia",
]

MIDDLES = ["", "b", "c", "d", "g", "l", "m", "n", "p", "r", "s", "t", "v", "z"]

MONTHS = ["january", "february", "march", "april", "may", "june",
          "july", "august", "september", "october", "november", "december"]
WEEKDAYS = ["monday", "tuesday", "wednesday", "thursday", "friday", "saturday", "sunday"]
DAYPARTS = ["morning", "afternoon", "evening", "night"]
AFFIRM = ["yes", "yeah"]
NEGATE = ["no", "nope"]
GREETING = ["hello", "goodbye"]
POLITE = ["please", "thanks"]

# 59 cardinal words for 1..59, plus zero and round numbers, plus 11 ordinals: 76 total.
UNITS = "one two three four five six seven eight nine".split()
TEENS = "ten eleven twelve thirteen fourteen fifteen sixteen seventeen eighteen nineteen".split()
TENS = ["twenty", "thirty", "forty", "fifty"]


def number_words() -> list[str]:
    words = list(UNITS) + list(TEENS)
    for tens in TENS:
        words.append(tens)
        words.extend(f"{tens}_{u}" for u in UNITS)
    words += ["zero", "sixty", "seventy", "eighty", "ninety", "hundred"]
    words += "first second third fourth fifth sixth seventh eighth ninth tenth eleventh".split()
    assert len(words) == 76, len(words)
    return words


SINGLETON_BASE = """
from to at on in of for the a an and or not i you we it is are be was were my me
want would like need go going leave leaving depart arrive arriving travel trip
train trains connection connections ticket seat time date day week journey thank
when where what which how much many there here that this next last early late
can could may must will shall do does did done get take find show tell give me2
about after again all also am any around back because been before being between
both but by came come day2 each even every few first2 found gave good great had
has have her him his if into its just know large let little long look made
make man men more most now number2 off old only other our out over own people
right said same saw say see she so some still such than them then these they
thing think those three2 through too two2 under up us use very way well went
were2 while who why with work year your big case city2 end fact group hand high
home kind life line long2 new night2 open order part place point problem
public real same2 small state system water world young area book call car
change close cost door down due free full help hour info information leave2
level list lost main mean money month2 name near note open2 paper pay per
phone plan price question read road room rule run second2 service side sign
sort sound stop talk team test text today tomorrow top total town track trade
turn type unit upon used user view visit voice wait walk wall watch week2 wide
wish word yesterday
""".split()


def pseudo_words(count: int, taken: set[str], rng: random.Random) -> list[str]:
    syll = ["ba", "be", "bi", "bo", "bu", "da", "de", "di", "do", "du",
            "fa", "fe", "fi", "fo", "fu", "ga", "ge", "gi", "go", "gu",
            "ka", "ke", "ki", "ko", "ku", "la", "le", "li", "lo", "lu",
            "ma", "me", "mi", "mo", "mu", "na", "ne", "ni", "no2", "nu",
            "pa", "pe", "pi", "po", "pu", "ra", "re", "ri", "ro", "ru",
            "sa", "se", "si", "so2", "su", "ta", "te", "ti", "to2", "tu",
            "va", "ve", "vi", "vo", "vu", "za", "ze", "zi", "zo", "zu"]
    syll = [s for s in syll if not s.endswith("2")]
    out: list[str] = []
    while len(out) < count:
        w = rng.choice(syll) + rng.choice(syll) + rng.choice(["", "n", "r", "l", "s"])
        if w not in taken and len(w) >= 4:
            taken.add(w)
            out.append(w)
    return out


def build_cities(rng: random.Random) -> list[str]:
    cities: list[str] = []
    taken: set[str] = set()

    def add(name: str) -> None:
        if name not in taken:
            taken.add(name)
            cities.append(name)

    for c in CITIES_CORE + CITIES_EXTRA:
        add(c)
    for c in TWO_WORD_CITIES:
        add(c.replace(" ", "_"))
    combos = [(p, m, s) for p in PREFIXES for m in MIDDLES for s in SUFFIXES]
    rng.shuffle(combos)
    for p, m, s in combos:
        if len(cities) >= 2983:
            break
        add(p + m + s.rstrip("2"))
    assert len(cities) == 2983, len(cities)
    return cities


def build_lexicon(rng: random.Random) -> list[tuple[str, str, str | None]]:
    rows: list[tuple[str, str, str | None]] = []
    used: set[str] = set()

    def emit(word: str, cid: str, tag: str | None) -> None:
        assert word not in used, f"duplicate in generator: {word}"
        used.add(word)
        rows.append((word, cid, tag))

    cities = build_cities(rng)
    for w in cities:
        emit(w, "city", "city")
    for core in CITIES_CORE:
        emit(f"{core}_central", "station", "station")
        emit(f"{core}_north", "station", "station")
    for extra in ["parma_east", "modena_south", "pisa_harbor", "siena_gate",
                  "rimini_pier", "ancona_dock", "lecce_plaza", "bergamo_upper",
                  "padua_fair"]:
        emit(extra, "station", "station")
    for w in number_words():
        emit(w, "number", "number")
    for w in MONTHS:
        emit(w, "month", "month")
    for w in WEEKDAYS:
        emit(w, "weekday", "weekday")
    for w in DAYPARTS:
        emit(w, "daypart", "daypart")
    for w in AFFIRM:
        emit(w, "affirm", "affirm")
    for w in NEGATE:
        emit(w, "negate", "negate")
    for w in GREETING:
        emit(w, "greeting", "greeting")
    for w in POLITE:
        emit(w, "polite", "polite")

    singles: list[str] = []
    seen: set[str] = set()
    for w in SINGLETON_BASE:
        w = w.rstrip("0123456789")
        if w and w not in seen and w not in used:
            seen.add(w)
            singles.append(w)
    if len(singles) < 348:
        singles += pseudo_words(348 - len(singles), used | seen, rng)
    singles = singles[:348]
    for w in singles:
        emit(w, f"w_{w}", None)

    assert len(rows) == 3471, len(rows)
    assert len({cid for _, cid, _ in rows}) == 358
    return rows


def build_timetable(rng: random.Random) -> list[str]:
    # 15 ordered city pairs x 4 departures = 60 rows; 2 of 4 are main connections.
    pairs = [
        ("milan", "rome"), ("rome", "milan"), ("milan", "venice"), ("venice", "milan"),
        ("turin", "milan"), ("milan", "turin"), ("rome", "naples"), ("naples", "rome"),
        ("florence", "rome"), ("rome", "palermo"), ("bologna", "florence"),
        ("genoa", "turin"), ("verona", "venice"), ("trieste", "venice"), ("bari", "naples"),
    ]
    dep_times = [(7, 15), (9, 30), (13, 45), (18, 10)]
    rows = []
    for dep, arr in pairs:
        duration = 95 + (hash_stable(dep + arr) % 150)
        for k, (hh, mm) in enumerate(dep_times):
            start = hh * 60 + mm + 5 * (hash_stable(arr + dep + str(k)) % 3)
            end = start + duration
            days = "daily"
            main = "1" if k in (1, 2) else "0"
            rows.append(f"{dep},{arr},{start // 60:02d}:{start % 60:02d},"
                        f"{(end // 60) % 24:02d}:{end % 60:02d},{days},{main}")
    assert len(rows) == 60
    return rows


def hash_stable(s: str) -> int:
    import hashlib
    return int(hashlib.sha256(s.encode()).hexdigest(), 16)


def build_corpus(rng: random.Random) -> list[str]:
    """Dialogue-state-tagged sentences: ``tag<TAB>sentence`` per line."""
    corpus_cities = CITIES_CORE + CITIES_EXTRA[:12]
    hours = ["six", "seven", "eight", "nine", "ten", "eleven", "twelve",
             "thirteen", "fourteen", "fifteen", "sixteen", "seventeen",
             "eighteen", "nineteen", "twenty"]
    days_words = WEEKDAYS + ["today", "tomorrow"]
    month_days = ["first", "second", "third", "fifth", "tenth", "twelve", "twenty"]

    def city() -> str:
        return rng.choice(corpus_cities)

    def date_phrase() -> str:
        r = rng.random()
        if r < 0.45:
            return f"on {rng.choice(WEEKDAYS)}"
        if r < 0.70:
            return rng.choice(["tomorrow", "today"])
        if r < 0.85:
            return f"on {rng.choice(MONTHS)} {rng.choice(month_days)}"
        return rng.choice(days_words)

    def time_phrase() -> str:
        r = rng.random()
        if r < 0.5:
            return f"at {rng.choice(hours)}"
        if r < 0.7:
            return f"in the {rng.choice(DAYPARTS)}"
        if r < 0.85:
            return f"at {rng.choice(hours)} thirty"
        return rng.choice(hours)

    templates = {
        "ask_departure": [
            lambda: f"from {city()}",
            lambda: f"i leave from {city()}",
            lambda: f"i want to leave from {city()}",
            lambda: f"{city()}",
            lambda: f"from {city()} to {city()}",
            lambda: f"from {city()} to {city()} {date_phrase()}",
            lambda: f"i want to go from {city()} to {city()}",
            lambda: f"hello i need a train from {city()}",
        ],
        "ask_arrival": [
            lambda: f"to {city()}",
            lambda: f"i go to {city()}",
            lambda: f"i want to go to {city()}",
            lambda: f"{city()}",
            lambda: f"to {city()} {date_phrase()}",
            lambda: f"to {city()} please",
        ],
        "ask_date": [
            lambda: date_phrase(),
            lambda: f"i travel {date_phrase()}",
            lambda: f"i want to leave {date_phrase()}",
            lambda: f"{date_phrase()} {time_phrase()}",
            lambda: f"{date_phrase()} please",
        ],
        "ask_time": [
            lambda: time_phrase(),
            lambda: f"i leave {time_phrase()}",
            lambda: f"i want to leave {time_phrase()}",
            lambda: f"{time_phrase()} please",
        ],
        "confirm_slot": [
            lambda: "yes",
            lambda: "yes please",
            lambda: "yeah",
            lambda: "no",
            lambda: "nope",
            lambda: f"no to {city()}",
            lambda: f"no from {city()}",
            lambda: f"no i said {city()}",
            lambda: f"yes {time_phrase()}",
        ],
        "post_answer": [
            lambda: "thanks",
            lambda: "thanks goodbye",
            lambda: "goodbye",
            lambda: "thank you very much",
            lambda: "that is all thanks",
        ],
    }
    lines = []
    for tag, makers in templates.items():
        for _ in range(300):
            lines.append(f"{tag}\t{rng.choice(makers)()}")
    rng.shuffle(lines)
    return lines


def build_scenarios(rng: random.Random) -> list[dict]:
    # Goal values drawn from timetable pairs so noiseless runs always find rows.
    pairs = [
        ("milan", "rome"), ("rome", "milan"), ("milan", "venice"), ("venice", "milan"),
        ("turin", "milan"), ("milan", "turin"), ("rome", "naples"), ("naples", "rome"),
        ("florence", "rome"), ("rome", "palermo"), ("bologna", "florence"),
        ("genoa", "turin"), ("verona", "venice"), ("trieste", "venice"), ("bari", "naples"),
        ("milan", "rome"), ("rome", "naples"), ("turin", "milan"), ("florence", "rome"),
        ("venice", "milan"),
    ]
    date_choices = [("on monday", {"form": "weekday", "weekday": 0}),
                    ("on tuesday", {"form": "weekday", "weekday": 1}),
                    ("on wednesday", {"form": "weekday", "weekday": 2}),
                    ("on thursday", {"form": "weekday", "weekday": 3}),
                    ("on friday", {"form": "weekday", "weekday": 4}),
                    ("on saturday", {"form": "weekday", "weekday": 5}),
                    ("tomorrow", {"form": "relative", "offset": 1})]
    time_choices = [("at seven", 7), ("at nine", 9), ("at thirteen", 13), ("at eighteen", 18)]
    scenarios = []
    for i, (dep, arr) in enumerate(pairs):
        dphrase, dvalue = date_choices[i % len(date_choices)]
        tphrase, hour = time_choices[i % len(time_choices)]
        scenarios.append({
            "id": f"s{i + 1:02d}",
            "departure": dep,
            "arrival": arr,
            "date_phrase": dphrase,
            "date_value": dvalue,
            "time_phrase": tphrase,
            "time_value": {"start": hour * 60, "end": hour * 60 + 59},
        })
    return scenarios


def main() -> int:
    DATA_DIR.mkdir(parents=True, exist_ok=True)
    rng = random.Random(20240510)

    rows = build_lexicon(rng)
    with open(DATA_DIR / "lexicon.tsv", "w", encoding="utf-8") as fh:
        fh.write("# full-domain lexicon: 3471 words, 358 classes\n")
        for word, cid, tag in rows:
            fh.write(f"{word}\t{cid}\t{tag}\n" if tag else f"{word}\t{cid}\n")

    with open(DATA_DIR / "timetable.csv", "w", encoding="utf-8") as fh:
        fh.write("# dep_city,arr_city,dep_time,arr_time,days,main_flag\n")
        fh.write("\n".join(build_timetable(rng)) + "\n")

    with open(DATA_DIR / "corpus_tagged.txt", "w", encoding="utf-8") as fh:
        fh.write("\n".join(build_corpus(rng)) + "\n")

    with open(DATA_DIR / "scenarios.json", "w", encoding="utf-8") as fh:
        json.dump(build_scenarios(rng), fh, indent=2)
        fh.write("\n")

    print(f"fixtures written to {DATA_DIR}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
