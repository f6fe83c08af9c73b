"""Paths to the shipped fixture data (lexicon, grammar, timetable, corpora)."""

from __future__ import annotations

import pathlib

DATA_DIR = pathlib.Path(__file__).resolve().parent / "data"

LEXICON_PATH = DATA_DIR / "lexicon.tsv"
GRAMMAR_PATH = DATA_DIR / "grammar.sg"
TIMETABLE_PATH = DATA_DIR / "timetable.csv"
TAGGED_CORPUS_PATH = DATA_DIR / "corpus_tagged.txt"
SCENARIOS_PATH = DATA_DIR / "scenarios.json"
