"""Class-based bigram language models with linear-interpolation smoothing.

A sentence is scored through its word-class sequence: each step pays a
class-transition probability P(c2|c1) and a class-membership probability
P(w|c).  Transitions interpolate maximum-likelihood bigram and unigram
estimates; the unigram is itself mixed with a uniform component so that
every transition probability is at least ``floor`` while each history's
distribution still sums to one.  Dialogue-state-dependent variants are
per-state models mixed with the global one, falling back to the global
model for unknown or sparse states.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .lexicon import Lexicon, OOV_CLASS_ID

START_CLASS = "<s>"
END_CLASS = "</s>"

FORMAT_VERSION = 1


class LMError(Exception):
    """Raised for training, lookup, and serialization failures."""


@dataclass(frozen=True)
class LMConfig:
    interpolation: float = 0.7    # lambda: bigram weight
    floor: float = 1e-7           # minimum transition probability
    membership_weight: float = 0.9  # within-class relative-frequency weight
    state_mix: float = 0.5        # per-state model weight against global
    min_state_sentences: int = 50

    def validate(self) -> None:
        if not 0.0 <= self.interpolation <= 1.0:
            raise LMError(f"interpolation weight {self.interpolation} outside [0, 1]")
        if not 0.0 < self.floor < 1.0:
            raise LMError(f"floor {self.floor} outside (0, 1)")
        if not 0.0 <= self.membership_weight <= 1.0:
            raise LMError("membership weight outside [0, 1]")
        if not 0.0 <= self.state_mix <= 1.0:
            raise LMError("state mix weight outside [0, 1]")


@dataclass
class BigramCounts:
    sentences: int
    unigram: dict[str, int]                 # successor class -> count (incl end marker)
    bigram: dict[str, dict[str, int]]       # history class -> successor -> count
    membership: dict[str, dict[str, int]]   # class -> word -> count


def count_corpus(corpus: list[list[str]], lexicon: Lexicon) -> BigramCounts:
    if not corpus:
        raise LMError("empty training corpus")
    uni: dict[str, int] = {}
    big: dict[str, dict[str, int]] = {}
    mem: dict[str, dict[str, int]] = {}
    for sentence in corpus:
        history = START_CLASS
        for word in sentence:
            cid = lexicon.class_id_of(word)
            uni[cid] = uni.get(cid, 0) + 1
            row = big.setdefault(history, {})
            row[cid] = row.get(cid, 0) + 1
            wrow = mem.setdefault(cid, {})
            wrow[word] = wrow.get(word, 0) + 1
            history = cid
        uni[END_CLASS] = uni.get(END_CLASS, 0) + 1
        row = big.setdefault(history, {})
        row[END_CLASS] = row.get(END_CLASS, 0) + 1
    return BigramCounts(sentences=len(corpus), unigram=uni, bigram=big, membership=mem)


class _ScoringMixin:
    """Log-space helpers shared by concrete models and mixtures."""

    lexicon: Lexicon

    def successor_prob(self, history: str, successor: str) -> float:
        raise NotImplementedError

    def membership_prob(self, word: str, class_id: str) -> float:
        raise NotImplementedError

    def log_successor(self, history: str, successor: str) -> float:
        return math.log(self.successor_prob(history, successor))

    def log_membership(self, word: str, class_id: str) -> float:
        p = self.membership_prob(word, class_id)
        if p <= 0.0:
            raise LMError(f"word {word!r} has no membership mass in class {class_id!r}")
        return math.log(p)

    def sequence_log_prob(self, tokens: list[str]) -> float:
        total = 0.0
        history = START_CLASS
        for word in tokens:
            cid = self.lexicon.class_id_of(word)
            total += self.log_successor(history, cid)
            total += self.log_membership(word, cid)
            history = cid
        total += self.log_successor(history, END_CLASS)
        return total


class ClassBigramLM(_ScoringMixin):
    """P(c2|c1) = lambda*ML_bigram + (1-lambda)*smoothed_unigram.

    The unigram component mixes the ML unigram with a uniform distribution
    at exactly the weight needed to make the floor guarantee hold, so each
    history row sums to one.  lambda=1 is the unsmoothed ML special case:
    rows are pure ML with a floor guard on zero-count lookups, and the
    exact-normalization guarantee does not apply to it.
    """

    def __init__(self, lexicon: Lexicon, counts: BigramCounts, config: LMConfig):
        config.validate()
        self.lexicon = lexicon
        self.counts = counts
        self.config = config
        self.successors: tuple[str, ...] = tuple(
            sorted(list(lexicon.classes) + [OOV_CLASS_ID]) + [END_CLASS])
        self._index = set(self.successors)
        k = len(self.successors)
        total = sum(counts.unigram.values())
        lam = config.interpolation
        if lam < 1.0:
            eta = config.floor * k / (1.0 - lam)
            if eta > 1.0:
                raise LMError(f"floor {config.floor} too large for lambda {lam} "
                              f"with {k} classes")
        else:
            eta = 0.0
        self._uni: dict[str, float] = {}
        for cid in self.successors:
            ml = counts.unigram.get(cid, 0) / total
            self._uni[cid] = (1.0 - eta) * ml + eta / k
        self._row_totals = {h: sum(row.values()) for h, row in counts.bigram.items()}
        self._membership_cache: dict[str, dict[str, float]] = {}

    def successor_prob(self, history: str, successor: str) -> float:
        if successor not in self._index:
            raise LMError(f"unknown successor class {successor!r}")
        lam = self.config.interpolation
        row = self.counts.bigram.get(history)
        if lam == 1.0:
            if row is None:
                return max(self._uni[successor], self.config.floor)
            return max(row.get(successor, 0) / self._row_totals[history],
                       self.config.floor)
        u = self._uni[successor]
        if row is None:
            return u
        ml = row.get(successor, 0) / self._row_totals[history]
        return lam * ml + (1.0 - lam) * u

    def _membership_row(self, class_id: str) -> dict[str, float]:
        cached = self._membership_cache.get(class_id)
        if cached is not None:
            return cached
        members = self.lexicon.members_of(class_id)
        seen = self.counts.membership.get(class_id, {})
        total = sum(seen.values())
        mu = self.config.membership_weight
        row: dict[str, float] = {}
        for word in members:
            if len(members) == 1:
                row[word] = 1.0
            elif total == 0:
                row[word] = 1.0 / len(members)
            else:
                row[word] = mu * seen.get(word, 0) / total + (1.0 - mu) / len(members)
        self._membership_cache[class_id] = row
        return row

    def membership_prob(self, word: str, class_id: str) -> float:
        if class_id == OOV_CLASS_ID:
            return 1.0
        row = self._membership_row(class_id)
        if word not in row:
            raise LMError(f"word {word!r} is not a member of class {class_id!r}")
        return row[word]


class MixtureLM(_ScoringMixin):
    """Convex combination of two models sharing a lexicon (used per state)."""

    def __init__(self, primary: _ScoringMixin, backoff: _ScoringMixin, weight: float):
        if not 0.0 <= weight <= 1.0:
            raise LMError("mixture weight outside [0, 1]")
        self.lexicon = primary.lexicon
        self.primary = primary
        self.backoff = backoff
        self.weight = weight

    def successor_prob(self, history: str, successor: str) -> float:
        w = self.weight
        return (w * self.primary.successor_prob(history, successor)
                + (1.0 - w) * self.backoff.successor_prob(history, successor))

    def membership_prob(self, word: str, class_id: str) -> float:
        w = self.weight
        return (w * self.primary.membership_prob(word, class_id)
                + (1.0 - w) * self.backoff.membership_prob(word, class_id))


@dataclass
class DialogueLMFamily:
    global_lm: ClassBigramLM
    per_state: dict[str, MixtureLM] = field(default_factory=dict)

    def select_lm(self, state_tag: str) -> _ScoringMixin:
        return self.per_state.get(state_tag, self.global_lm)


def train_class_bigram(corpus: list[list[str]], lexicon: Lexicon,
                       config: LMConfig | None = None) -> ClassBigramLM:
    config = config or LMConfig()
    return ClassBigramLM(lexicon, count_corpus(corpus, lexicon), config)


def train_dialogue_family(tagged_corpus: list[tuple[str, list[str]]], lexicon: Lexicon,
                          config: LMConfig | None = None) -> DialogueLMFamily:
    config = config or LMConfig()
    if not tagged_corpus:
        raise LMError("empty tagged corpus")
    global_lm = train_class_bigram([s for _, s in tagged_corpus], lexicon, config)
    by_tag: dict[str, list[list[str]]] = {}
    for tag, sentence in tagged_corpus:
        by_tag.setdefault(tag, []).append(sentence)
    per_state: dict[str, MixtureLM] = {}
    for tag in sorted(by_tag):
        sentences = by_tag[tag]
        if len(sentences) < config.min_state_sentences:
            continue
        state_lm = train_class_bigram(sentences, lexicon, config)
        per_state[tag] = MixtureLM(state_lm, global_lm, config.state_mix)
    return DialogueLMFamily(global_lm=global_lm, per_state=per_state)


def select_lm(family: DialogueLMFamily, state_tag: str) -> _ScoringMixin:
    return family.select_lm(state_tag)


def perplexity(lm: _ScoringMixin, corpus: list[list[str]]) -> float:
    if not corpus:
        raise LMError("perplexity of an empty corpus is undefined")
    total = 0.0
    tokens = 0
    for sentence in corpus:
        total += lm.sequence_log_prob(sentence)
        tokens += len(sentence) + 1  # end boundary counts as a position
    return math.exp(-total / tokens)


def grid_search_lambda(train_corpus: list[list[str]], heldout: list[list[str]],
                       lexicon: Lexicon, config: LMConfig | None = None,
                       grid: tuple[float, ...] = (0.1, 0.2, 0.3, 0.4, 0.5,
                                                  0.6, 0.7, 0.8, 0.9),
                       ) -> tuple[float, dict[float, float]]:
    """Pick the interpolation weight minimizing held-out perplexity."""
    config = config or LMConfig()
    counts = count_corpus(train_corpus, lexicon)
    scores: dict[float, float] = {}
    for lam in grid:
        candidate = ClassBigramLM(
            lexicon, counts,
            LMConfig(interpolation=lam, floor=config.floor,
                     membership_weight=config.membership_weight,
                     state_mix=config.state_mix,
                     min_state_sentences=config.min_state_sentences))
        scores[lam] = perplexity(candidate, heldout)
    best = min(scores, key=lambda lam: (scores[lam], lam))
    return best, scores


def _config_dict(config: LMConfig) -> dict:
    return {
        "interpolation": config.interpolation,
        "floor": config.floor,
        "membership_weight": config.membership_weight,
        "state_mix": config.state_mix,
        "min_state_sentences": config.min_state_sentences,
    }


def _counts_dict(counts: BigramCounts) -> dict:
    return {
        "sentences": counts.sentences,
        "unigram": counts.unigram,
        "bigram": counts.bigram,
        "membership": counts.membership,
    }


def _counts_from_dict(payload: dict) -> BigramCounts:
    return BigramCounts(
        sentences=payload["sentences"],
        unigram=dict(payload["unigram"]),
        bigram={h: dict(row) for h, row in payload["bigram"].items()},
        membership={c: dict(row) for c, row in payload["membership"].items()},
    )


def save_family(family: DialogueLMFamily, path) -> None:
    payload = {
        "format_version": FORMAT_VERSION,
        "kind": "dialogue_family",
        "config": _config_dict(family.global_lm.config),
        "lexicon_checksum": family.global_lm.lexicon.checksum(),
        "global": _counts_dict(family.global_lm.counts),
        "states": {tag: _counts_dict(mix.primary.counts)
                   for tag, mix in sorted(family.per_state.items())},
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True)


def load_family(path, lexicon: Lexicon) -> DialogueLMFamily:
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("format_version") != FORMAT_VERSION:
        raise LMError(f"unsupported model format {payload.get('format_version')!r}")
    if payload.get("kind") != "dialogue_family":
        raise LMError(f"unexpected model kind {payload.get('kind')!r}")
    if payload["lexicon_checksum"] != lexicon.checksum():
        raise LMError("model was trained against a different lexicon")
    cfg = payload["config"]
    config = LMConfig(interpolation=cfg["interpolation"], floor=cfg["floor"],
                      membership_weight=cfg["membership_weight"],
                      state_mix=cfg["state_mix"],
                      min_state_sentences=cfg["min_state_sentences"])
    global_lm = ClassBigramLM(lexicon, _counts_from_dict(payload["global"]), config)
    per_state = {}
    for tag, counts in payload["states"].items():
        state_lm = ClassBigramLM(lexicon, _counts_from_dict(counts), config)
        per_state[tag] = MixtureLM(state_lm, global_lm, config.state_mix)
    return DialogueLMFamily(global_lm=global_lm, per_state=per_state)
