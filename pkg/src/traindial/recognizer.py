"""Seeded noisy channel over word confusion networks plus LM-guided decoding.

The channel replaces an acoustic front-end at the word level: a reference
sentence becomes a sequence of slots, each holding scored alternative words
(epsilon marks a possible deletion; extra slots marked as insertions may
appear between words).  Decoding searches the network slot-synchronously
with a class-bigram LM in continuous mode, or collapses it to one word from
a restricted vocabulary in isolated mode.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field

from .lexicon import Lexicon
from .lm import _ScoringMixin, END_CLASS, START_CLASS

EPS = "<eps>"

# Channel score ladders (log space). The true word is always present in its
# slot; corruption events only demote it.
_CORRECT_TOP = math.log(0.85)
_SUB_CONF = math.log(0.60)
_SUB_TRUE = math.log(0.25)
_DEL_EPS = math.log(0.60)
_DEL_TRUE = math.log(0.25)
_INS_WORD = math.log(0.55)
_INS_EPS = math.log(0.45)
_REST_MASS = 0.15


class RecognizerError(Exception):
    """Raised for invalid noise configs, bad networks, or bad predictions."""


class DecodeFailure(Exception):
    """Recognition failure: no admissible path or no evidence at all."""


@dataclass(frozen=True)
class NoiseConfig:
    p_sub: float = 0.0
    p_del: float = 0.0
    p_ins: float = 0.0
    max_alternatives: int = 4

    def validate(self) -> None:
        for name in ("p_sub", "p_del", "p_ins"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise RecognizerError(f"{name}={p} outside [0, 1]")
        if self.p_sub + self.p_del > 1.0:
            raise RecognizerError("p_sub + p_del exceeds 1")
        if self.max_alternatives < 1:
            raise RecognizerError("max_alternatives must be >= 1")
        if self.max_alternatives < 2 and (self.p_sub > 0.0 or self.p_del > 0.0):
            # corruption must keep the true word in its slot alongside the
            # corrupted top alternative, which needs room for two
            raise RecognizerError("max_alternatives must be >= 2 when "
                                  "p_sub or p_del is nonzero")

    @property
    def silent(self) -> bool:
        return self.p_sub == 0.0 and self.p_del == 0.0 and self.p_ins == 0.0


@dataclass(frozen=True)
class Slot:
    alternatives: tuple[tuple[str, float], ...]  # (word or EPS, log score)
    inserted: bool = False

    def words(self) -> tuple[str, ...]:
        return tuple(w for w, _ in self.alternatives)


@dataclass
class ConfusionNetwork:
    slots: list[Slot]
    seed: int = 0
    reference: tuple[str, ...] | None = None


@dataclass
class DecodeResult:
    words: tuple[str, ...]
    total_log_score: float
    per_word_scores: tuple[float, ...]
    boundary_log_score: float  # end transition plus channel mass of epsilon slots
    mode: str  # "continuous" | "isolated"


def edit_distance(a: str, b: str) -> int:
    if not a:
        return len(b)
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def edit_similarity(a: str, b: str) -> float:
    if not a and not b:
        return 1.0
    return 1.0 - edit_distance(a, b) / max(len(a), len(b))


class ConfusabilityIndex:
    """Per-lexicon cache of each word's most similar in-vocabulary words."""

    def __init__(self, lexicon: Lexicon):
        self.lexicon = lexicon
        self._vocab = sorted(lexicon.words)
        self._cache: dict[str, list[tuple[str, float]]] = {}

    def top(self, word: str, k: int) -> list[tuple[str, float]]:
        ranked = self._cache.get(word)
        if ranked is None:
            ranked = [(w, edit_similarity(word, w)) for w in self._vocab if w != word]
            ranked.sort(key=lambda pair: (-pair[1], pair[0]))
            ranked = [pair for pair in ranked if pair[1] > 0.0][:32]
            self._cache[word] = ranked
        return ranked[:k]


def _shared_rest(confusables: list[tuple[str, float]]) -> list[tuple[str, float]]:
    total = sum(sim for _, sim in confusables)
    if total <= 0.0:
        return []
    return [(w, math.log(_REST_MASS * sim / total)) for w, sim in confusables]


def corrupt(reference: list[str], noise: NoiseConfig, seed: int, lexicon: Lexicon,
            index: ConfusabilityIndex | None = None) -> ConfusionNetwork:
    """Deterministically corrupt a reference sentence into a confusion network."""
    noise.validate()
    ref = tuple(reference)
    if noise.silent:
        slots = [Slot(alternatives=((w, 0.0),)) for w in ref]
        return ConfusionNetwork(slots=slots, seed=seed, reference=ref)
    index = index or ConfusabilityIndex(lexicon)
    rng = random.Random(seed)
    vocab = index._vocab
    slots: list[Slot] = []

    def maybe_insert() -> None:
        if rng.random() < noise.p_ins:
            word = vocab[rng.randrange(len(vocab))]
            slots.append(Slot(alternatives=((word, _INS_WORD), (EPS, _INS_EPS)),
                              inserted=True))

    for word in ref:
        maybe_insert()
        u = rng.random()
        extra = noise.max_alternatives - 2
        if u < noise.p_sub:
            confusables = index.top(word, max(1, extra + 1))
            if confusables:
                top, rest = confusables[0], confusables[1:]
                alts = [(top[0], _SUB_CONF), (word, _SUB_TRUE)]
                alts.extend(_shared_rest(rest))
            else:
                alts = [(word, _CORRECT_TOP)]
        elif u < noise.p_sub + noise.p_del:
            alts = [(EPS, _DEL_EPS), (word, _DEL_TRUE)]
            alts.extend(_shared_rest(index.top(word, max(0, extra)))[:max(0, extra)])
        else:
            alts = [(word, _CORRECT_TOP)]
            alts.extend(_shared_rest(index.top(word, max(0, extra + 1)))
                        [:max(0, noise.max_alternatives - 1)])
        slots.append(Slot(alternatives=tuple(alts)))
    maybe_insert()
    return ConfusionNetwork(slots=slots, seed=seed, reference=ref)


def decode_continuous(cn: ConfusionNetwork, lm: _ScoringMixin,
                      constraint: set[str] | None = None,
                      class_bonus: dict[str, float] | None = None,
                      alpha: float = 1.0) -> DecodeResult:
    """Argmax path by dynamic programming over (slot, LM history class).

    Ties on total score resolve to the lexicographically smallest emitted
    word sequence.  Raises DecodeFailure when constraint pruning empties a
    slot that has no epsilon escape.
    """
    if not cn.slots:
        raise RecognizerError("empty confusion network")
    lexicon = lm.lexicon
    bonus = class_bonus or {}

    pruned: list[tuple[tuple[str, float], ...]] = []
    for slot in cn.slots:
        kept = tuple((w, s) for w, s in slot.alternatives
                     if w == EPS or constraint is None or w in constraint)
        if not kept:
            raise DecodeFailure("constraint pruning emptied a slot")
        pruned.append(kept)

    # state: history class -> (score, {(emitted words, per-slot choices)})
    states: dict[str, tuple[float, set[tuple[tuple[str, ...], tuple[int, ...]]]]]
    states = {START_CLASS: (0.0, {((), ())})}
    for kept in pruned:
        nxt: dict[str, tuple[float, set]] = {}
        for history, (score, paths) in states.items():
            for alt_idx, (word, channel) in enumerate(kept):
                if word == EPS:
                    step, new_history, emit = channel, history, None
                else:
                    cid = lexicon.class_id_of(word)
                    step = channel + alpha * (lm.log_successor(history, cid)
                                              + lm.log_membership(word, cid))
                    step += bonus.get(cid, 0.0)
                    new_history, emit = cid, word
                cand = score + step
                cur = nxt.get(new_history)
                if cur is None or cand > cur[0]:
                    nxt[new_history] = (cand, {
                        (words + (emit,) if emit else words, choices + (alt_idx,))
                        for words, choices in paths})
                elif cand == cur[0]:
                    cur[1].update(
                        (words + (emit,) if emit else words, choices + (alt_idx,))
                        for words, choices in paths)
        states = nxt

    best_total: float | None = None
    candidates: set[tuple[tuple[str, ...], tuple[int, ...]]] = set()
    for history, (score, paths) in states.items():
        total = score + alpha * lm.log_successor(history, END_CLASS)
        if best_total is None or total > best_total:
            best_total, candidates = total, set(paths)
        elif total == best_total:
            candidates.update(paths)
    assert best_total is not None
    words, choices = min(candidates)

    # Attribute scores along the winning path: epsilon channel mass and the
    # end transition land in the boundary term.
    per_word: list[float] = []
    boundary = 0.0
    history = START_CLASS
    for kept, alt_idx in zip(pruned, choices):
        word, channel = kept[alt_idx]
        if word == EPS:
            boundary += channel
            continue
        cid = lexicon.class_id_of(word)
        step = channel + alpha * (lm.log_successor(history, cid)
                                  + lm.log_membership(word, cid))
        step += bonus.get(cid, 0.0)
        per_word.append(step)
        history = cid
    boundary += alpha * lm.log_successor(history, END_CLASS)
    return DecodeResult(words=words, total_log_score=best_total,
                        per_word_scores=tuple(per_word),
                        boundary_log_score=boundary, mode="continuous")


def _slot_evidence(slot: Slot, word: str) -> float:
    """Channel evidence a slot lends to a vocabulary word (linear space)."""
    best_alt: tuple[str, float] | None = None
    for alt, score in slot.alternatives:
        if alt == word:
            return math.exp(score)
        if alt != EPS and (best_alt is None or score > best_alt[1]):
            best_alt = (alt, score)
    if best_alt is None:
        return 0.0
    return edit_similarity(word, best_alt[0]) * math.exp(best_alt[1])


def decode_isolated(cn: ConfusionNetwork, vocabulary: set[str]) -> DecodeResult:
    """Best single vocabulary word by summed channel evidence across slots."""
    if not vocabulary:
        raise RecognizerError("empty isolated-mode vocabulary")
    if not cn.slots:
        raise RecognizerError("empty confusion network")
    best: tuple[float, str] | None = None
    for word in sorted(vocabulary):
        evidence = sum(_slot_evidence(slot, word) for slot in cn.slots)
        if evidence > 0.0 and (best is None or evidence > best[0]):
            best = (evidence, word)
    if best is None:
        raise DecodeFailure("no vocabulary word has any channel evidence")
    evidence, word = best
    score = math.log(evidence)
    return DecodeResult(words=(word,), total_log_score=score,
                        per_word_scores=(score,), boundary_log_score=0.0,
                        mode="isolated")


@dataclass(frozen=True)
class PredictionSet:
    """The dialogue manager's forecast for the next user turn."""

    state_tag: str = ""
    predicted_classes: tuple[str, ...] = ()
    hard_constraint: bool = False  # True for isolated-mode acquisitions
    class_log_bonus: float = 0.0   # soft per-class bonus for continuous mode


def apply_predictions(family, predictions: PredictionSet,
                      ) -> tuple[_ScoringMixin, set[str] | None, dict[str, float]]:
    """Turn predictions into (LM choice, hard vocabulary, soft bonus table)."""
    lm = family.select_lm(predictions.state_tag)
    lexicon = family.global_lm.lexicon
    for cid in predictions.predicted_classes:
        if cid not in lexicon.classes:
            raise RecognizerError(f"prediction names unknown class {cid!r}")
    bonus = {}
    if predictions.class_log_bonus:
        bonus = {cid: predictions.class_log_bonus
                 for cid in predictions.predicted_classes}
    constraint: set[str] | None = None
    if predictions.hard_constraint:
        constraint = set()
        for cid in predictions.predicted_classes:
            constraint.update(lexicon.members_of(cid))
    return lm, constraint, bonus


def save_network(cn: ConfusionNetwork, path) -> None:
    """Line format: ``slot_index alt_word log_score [INS]``; # comments."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# seed {cn.seed}\n")
        if cn.reference is not None:
            fh.write(f"# reference {' '.join(cn.reference)}\n")
        for i, slot in enumerate(cn.slots):
            for word, score in slot.alternatives:
                mark = " INS" if slot.inserted else ""
                fh.write(f"{i} {word} {score!r}{mark}\n")


def load_network(path) -> ConfusionNetwork:
    seed = 0
    reference: tuple[str, ...] | None = None
    rows: dict[int, tuple[list[tuple[str, float]], bool]] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if line.startswith("#"):
                body = line[1:].strip()
                if body.startswith("seed "):
                    seed = int(body[5:])
                elif body.startswith("reference "):
                    reference = tuple(body[10:].split())
                continue
            parts = line.split()
            if len(parts) not in (3, 4) or (len(parts) == 4 and parts[3] != "INS"):
                raise RecognizerError(f"{path}:{lineno}: malformed network line")
            idx = int(parts[0])
            alts, inserted = rows.setdefault(idx, ([], False))
            alts.append((parts[1], float(parts[2])))
            rows[idx] = (alts, inserted or len(parts) == 4)
    if not rows:
        raise RecognizerError(f"{path}: empty confusion network file")
    if sorted(rows) != list(range(len(rows))):
        raise RecognizerError(f"{path}: slot indices are not contiguous from 0")
    slots = [Slot(alternatives=tuple(rows[i][0]), inserted=rows[i][1])
             for i in range(len(rows))]
    return ConfusionNetwork(slots=slots, seed=seed, reference=reference)
