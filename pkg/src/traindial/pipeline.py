"""End-to-end turn pipeline: corrupt, decode, parse, interpret, respond.

A SessionRunner owns one dialogue. Each user turn flows through the
simulated channel (unless a prebuilt confusion network is supplied), is
decoded under the language model the dialogue expectations select, parsed
into a case frame, and handed to the dialogue manager, which produces the
next system act and expectation. Every turn yields a TurnRecord snapshot
used by the evaluation harness and the HTTP service.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from . import data
from .dialogue import (DialogueAct, DialogueConfig, Expectation,
                       interpret, next_turn, start_session)
from .grammar import SemanticGrammar, load_grammar
from .lexicon import Lexicon, load_lexicon, tokenize
from .lm import DialogueLMFamily, LMConfig, train_dialogue_family
from .parsing import parse_utterance, render_value
from .recognizer import (ConfusabilityIndex, ConfusionNetwork, DecodeFailure,
                         NoiseConfig, PredictionSet, apply_predictions,
                         corrupt, decode_continuous, decode_isolated)
from .timetable import Timetable, load_timetable

NOISE_TARGETS = ("all", "date_time")


class PipelineError(Exception):
    pass


@dataclass(frozen=True)
class SystemStack:
    """Shared immutable resources: one stack serves many sessions."""

    lexicon: Lexicon
    grammar: SemanticGrammar
    family: DialogueLMFamily
    timetable: Timetable
    index: ConfusabilityIndex


def load_tagged_corpus(path) -> list[tuple[str, list[str]]]:
    corpus = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tag, text = line.split("\t", 1)
            corpus.append((tag, text.split()))
    return corpus


def load_default_stack(lm_config: LMConfig | None = None) -> SystemStack:
    """Build the stack from the packaged lexicon, grammar, and corpus."""
    lexicon = load_lexicon(data.LEXICON_PATH)
    grammar = load_grammar(data.GRAMMAR_PATH)
    timetable = load_timetable(data.TIMETABLE_PATH, lexicon)
    corpus = load_tagged_corpus(data.TAGGED_CORPUS_PATH)
    family = train_dialogue_family(corpus, lexicon, lm_config or LMConfig())
    return SystemStack(lexicon=lexicon, grammar=grammar, family=family,
                       timetable=timetable, index=ConfusabilityIndex(lexicon))


@dataclass
class TurnRecord:
    turn_index: int
    user_text: str | None
    reference_tokens: tuple[str, ...]
    hypothesis_tokens: tuple[str, ...]
    decode_ok: bool
    decode_mode: str              # continuous | isolated | none
    lm_state_tag: str             # "" means the global model
    expectation_tag: str          # dialogue expectation active for this turn
    noise_applied: bool
    symptom: str | None
    user_speech_act: str | None
    system_act_type: str
    system_text: str
    system_referenced_slots: tuple[str, ...]
    next_state_tag: str
    slots: dict
    phase: str
    outcome: str
    # pipeline intermediates, serialized so clients never recompute them
    network: list | None = None     # per slot: {"alternatives", "inserted"}
    concepts: tuple = ()            # resolved concepts with spans and scores
    frame: dict | None = None       # case frame the dialogue manager saw

    def to_dict(self) -> dict:
        return {
            "turn_index": self.turn_index,
            "user_text": self.user_text,
            "reference_tokens": list(self.reference_tokens),
            "hypothesis_tokens": list(self.hypothesis_tokens),
            "decode_ok": self.decode_ok,
            "decode_mode": self.decode_mode,
            "lm_state_tag": self.lm_state_tag,
            "expectation_tag": self.expectation_tag,
            "noise_applied": self.noise_applied,
            "symptom": self.symptom,
            "user_speech_act": self.user_speech_act,
            "system_act_type": self.system_act_type,
            "system_text": self.system_text,
            "system_referenced_slots": list(self.system_referenced_slots),
            "next_state_tag": self.next_state_tag,
            "slots": self.slots,
            "phase": self.phase,
            "outcome": self.outcome,
            "network": self.network,
            "concepts": list(self.concepts),
            "frame": self.frame,
        }


class SessionRunner:
    """One dialogue driven turn by turn through the full pipeline."""

    def __init__(self, stack: SystemStack,
                 dialogue_config: DialogueConfig | None = None,
                 noise: NoiseConfig | None = None, seed: int = 0,
                 noise_target: str = "all", use_dialogue_lm: bool = True,
                 class_bonus: float = 0.0, alpha: float = 1.0):
        if noise_target not in NOISE_TARGETS:
            raise PipelineError(f"unknown noise target {noise_target!r}")
        self.stack = stack
        self.noise = noise or NoiseConfig(0.0, 0.0, 0.0)
        self.noise.validate()
        self.noise_target = noise_target
        self.use_dialogue_lm = use_dialogue_lm
        self.class_bonus = class_bonus
        self.alpha = alpha
        self._rng = random.Random(seed)
        self.seed = seed
        config = dialogue_config or DialogueConfig()
        self.state, act, expectation = start_session(config)
        self.records: list[TurnRecord] = [self._record(
            user_text=None, reference=(), hypothesis=(), decode_ok=True,
            mode="none", lm_tag="", expectation_tag="", noise_applied=False,
            symptom=None, user_act=None, act=act)]

    # ------------------------------------------------------------------

    @property
    def expectation(self) -> Expectation:
        return self.state.expectations

    @property
    def closed(self) -> bool:
        return self.state.outcome != "open"

    def _record(self, *, user_text, reference, hypothesis, decode_ok, mode,
                lm_tag, expectation_tag, noise_applied, symptom, user_act,
                act: DialogueAct, network=None, concepts=(),
                frame=None) -> TurnRecord:
        return TurnRecord(
            turn_index=len(getattr(self, "records", ())),
            user_text=user_text,
            reference_tokens=tuple(reference),
            hypothesis_tokens=tuple(hypothesis),
            decode_ok=decode_ok,
            decode_mode=mode,
            lm_state_tag=lm_tag,
            expectation_tag=expectation_tag,
            noise_applied=noise_applied,
            symptom=symptom,
            user_speech_act=user_act,
            system_act_type=act.act_type,
            system_text=act.text,
            system_referenced_slots=tuple(act.referenced_slots),
            next_state_tag=self.state.expectations.state_tag,
            slots=self.state.slot_view(),
            phase=self.state.phase,
            outcome=self.state.outcome,
            network=network,
            concepts=tuple(concepts),
            frame=frame)

    def _turn_noise(self, expectation_tag: str) -> tuple[NoiseConfig, bool]:
        if self.noise.silent:
            return self.noise, False
        if self.noise_target == "date_time" \
                and expectation_tag not in ("ask_date", "ask_time"):
            return NoiseConfig(0.0, 0.0, 0.0), False
        return self.noise, True

    def step(self, text: str | None = None,
             network: ConfusionNetwork | None = None,
             force_decode_failure: bool = False) -> TurnRecord:
        """Process one user turn given as text or as a confusion network."""
        if self.closed:
            raise PipelineError("session already closed")
        if (text is None) == (network is None) and not force_decode_failure:
            raise PipelineError("provide exactly one of text or network")
        expectation = self.state.expectations
        turn_seed = self._rng.randrange(1 << 30)

        reference: tuple[str, ...] = ()
        noise_applied = False
        if network is None and not force_decode_failure:
            reference = tuple(tokenize(text, self.stack.lexicon))
            noise, noise_applied = self._turn_noise(expectation.state_tag)
            network = corrupt(list(reference), noise, turn_seed,
                              self.stack.lexicon, self.stack.index)
        elif network is not None and network.reference:
            reference = tuple(network.reference)

        hypothesis: tuple[str, ...] = ()
        decode_ok = False
        mode = "none"
        lm_tag = ""
        if not force_decode_failure:
            try:
                if self.state.isolated_mode:
                    vocabulary = set()
                    for cid in expectation.predicted_classes:
                        vocabulary.update(self.stack.lexicon.members_of(cid))
                    result = decode_isolated(network, vocabulary)
                else:
                    predictions = PredictionSet(
                        state_tag=(expectation.state_tag
                                   if self.use_dialogue_lm else ""),
                        predicted_classes=expectation.predicted_classes,
                        hard_constraint=False,
                        class_log_bonus=self.class_bonus)
                    lm, constraint, bonus = apply_predictions(
                        self.stack.family, predictions)
                    lm_tag = (expectation.state_tag
                              if self.use_dialogue_lm
                              and expectation.state_tag in self.stack.family.per_state
                              else "")
                    result = decode_continuous(network, lm,
                                               constraint=constraint,
                                               class_bonus=bonus,
                                               alpha=self.alpha)
                hypothesis = result.words
                mode = result.mode
                decode_ok = True
            except DecodeFailure:
                decode_ok = False

        frame = None
        user_act = None
        concept_rows: list[dict] = []
        frame_view = None
        if decode_ok:
            parsed = parse_utterance(list(hypothesis), self.stack.grammar,
                                     self.stack.lexicon)
            frame = parsed.frame
            user_act = frame.speech_act
            concept_rows = [{"kind": c.kind, "value": render_value(c.value),
                             "span": [c.span[0], c.span[1]],
                             "score": c.score} for c in frame.concepts]
            frame_view = {"speech_act": frame.speech_act,
                          "slots": frame.slot_view(),
                          "residue": [[i, j] for i, j in frame.residue]}
        analysis = interpret(self.state, frame, decode_ok)
        self.state, act, _expectation = next_turn(self.state, analysis,
                                                  self.stack.timetable)
        network_rows = None
        if network is not None:
            network_rows = [{"alternatives": [[w, s] for w, s in
                                              slot.alternatives],
                             "inserted": slot.inserted}
                            for slot in network.slots]
        record = self._record(
            user_text=text, reference=reference, hypothesis=hypothesis,
            decode_ok=decode_ok, mode=mode, lm_tag=lm_tag,
            expectation_tag=expectation.state_tag, noise_applied=noise_applied,
            symptom=analysis.symptom, user_act=user_act, act=act,
            network=network_rows, concepts=concept_rows, frame=frame_view)
        self.records.append(record)
        return record

    def transcript(self) -> list[dict]:
        return [r.to_dict() for r in self.records]
