"""Recognition and dialogue metrics plus the seeded trial harness.

Word accuracy is computed corpus-level from minimum-cost word alignments
(substitution, deletion, insertion all cost one). Sentence understanding
compares the case frame parsed from the decoded hypothesis against the
frame parsed from the clean reference. Dialogue outcomes are classified
against the scenario ground truth: S (exact answer), SC (answer after the
system relaxed date or time), SF (failed or answered wrongly), and UF
(failed with an uncooperative user). Trials are fully seeded and their
reports are byte-stable across runs.
"""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass
from pathlib import Path

from .dialogue import DialogueConfig, DialogueState
from .parsing import CaseFrame, parse_utterance
from .pipeline import SessionRunner, SystemStack, TurnRecord
from .recognizer import NoiseConfig, edit_distance
from .simulate import PERSONAS, Scenario, UserSimulator

OUTCOMES = ("S", "SC", "SF", "UF")


def alignment_counts(reference, hypothesis) -> tuple[int, int, int, int]:
    """(reference length, substitutions, deletions, insertions).

    One minimum-cost alignment; ties prefer substitution, then deletion.
    """
    n, m = len(reference), len(hypothesis)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(1, n + 1):
        dp[i][0] = i
    for j in range(1, m + 1):
        dp[0][j] = j
    for i in range(1, n + 1):
        for j in range(1, m + 1):
            dp[i][j] = min(dp[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]),
                           dp[i - 1][j] + 1, dp[i][j - 1] + 1)
    subs = dels = ins = 0
    i, j = n, m
    while i > 0 or j > 0:
        if i > 0 and j > 0 \
                and dp[i][j] == dp[i - 1][j - 1] + (reference[i - 1] != hypothesis[j - 1]):
            subs += reference[i - 1] != hypothesis[j - 1]
            i, j = i - 1, j - 1
        elif i > 0 and dp[i][j] == dp[i - 1][j] + 1:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return n, subs, dels, ins


def word_accuracy(pairs) -> float:
    """Corpus-level (N - S - D - I) / N over (reference, hypothesis) pairs."""
    total_ref = 0
    total_err = 0
    for reference, hypothesis in pairs:
        total_ref += len(reference)
        total_err += edit_distance(list(reference), list(hypothesis))
    if total_ref == 0:
        return 1.0 if total_err == 0 else 0.0
    return (total_ref - total_err) / total_ref


def frame_signature(frame: CaseFrame) -> tuple:
    rendered = []
    for kind, value in sorted(frame.slots.items()):
        rendered.append((kind, value.render() if hasattr(value, "render")
                         else str(value)))
    return frame.speech_act, tuple(rendered)


def sentence_understanding(gold: CaseFrame, hypothesis: CaseFrame) -> bool:
    return frame_signature(gold) == frame_signature(hypothesis)


def su_partial(gold: CaseFrame, hypothesis: CaseFrame) -> float:
    """Fraction of gold frame elements (slots plus act) that match."""
    gold_act, gold_slots = frame_signature(gold)
    hyp_act, hyp_slots = frame_signature(hypothesis)
    total = len(gold_slots) + 1
    hit = int(gold_act == hyp_act) + len(set(gold_slots) & set(hyp_slots))
    return hit / total


def classify_dialogue(state: DialogueState, scenario: Scenario,
                      persona: str = "cooperative") -> str:
    """Scenario-truth outcome: the system answered correctly, answered a
    relaxed variant, failed, or failed against an uncooperative user."""
    if state.outcome in ("S", "SC"):
        slots = state.slots
        matches = {
            "departure": slots["departure"].value == scenario.departure,
            "arrival": slots["arrival"].value == scenario.arrival,
            "date": slots["date"].value == scenario.date_value,
            "time": slots["time"].value == scenario.time_value,
        }
        relaxed = set(state.relaxed)
        if not relaxed and all(matches.values()):
            return "S"
        if relaxed and relaxed <= {"date", "time"} \
                and matches["departure"] and matches["arrival"] \
                and all(matches[s] for s in ("date", "time") if s not in relaxed):
            return "SC"
        return "SF"
    return "UF" if persona == "off_task" else "SF"


def recovery_metrics(records: list[TurnRecord]) -> tuple[float, float]:
    """(implicit, explicit) recovery shares among misunderstood turns.

    A user-initiated repair or inconsistency arriving while the system was
    explicitly confirming counts as an explicitly mediated recovery; one
    arriving anywhere else was triggered by implicit confirmation feedback.
    """
    misunderstood = [r for r in records if r.symptom is not None]
    if not misunderstood:
        return 0.0, 0.0
    repairs = [r for r in misunderstood
               if r.symptom in ("user_initiated_repair", "inconsistency")]
    explicit = sum(1 for r in repairs if r.expectation_tag == "confirm_slot")
    implicit = len(repairs) - explicit
    return implicit / len(misunderstood), explicit / len(misunderstood)


# ----------------------------------------------------------------- trials

@dataclass(frozen=True)
class TrialConfig:
    n_dialogues: int = 100
    persona: str = "cooperative"  # a persona name, or "mixed"
    p_sub: float = 0.0
    p_del: float = 0.0
    p_ins: float = 0.0
    noise_target: str = "all"
    use_dialogue_lm: bool = True
    class_bonus: float = 0.0
    master_seed: int = 0
    max_sim_turns: int = 40

    def noise(self) -> NoiseConfig:
        return NoiseConfig(self.p_sub, self.p_del, self.p_ins)


def run_dialogue(stack: SystemStack, scenario: Scenario, persona: str,
                 config: TrialConfig, runner_seed: int, sim_seed: int,
                 dialogue_config: DialogueConfig | None = None,
                 ) -> tuple[SessionRunner, list[dict]]:
    """Drive one simulated dialogue to completion; returns utterance rows."""
    runner = SessionRunner(stack, dialogue_config=dialogue_config,
                           noise=config.noise(), seed=runner_seed,
                           noise_target=config.noise_target,
                           use_dialogue_lm=config.use_dialogue_lm,
                           class_bonus=config.class_bonus)
    sim = UserSimulator(scenario, persona=persona, seed=sim_seed)
    rows = []
    turns = 0
    while not runner.closed and turns < config.max_sim_turns:
        last = runner.records[-1]
        text, tags = sim.respond(last.system_act_type,
                                 last.system_referenced_slots,
                                 slots_view=last.slots,
                                 isolated=runner.state.isolated_mode)
        record = runner.step(text)
        gold = parse_utterance(list(record.reference_tokens), stack.grammar,
                               stack.lexicon).frame
        if record.decode_ok:
            hyp_frame = parse_utterance(list(record.hypothesis_tokens),
                                        stack.grammar, stack.lexicon).frame
            su_exact = sentence_understanding(gold, hyp_frame)
            su_part = su_partial(gold, hyp_frame)
        else:
            # a decode failure conveys nothing: right only if the clean
            # utterance also carried nothing
            empty_gold = frame_signature(gold) == ("empty", ())
            su_exact = empty_gold
            su_part = 1.0 if empty_gold else 0.0
        n, subs, dels, ins = alignment_counts(record.reference_tokens,
                                              record.hypothesis_tokens)
        rows.append({
            "scenario": scenario.id,
            "persona": persona,
            "turn_index": record.turn_index,
            "reference": list(record.reference_tokens),
            "hypothesis": list(record.hypothesis_tokens),
            "phenomena": list(tags),
            "decode_ok": record.decode_ok,
            "decode_mode": record.decode_mode,
            "expectation_tag": record.expectation_tag,
            "lm_state_tag": record.lm_state_tag,
            "noise_applied": record.noise_applied,
            "symptom": record.symptom,
            "ref_words": n,
            "substitutions": subs,
            "deletions": dels,
            "insertions": ins,
            "su_exact": bool(su_exact),
            "su_partial": su_part,
        })
        turns += 1
    return runner, rows


def _aggregate_wa(rows: list[dict]) -> float:
    total_ref = sum(r["ref_words"] for r in rows)
    total_err = sum(r["substitutions"] + r["deletions"] + r["insertions"]
                    for r in rows)
    if total_ref == 0:
        return 1.0 if total_err == 0 else 0.0
    return (total_ref - total_err) / total_ref


def _mean(values) -> float:
    values = list(values)
    return sum(values) / len(values) if values else 0.0


def run_trial(stack: SystemStack, scenarios: tuple[Scenario, ...],
              config: TrialConfig, out_dir=None,
              dialogue_config: DialogueConfig | None = None) -> dict:
    """Run seeded dialogues and aggregate a deterministic report."""
    if not scenarios:
        raise ValueError("run_trial needs at least one scenario")
    master = random.Random(config.master_seed)
    utterance_rows: list[dict] = []
    dialogue_rows: list[dict] = []
    outcome_counts = {o: 0 for o in OUTCOMES}
    system_outcomes: dict[str, int] = {"S": 0, "SC": 0, "SF": 0}
    for d in range(config.n_dialogues):
        scenario = scenarios[d % len(scenarios)]
        persona = config.persona
        if persona == "mixed":
            persona = master.choice(PERSONAS)
        runner_seed = master.randrange(1 << 30)
        sim_seed = master.randrange(1 << 30)
        runner, rows = run_dialogue(stack, scenario, persona, config,
                                    runner_seed, sim_seed, dialogue_config)
        for row in rows:
            row["dialogue"] = d
        utterance_rows.extend(rows)
        outcome = classify_dialogue(runner.state, scenario, persona)
        outcome_counts[outcome] += 1
        system_outcomes[runner.state.outcome] = \
            system_outcomes.get(runner.state.outcome, 0) + 1
        implicit, explicit = recovery_metrics(runner.records)
        dialogue_rows.append({
            "dialogue": d,
            "scenario": scenario.id,
            "persona": persona,
            "runner_seed": runner_seed,
            "sim_seed": sim_seed,
            "turns": runner.state.turn_count,
            "system_outcome": runner.state.outcome,
            "outcome": outcome,
            "relaxed": sorted(runner.state.relaxed),
            "slots": runner.state.slot_view(),
            "implicit_recovery": implicit,
            "explicit_recovery": explicit,
        })
    clean_rows = [r for r in utterance_rows if not r["phenomena"]]
    completed = [r for r in dialogue_rows if r["system_outcome"] in ("S", "SC")]
    report = {
        "config": asdict(config),
        "n_dialogues": config.n_dialogues,
        "n_utterances": len(utterance_rows),
        "outcomes": outcome_counts,
        "system_outcomes": dict(sorted(system_outcomes.items())),
        "success_rate": (outcome_counts["S"] + outcome_counts["SC"])
        / config.n_dialogues,
        "sc_share_of_completed": (
            sum(1 for r in completed if r["outcome"] == "SC") / len(completed)
            if completed else 0.0),
        "word_accuracy": _aggregate_wa(utterance_rows),
        "word_accuracy_untagged": _aggregate_wa(clean_rows),
        "su_rate": _mean(r["su_exact"] for r in utterance_rows),
        "su_rate_untagged": _mean(r["su_exact"] for r in clean_rows),
        "su_partial": _mean(r["su_partial"] for r in utterance_rows),
        "mean_turns": _mean(r["turns"] for r in dialogue_rows),
        "implicit_recovery": _mean(r["implicit_recovery"] for r in dialogue_rows),
        "explicit_recovery": _mean(r["explicit_recovery"] for r in dialogue_rows),
    }
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "utterances.jsonl", "w", encoding="utf-8") as fh:
            for row in utterance_rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        with open(out / "dialogues.jsonl", "w", encoding="utf-8") as fh:
            for row in dialogue_rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")
        with open(out / "report.json", "w", encoding="utf-8") as fh:
            json.dump(report, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return report
