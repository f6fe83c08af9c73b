"""Acceptance gate: one test per release criterion.

Every test prints one summary line (visible with -v plus -s, and in the
captured output otherwise) and asserts the criterion it names. Oracles are
implemented independently of the production code paths they check.
"""
import json
import random
import time

import pytest

from traindial.cli import main as cli_main
from traindial.dialogue import DialogueConfig
from traindial.evaluation import (TrialConfig, run_dialogue, run_trial,
                                  word_accuracy)
from traindial.lexicon import load_lexicon
from traindial.lm import (END_CLASS, START_CLASS, LMConfig, perplexity,
                          train_class_bigram, train_dialogue_family)
from traindial.parsing import Concept, resolve_conflicts
from traindial.pipeline import SessionRunner, load_tagged_corpus
from traindial.recognizer import (EPS, ConfusionNetwork, Slot,
                                  decode_continuous, edit_distance)
from traindial.simulate import load_scenarios
from traindial import data

# ---------------------------------------------------------------- fixtures

_TOY_LEXICON = (
    "milan\tcity\tcity\n"
    "rome\tcity\tcity\n"
    "turin\tcity\tcity\n"
    "parma\tcity\tcity\n"
    "lodi\tcity\tcity\n"
    "monday\tweekday\tweekday\n"
    "tuesday\tweekday\tweekday\n"
    "to\tto\n"
    "from\tfrom\n"
    "on\ton\n"
)
_TOY_VOCAB = ("milan", "rome", "turin", "parma", "lodi",
              "monday", "tuesday", "to", "from", "on")


@pytest.fixture(scope="module")
def toy_lexicon(tmp_path_factory):
    path = tmp_path_factory.mktemp("acceptance") / "lexicon.tsv"
    path.write_text(_TOY_LEXICON, encoding="utf-8")
    return load_lexicon(path)


def _random_corpus(rng, n_sentences, oov_rate=0.0):
    corpus = []
    for _ in range(n_sentences):
        words = [rng.choice(_TOY_VOCAB) for _ in range(rng.randint(1, 7))]
        if oov_rate and rng.random() < oov_rate:
            words[rng.randrange(len(words))] = "xyzzy"
        corpus.append(words)
    return corpus


# -------------------------------------------------- 1. decoder path oracle

def _enumerate_decode(network, lm, bonus, alpha):
    """Exhaustive argmax over full paths, replicating the decoder's scoring
    term for term, with ties resolved to the smallest (words, choices)."""
    lexicon = lm.lexicon
    slots = [slot.alternatives for slot in network.slots]
    n = len(slots)
    step_cache: dict = {}
    end_cache: dict = {}
    best: list = [None, None]  # total, (words, choices)

    def step_for(i, alt_idx, history):
        key = (i, alt_idx, history)
        hit = step_cache.get(key)
        if hit is None:
            word, channel = slots[i][alt_idx]
            if word == EPS:
                hit = (channel, history, None)
            else:
                cid = lexicon.class_id_of(word)
                step = channel + alpha * (lm.log_successor(history, cid)
                                          + lm.log_membership(word, cid))
                step += bonus.get(cid, 0.0)
                hit = (step, cid, word)
            step_cache[key] = hit
        return hit

    def walk(i, score, history, words, choices):
        if i == n:
            end = end_cache.get(history)
            if end is None:
                end = alpha * lm.log_successor(history, END_CLASS)
                end_cache[history] = end
            total = score + end
            key = (words, choices)
            if best[0] is None or total > best[0] \
                    or (total == best[0] and key < best[1]):
                best[0], best[1] = total, key
            return
        for alt_idx in range(len(slots[i])):
            step, nh, emit = step_for(i, alt_idx, history)
            walk(i + 1, score + step, nh,
                 words + (emit,) if emit else words, choices + (alt_idx,))

    walk(0, 0.0, START_CLASS, (), ())
    return best[0], best[1][0]


def test_c01_decoder_oracle(toy_lexicon):
    rng = random.Random(101)
    lm = train_class_bigram(_random_corpus(rng, 40), toy_lexicon,
                            LMConfig(interpolation=0.7))
    word_pool = _TOY_VOCAB + ("xyzzy", "blorp")
    bonus_options = ({}, {"city": 0.9}, {"weekday": 0.4, "city": 0.2})
    alpha_options = (0.5, 1.0, 1.7)

    started = time.monotonic()
    mismatches = []
    for case in range(1000):
        n_slots = rng.randint(1, 8)
        slots = []
        for _ in range(n_slots):
            k = rng.randint(1, 5)
            words = list(rng.sample(word_pool, k))
            if rng.random() < 0.25:
                words[rng.randrange(k)] = EPS
            slots.append(Slot(alternatives=tuple(
                (w, round(rng.uniform(-4.0, -0.02), 3)) for w in words)))
        network = ConfusionNetwork(slots=slots, seed=case)
        alpha = rng.choice(alpha_options)
        bonus = rng.choice(bonus_options)

        result = decode_continuous(network, lm, class_bonus=bonus, alpha=alpha)
        want_total, want_words = _enumerate_decode(network, lm, bonus, alpha)
        if result.words != want_words or result.total_log_score != want_total:
            mismatches.append((case, result.words, want_words,
                               result.total_log_score, want_total))
    elapsed = time.monotonic() - started
    assert not mismatches, mismatches[:5]
    assert elapsed < 60.0
    print(f"ACCEPTANCE decoder-oracle: PASS "
          f"(1000 networks, 0 mismatches, {elapsed:.1f}s)")


# ------------------------------------------------ 2. word accuracy oracle

def _lev_oracle(a, b):
    """Definitional recursive edit distance, memoized."""
    memo = {}

    def f(i, j):
        if i == 0 or j == 0:
            return max(i, j)
        hit = memo.get((i, j))
        if hit is None:
            hit = min(f(i - 1, j) + 1, f(i, j - 1) + 1,
                      f(i - 1, j - 1) + (a[i - 1] != b[j - 1]))
            memo[(i, j)] = hit
        return hit

    return f(len(a), len(b))


def test_c02_word_accuracy_oracle():
    rng = random.Random(202)
    vocab = ["milan", "rome", "to", "from", "on", "monday", "at", "nine"]
    pairs = []
    for _ in range(200):
        ref = [rng.choice(vocab) for _ in range(rng.randint(0, 12))]
        hyp = list(ref)
        for i in range(len(hyp)):          # random mutations
            roll = rng.random()
            if roll < 0.2:
                hyp[i] = rng.choice(vocab)
            elif roll < 0.3:
                hyp[i] = None
        hyp = [w for w in hyp if w is not None]
        if rng.random() < 0.3:
            hyp.insert(rng.randint(0, len(hyp)), rng.choice(vocab))
        pairs.append((ref, hyp))

    total_ref = 0
    total_err = 0
    for ref, hyp in pairs:
        want = _lev_oracle(ref, hyp)
        assert edit_distance(ref, hyp) == want, (ref, hyp)
        total_ref += len(ref)
        total_err += want
    expected = (total_ref - total_err) / total_ref
    assert word_accuracy(pairs) == expected
    print(f"ACCEPTANCE word-accuracy-oracle: PASS "
          f"(200 pairs, accuracy {expected:.4f} matched exactly)")


# ------------------------------------------- 3. conflict resolution oracle

def _concept_key(c):
    return (c.span[0], c.span[1], c.kind, repr(c.value))


def _brute_force_resolution(concepts):
    """Max-score pairwise-compatible subset by full enumeration."""
    items = sorted(concepts, key=_concept_key)
    n = len(items)
    compat_mask = [0] * n
    for i in range(n):
        for j in range(n):
            if i != j:
                a, b = items[i], items[j]
                disjoint = a.span[1] <= b.span[0] or b.span[1] <= a.span[0]
                if disjoint and a.kind != b.kind:
                    compat_mask[i] |= 1 << j
    valid = [False] * (1 << n)
    valid[0] = True
    best_total, best_key, best_subset = -1.0, None, ()
    for mask in range(1 << n):
        if mask:
            low = (mask & -mask).bit_length() - 1
            rest = mask ^ (1 << low)
            valid[mask] = valid[rest] and (rest & ~compat_mask[low]) == 0
        if not valid[mask]:
            continue
        subset = [items[i] for i in range(n) if mask >> i & 1]
        total = 0.0
        for c in subset:                   # accumulate in canonical order
            total = total + c.score
        key = tuple(_concept_key(c) for c in subset)
        if total > best_total or (total == best_total
                                  and (best_key is None or key < best_key)):
            best_total, best_key, best_subset = total, key, tuple(subset)
    return best_subset


def test_c03_conflict_resolution_oracle():
    rng = random.Random(303)
    kinds = ("departure-city", "arrival-city", "date", "time",
             "unanchored-city", "negation", "confirmation")
    values = ("milan", "rome", "monday", "nine", "no", "yes")
    mismatches = []
    for case in range(500):
        n = rng.randint(0, 12)
        concepts = []
        for _ in range(n):
            start = rng.randint(0, 9)
            concepts.append(Concept(
                kind=rng.choice(kinds),
                value=rng.choice(values),
                span=(start, start + rng.randint(1, 3)),
                score=rng.randint(1, 20) * 0.05))  # quantized: ties abound
        result = resolve_conflicts(concepts)
        want = _brute_force_resolution(concepts)
        if result.concepts != want or not result.exact:
            mismatches.append((case, result.concepts, want))
    assert not mismatches, mismatches[:3]
    print("ACCEPTANCE conflict-oracle: PASS (500 concept sets, 0 mismatches)")


# ------------------------------------------------- 4. LM normalization

def test_c04_lm_normalization(toy_lexicon):
    rng = random.Random(404)
    checked_rows = 0
    for _ in range(100):
        corpus = _random_corpus(rng, rng.randint(1, 40), oov_rate=0.1)
        config = LMConfig(interpolation=rng.uniform(0.05, 0.95),
                          floor=rng.choice((1e-7, 1e-6)))
        lm = train_class_bigram(corpus, toy_lexicon, config)
        histories = [START_CLASS] + list(lm.successors[:-1])
        for history in histories:
            row = sum(lm.successor_prob(history, s) for s in lm.successors)
            assert row == pytest.approx(1.0, abs=1e-9), (history, row)
            checked_rows += 1
        for cid in toy_lexicon.classes:
            members = toy_lexicon.members_of(cid)
            mass = sum(lm.membership_prob(w, cid) for w in members)
            assert mass == pytest.approx(1.0, abs=1e-9), cid
        for sentence in _random_corpus(rng, 5, oov_rate=0.3):
            score = lm.sequence_log_prob(sentence)
            assert score > float("-inf")
    print(f"ACCEPTANCE lm-normalization: PASS "
          f"(100 corpora, {checked_rows} rows sum to 1 within 1e-9)")


# ------------------------------------------------- 5. noiseless end-to-end

def test_c05_noiseless_end_to_end(stack):
    from traindial.evaluation import classify_dialogue
    scenarios = load_scenarios()
    config = TrialConfig(n_dialogues=1)
    worst_turns = 0
    for d, scenario in enumerate(scenarios):
        runner, _ = run_dialogue(stack, scenario, "cooperative", config,
                                 runner_seed=d, sim_seed=1000 + d)
        outcome = classify_dialogue(runner.state, scenario)
        assert runner.state.outcome == "S", (scenario.id, runner.state.outcome)
        assert outcome == "S", scenario.id
        assert runner.state.turn_count <= 10, (scenario.id,
                                               runner.state.turn_count)
        worst_turns = max(worst_turns, runner.state.turn_count)
    print(f"ACCEPTANCE noiseless-e2e: PASS "
          f"(20/20 scenarios S, max {worst_turns} turns)")


# --------------------------------------------- 6. dialogue-LM direction

def test_c06_dialogue_lm_direction(stack):
    # (a) per-state perplexity on matched held-out partitions
    corpus = load_tagged_corpus(data.TAGGED_CORPUS_PATH)
    by_tag: dict = {}
    for tag, words in corpus:
        by_tag.setdefault(tag, []).append(words)
    rng = random.Random(606)
    train, heldout = [], {}
    for tag in sorted(by_tag):
        lines = list(by_tag[tag])
        assert len(lines) >= 200
        rng.shuffle(lines)
        cut = int(len(lines) * 0.8)
        train.extend((tag, words) for words in lines[:cut])
        heldout[tag] = lines[cut:]
    family = train_dialogue_family(train, stack.lexicon, LMConfig())
    gains = {}
    for tag, lines in heldout.items():
        pp_state = perplexity(family.select_lm(tag), lines)
        pp_global = perplexity(family.global_lm, lines)
        assert pp_state <= pp_global, (tag, pp_state, pp_global)
        gains[tag] = pp_global / pp_state

    # (b) decoding accuracy with expectation-driven LM selection
    scenarios = load_scenarios()
    with_dlm = run_trial(stack, scenarios, TrialConfig(
        n_dialogues=500, p_sub=0.3, use_dialogue_lm=True, master_seed=66))
    without = run_trial(stack, scenarios, TrialConfig(
        n_dialogues=500, p_sub=0.3, use_dialogue_lm=False, master_seed=66))
    assert with_dlm["word_accuracy"] >= without["word_accuracy"], \
        (with_dlm["word_accuracy"], without["word_accuracy"])
    print(f"ACCEPTANCE dialogue-lm-direction: PASS "
          f"(state perplexity <= global on all {len(gains)} states; "
          f"WA {with_dlm['word_accuracy']:.4f} >= {without['word_accuracy']:.4f})")


# ------------------------------------------ 7. degradation and relaxation

def test_c07_degradation_and_relaxation(stack):
    scenarios = load_scenarios()
    rates = []
    for p_sub in (0.0, 0.1, 0.2, 0.3, 0.4, 0.5):
        report = run_trial(stack, scenarios, TrialConfig(
            n_dialogues=500, p_sub=p_sub, master_seed=17))
        rates.append(round(report["success_rate"], 4))
    inversions = [(a, b) for a, b in zip(rates, rates[1:]) if b > a]
    assert len(inversions) <= 1, rates
    assert all(b - a <= 0.01 + 1e-9 for a, b in inversions), rates

    relaxed = run_trial(stack, scenarios, TrialConfig(
        n_dialogues=500, p_del=1.0, noise_target="date_time", master_seed=18))
    share = relaxed["sc_share_of_completed"]
    assert share >= 0.90, share
    print(f"ACCEPTANCE degradation-relaxation: PASS "
          f"(success curve {rates}; SC share of completed {share:.3f})")


# --------------------------------------------- 8. isolated-mode fallback

def test_c08_isolated_mode_fallback(stack):
    from traindial.dialogue import should_switch_isolated
    runner = SessionRunner(stack, dialogue_config=DialogueConfig())
    runner.step(force_decode_failure=True)
    assert should_switch_isolated(runner.state) is None
    assert not runner.state.isolated_mode
    runner.step(force_decode_failure=True)
    assert runner.state.failure_counters["departure"] == 2
    assert runner.state.isolated_mode  # switched at exactly the second failure

    record = runner.step("milan")
    assert record.decode_mode == "isolated"
    assert record.hypothesis_tokens == ("milan",)
    assert "milan" in stack.lexicon.members_of("city")
    assert runner.state.slots["departure"].value == "milan"
    print("ACCEPTANCE isolated-fallback: PASS "
          "(switch at N=2, slot acquired from class vocabulary)")


# ------------------------------------------------ 9. phenomena direction

def test_c09_phenomena_direction(stack):
    scenarios = load_scenarios()
    lines = []
    for persona, seed in (("restarting", 23), ("oov_prone", 41)):
        report = run_trial(stack, scenarios, TrialConfig(
            n_dialogues=500, persona=persona, p_sub=0.15, master_seed=seed))
        assert report["word_accuracy_untagged"] >= report["word_accuracy"], \
            (persona, report["word_accuracy_untagged"], report["word_accuracy"])
        assert report["su_rate_untagged"] >= report["su_rate"], persona
        lines.append(f"{persona} WA {report['word_accuracy']:.3f}->"
                     f"{report['word_accuracy_untagged']:.3f} "
                     f"SU {report['su_rate']:.3f}->"
                     f"{report['su_rate_untagged']:.3f}")
    print(f"ACCEPTANCE phenomena-direction: PASS ({'; '.join(lines)})")


# ---------------------------------------------------- 10. determinism

def test_c10_trial_determinism(tmp_path):
    args = ["trial", "--n", "40", "--persona", "mixed", "--p-sub", "0.25",
            "--p-ins", "0.05", "--seed", "1234"]
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert cli_main(args + ["--out", str(out_a)]) == 0
    assert cli_main(args + ["--out", str(out_b)]) == 0
    for name in ("report.json", "utterances.jsonl", "dialogues.jsonl"):
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes(), name
    report = json.loads((out_a / "report.json").read_text())
    assert report["n_dialogues"] == 40
    print("ACCEPTANCE determinism: PASS (byte-identical trial outputs)")
