"""Command line entry points for the dialogue system.

Subcommands cover the pieces separately (decode a saved confusion network,
parse a text line, score a corpus, train and save the language models) plus
the two composite modes: batch simulation trials and the HTTP service.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import data, service
from .evaluation import TrialConfig, run_trial
from .lexicon import load_lexicon, tokenize
from .lm import (LMConfig, load_family, perplexity, save_family,
                 train_dialogue_family)
from .parsing import parse_utterance
from .pipeline import load_default_stack, load_tagged_corpus
from .recognizer import (DecodeFailure, PredictionSet, apply_predictions,
                         decode_continuous, decode_isolated, load_network)
from .simulate import PERSONAS, load_scenarios


def _emit(payload: dict) -> None:
    json.dump(payload, sys.stdout, sort_keys=True, indent=2)
    sys.stdout.write("\n")


def _cmd_decode(args) -> int:
    stack = load_default_stack()
    cn = load_network(args.network)
    if args.isolated:
        if args.classes:
            vocab = set()
            for cid in args.classes:
                vocab.update(stack.lexicon.members_of(cid))
        else:
            vocab = stack.lexicon.words
        result = decode_isolated(cn, vocab)
    else:
        predictions = PredictionSet(
            state_tag=args.state_tag,
            predicted_classes=tuple(args.classes),
            hard_constraint=args.hard_constraint,
            class_log_bonus=args.bonus)
        lm, constraint, bonus = apply_predictions(stack.family, predictions)
        result = decode_continuous(cn, lm, constraint, bonus, alpha=args.alpha)
    _emit({"words": list(result.words),
           "scores": list(result.per_word_scores),
           "total": result.total_log_score,
           "mode": result.mode})
    return 0


def _cmd_parse(args) -> int:
    stack = load_default_stack()
    parse = parse_utterance(tokenize(args.text, stack.lexicon),
                            stack.grammar, stack.lexicon)
    frame = parse.frame
    _emit({
        "speech_act": frame.speech_act,
        "slots": frame.slot_view(),
        "concepts": [{"kind": c.kind, "span": list(c.span), "score": c.score}
                     for c in parse.concepts],
    })
    return 0


def _cmd_trial(args) -> int:
    stack = load_default_stack()
    scenarios = load_scenarios(args.scenarios)
    config = TrialConfig(n_dialogues=args.n, persona=args.persona,
                         p_sub=args.p_sub, p_del=args.p_del, p_ins=args.p_ins,
                         noise_target=args.noise_target,
                         use_dialogue_lm=not args.no_dialogue_lm,
                         master_seed=args.seed)
    report = run_trial(stack, scenarios, config, out_dir=args.out)
    _emit(report)
    return 0


def _cmd_score(args) -> int:
    lexicon = load_lexicon(data.LEXICON_PATH)
    if args.lm_file:
        family = load_family(args.lm_file, lexicon)
    else:
        family = train_dialogue_family(
            load_tagged_corpus(data.TAGGED_CORPUS_PATH), lexicon, LMConfig())
    tagged = load_tagged_corpus(args.corpus or data.TAGGED_CORPUS_PATH)
    lm = family.select_lm(args.state_tag)
    lines = [toks for tag, toks in tagged
             if not args.state_tag or tag == args.state_tag]
    if not lines:
        print(f"no corpus lines for state tag {args.state_tag!r}",
              file=sys.stderr)
        return 1
    _emit({"state_tag": args.state_tag, "lines": len(lines),
           "perplexity": perplexity(lm, lines)})
    return 0


def _cmd_train_lm(args) -> int:
    lexicon = load_lexicon(data.LEXICON_PATH)
    config = LMConfig(interpolation=args.interpolation, floor=args.floor,
                      membership_weight=args.membership_weight)
    config.validate()
    family = train_dialogue_family(
        load_tagged_corpus(args.corpus or data.TAGGED_CORPUS_PATH),
        lexicon, config)
    save_family(family, args.out)
    _emit({"out": args.out,
           "state_tags": sorted(family.per_state)})
    return 0


def _cmd_serve(args) -> int:
    service.main(["--host", args.host, "--port", str(args.port)])
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="traindial",
        description="spoken dialogue system for train timetable queries")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decode", help="decode a saved confusion network")
    p.add_argument("--network", required=True, help="network JSON file")
    p.add_argument("--state-tag", default="",
                   help="dialogue state LM to use (default: global)")
    p.add_argument("--classes", default=[],
                   type=lambda s: [c for c in s.split(",") if c],
                   help="comma separated predicted class ids")
    p.add_argument("--hard-constraint", action="store_true",
                   help="prune words outside the predicted classes")
    p.add_argument("--bonus", type=float, default=0.0,
                   help="log bonus added to predicted classes")
    p.add_argument("--alpha", type=float, default=1.0,
                   help="LM weight relative to the channel scores")
    p.add_argument("--isolated", action="store_true",
                   help="single word decode by channel evidence only")
    p.set_defaults(func=_cmd_decode)

    p = sub.add_parser("parse", help="parse one utterance to a case frame")
    p.add_argument("--text", required=True)
    p.set_defaults(func=_cmd_parse)

    p = sub.add_parser("trial", help="run simulated dialogues and report")
    p.add_argument("--n", type=int, default=100, help="number of dialogues")
    p.add_argument("--persona", default="cooperative",
                   choices=PERSONAS + ("mixed",))
    p.add_argument("--p-sub", type=float, default=0.0)
    p.add_argument("--p-del", type=float, default=0.0)
    p.add_argument("--p-ins", type=float, default=0.0)
    p.add_argument("--noise-target", default="all",
                   choices=("all", "date_time"))
    p.add_argument("--no-dialogue-lm", action="store_true",
                   help="decode every turn with the global LM")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scenarios", default=None, help="scenarios JSON file")
    p.add_argument("--out", default=None,
                   help="directory for per-utterance and per-dialogue logs")
    p.set_defaults(func=_cmd_trial)

    p = sub.add_parser("score", help="perplexity of an LM on a tagged corpus")
    p.add_argument("--corpus", default=None, help="tagged corpus file")
    p.add_argument("--state-tag", default="",
                   help="restrict to one state tag and its LM")
    p.add_argument("--lm-file", default=None, help="saved LM family JSON")
    p.set_defaults(func=_cmd_score)

    p = sub.add_parser("train-lm", help="train the LM family and save it")
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--corpus", default=None, help="tagged corpus file")
    p.add_argument("--interpolation", type=float, default=0.7)
    p.add_argument("--floor", type=float, default=1e-7)
    p.add_argument("--membership-weight", type=float, default=0.9)
    p.set_defaults(func=_cmd_train_lm)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8040)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except DecodeFailure as exc:
        print(f"decode failure: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
