"""Command line interface, driven through main(argv)."""
import json

import pytest

from traindial.cli import main
from traindial.recognizer import NoiseConfig, corrupt, save_network


def _out(capsys) -> dict:
    return json.loads(capsys.readouterr().out)


def _saved_network(tmp_path, stack, words, seed=1, noise=None):
    network = corrupt(list(words), noise or NoiseConfig(0, 0, 0), seed,
                      stack.lexicon, stack.index)
    path = tmp_path / "network.json"
    save_network(network, path)
    return str(path)


def test_parse_command(capsys):
    rc = main(["parse", "--text", "i want to go from milan to rome"])
    assert rc == 0
    body = _out(capsys)
    assert body["speech_act"] == "inform"
    assert body["slots"] == {"arrival-city": "rome", "departure-city": "milan"}
    assert body["concepts"]


def test_decode_command(tmp_path, stack, capsys):
    path = _saved_network(tmp_path, stack, ["from", "milan"])
    rc = main(["decode", "--network", path])
    assert rc == 0
    body = _out(capsys)
    assert body["words"] == ["from", "milan"]
    assert body["mode"] == "continuous"
    assert body["total"] <= 0.0
    assert len(body["scores"]) == 2


def test_decode_with_state_lm_and_bonus(tmp_path, stack, capsys):
    path = _saved_network(tmp_path, stack, ["on", "monday"])
    rc = main(["decode", "--network", path, "--state-tag", "ask_date",
               "--classes", "weekday,month", "--bonus", "0.5"])
    assert rc == 0
    assert _out(capsys)["words"] == ["on", "monday"]


def test_decode_isolated(tmp_path, stack, capsys):
    path = _saved_network(tmp_path, stack, ["milan"])
    rc = main(["decode", "--network", path, "--isolated",
               "--classes", "city"])
    assert rc == 0
    body = _out(capsys)
    assert body["words"] == ["milan"]
    assert body["mode"] == "isolated"


def test_decode_missing_network_file(capsys):
    rc = main(["decode", "--network", "/definitely/not/here.json"])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_trial_command_writes_logs(tmp_path, capsys):
    out_dir = tmp_path / "logs"
    rc = main(["trial", "--n", "2", "--seed", "3", "--out", str(out_dir)])
    assert rc == 0
    report = _out(capsys)
    assert report["n_dialogues"] == 2
    assert 0.0 <= report["success_rate"] <= 1.0
    for name in ("report.json", "utterances.jsonl", "dialogues.jsonl"):
        assert (out_dir / name).exists()


def test_score_command(capsys):
    rc = main(["score", "--state-tag", "ask_date"])
    assert rc == 0
    body = _out(capsys)
    assert body["state_tag"] == "ask_date"
    assert body["lines"] > 0
    assert body["perplexity"] > 1.0


def test_score_unknown_tag_fails(capsys):
    rc = main(["score", "--state-tag", "ask_nothing"])
    assert rc == 1
    assert "no corpus lines" in capsys.readouterr().err


def test_train_lm_roundtrip(tmp_path, capsys):
    lm_file = tmp_path / "family.json"
    rc = main(["train-lm", "--out", str(lm_file)])
    assert rc == 0
    body = _out(capsys)
    assert len(body["state_tags"]) == 6
    assert lm_file.exists()

    rc = main(["score", "--lm-file", str(lm_file), "--state-tag", "ask_time"])
    assert rc == 0
    assert _out(capsys)["perplexity"] > 1.0


def test_unknown_subcommand_exits():
    with pytest.raises(SystemExit):
        main(["frobnicate"])
