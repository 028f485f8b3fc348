import json

import pytest

from trajauth.cli import main


def test_synth_then_ingest_round_trips(tmp_path, capsys):
    d = tmp_path / "d"
    assert main(["synth", "--users", "2", "--seed", "7", "--out", str(d)]) == 0
    assert (d / "manifest.yaml").exists()
    assert main(["ingest", str(d)]) == 0
    assert (d / "corpus.npz").exists()
    from trajauth.ingest import Corpus
    from trajauth.synth import generate_corpus

    assert Corpus.load(d / "corpus.npz").digest() == generate_corpus(2, 7).digest()


def test_build_train_eval(tmp_path):
    out = str(tmp_path / "run")
    assert main(["build-windows", "--synthetic", "3", "--w", "40", "--w-in", "30", "--stride", "30",
                 "--users", "u00", "--out", out, "--dump-csv"]) == 0
    assert (tmp_path / "run/windows/u00/train.csv").exists()
    assert main(["train", "--out", out, "--epochs", "1"]) == 0
    assert main(["eval", "--checkpoint", str(tmp_path / "run/models/u00.tack"), "--out", out]) == 0
    rec = json.loads((tmp_path / "run/eval/u00.json").read_text())
    assert 0 <= rec["eer"] <= 1


def test_train_without_windows(tmp_path, capsys):
    assert main(["train", "--out", str(tmp_path)]) == 1
    assert "build-windows" in capsys.readouterr().err


def test_eval_missing_checkpoint(tmp_path, capsys):
    assert main(["eval", "--checkpoint", str(tmp_path / "missing"), "--out", str(tmp_path)]) != 0
    assert "missing" in capsys.readouterr().err


def test_sweep_missing_corpus_names_path(tmp_path, capsys):
    assert main(["sweep", "--corpus", "/no/such/corpus", "--out", str(tmp_path)]) != 0
    assert "/no/such/corpus" in capsys.readouterr().err


def test_invalid_config_exit_one(tmp_path, capsys):
    (tmp_path / "c.yaml").write_text("train:\n  epochs: -2\n")
    assert main(["sweep", "--config", str(tmp_path / "c.yaml"), "--synthetic", "2"]) == 1
    assert "config.train.epochs" in capsys.readouterr().err


def test_sweep_small_grid(tmp_path):
    out = tmp_path / "s"
    code = main(["sweep", "--synthetic", "3", "--grid", "small", "--variant", "WESHKA",
                 "--epochs", "1", "--stride", "20", "--workers", "1", "--out", str(out)])
    assert code == 0
    rows = (out / "eer_table.csv").read_text().splitlines()
    assert len(rows) == 1 + 2 * 3
    assert {tuple(r.split(",")[:2]) for r in rows[1:]} == {("40", "30"), ("50", "30")}
    assert (out / "summary.md").exists()
    assert main(["report", "--from", str(out), "--out", str(tmp_path / "again")]) == 0
    assert (tmp_path / "again/eer_summary.csv").read_text() == (out / "eer_summary.csv").read_text()


def test_sweep_partial_failure_exit_two(tmp_path):
    # u01 loses its second session, so its cells fail while u00's succeed
    from trajauth.ingest import Corpus
    from trajauth.synth import generate_corpus

    c = generate_corpus(2, 0, trials=1)
    Corpus([t for t in c.trials if not (t.user_id == "u01" and t.session == 2)], c.stats).save(tmp_path / "c.npz")
    code = main(["sweep", "--corpus", str(tmp_path / "c.npz"), "--grid", "small", "--epochs", "1",
                 "--stride", "40", "--workers", "1", "--out", str(tmp_path / "s")])
    assert code == 2
    assert "u01" in (tmp_path / "s/errors.csv").read_text()


def test_report_published(tmp_path, capsys):
    assert main(["report", "--published", "--out", str(tmp_path)]) == 0
    assert "0.00045" in capsys.readouterr().out


def test_unknown_variant(tmp_path):
    assert main(["sweep", "--synthetic", "2", "--variant", "NOPE", "--out", str(tmp_path)]) == 1
