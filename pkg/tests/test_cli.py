import json
import hashlib
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from audiodefect.cli import main
from audiodefect.waveio import Waveform, write_audio


@pytest.fixture()
def runner():
    return CliRunner()


def _tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def _invoke(runner, args):
    result = runner.invoke(main, args, catch_exceptions=False)
    return result


def test_usage_error_exit_code(runner):
    result = runner.invoke(main, ["clickify"])  # missing required options
    assert result.exit_code == 1


def test_data_error_exit_code(runner, tmp_path):
    empty = tmp_path / "empty"
    empty.mkdir()
    result = runner.invoke(main, ["clickify", "--corpus", str(empty), "--out", str(tmp_path / "o")])
    assert result.exit_code == 2


def test_adapter_error_exit_code(runner, toy_corpus, tmp_path, monkeypatch):
    monkeypatch.setenv("AUDIODEFECT_MP3TOOL", "/no/such/mp3tool")
    result = runner.invoke(
        main, ["glitchify", "--corpus", str(toy_corpus), "--out", str(tmp_path / "g")]
    )
    assert result.exit_code == 3


def test_clickify_deterministic_and_snapshot(runner, toy_corpus, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        result = _invoke(runner, ["clickify", "--corpus", str(toy_corpus),
                                  "--out", str(out), "--seed", "7"])
        assert result.exit_code == 0, result.output
    assert (a / "config.snapshot.json").exists()
    assert _tree_digest(a) == _tree_digest(b)


def test_clickify_p_zero_all_negative(runner, toy_corpus, tmp_path):
    result = _invoke(runner, ["clickify", "--corpus", str(toy_corpus),
                              "--out", str(tmp_path / "z"), "--seed", "1", "--p-click", "0"])
    assert result.exit_code == 0
    assert json.loads(result.output.strip().splitlines()[-1])["positive_fraction"] == 0.0


def test_clickify_postprocess_records_spec(runner, toy_corpus, tmp_path):
    out = tmp_path / "pp"
    result = _invoke(runner, ["clickify", "--corpus", str(toy_corpus), "--out", str(out),
                              "--seed", "2", "--postprocess"])
    assert result.exit_code == 0, result.output
    records = [json.loads(l) for l in (out / "train" / "manifest.jsonl").read_text().splitlines()]
    assert all(r["postprocess"] is not None for r in records)


def test_glitchify_p_zero(runner, toy_corpus, tmp_path, mp3tool):
    result = _invoke(runner, ["glitchify", "--corpus", str(toy_corpus),
                              "--out", str(tmp_path / "g0"), "--seed", "1", "--p-glitch", "0"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.output.strip().splitlines()[-1])["positive_fraction"] == 0.0


def test_model_summary_default(runner):
    result = _invoke(runner, ["model-summary"])
    assert result.exit_code == 0
    assert " 128 " in result.output or "128" in result.output
    assert "parameters" in result.output


def test_detect_too_short_input(runner, tmp_path):
    short = tmp_path / "short.wav"
    write_audio(Waveform(samples=np.zeros(1000, np.float32), sample_rate=44100), short, bits=16)
    ckpt = tmp_path / "fake.ckpt"

    from audiodefect.net import build_model, save_checkpoint
    from audiodefect.net.config import ModelConfig
    from audiodefect.net.training import model_weights

    cfg = ModelConfig(num_blocks=7, contract_filter_growth=2, expand_filter_growth=2,
                      input_len=16384, output_len=128)
    model = build_model(cfg)
    save_checkpoint(ckpt, cfg, model_weights(model))

    result = runner.invoke(main, ["detect", "--checkpoint", str(ckpt), "--in", str(short)])
    assert result.exit_code == 2
    assert "too short" in result.output


def test_full_cli_pipeline(runner, toy_corpus, tmp_path, mp3tool):
    """clickify -> train(1 epoch) -> evaluate -> baseline -> compare."""
    ds = tmp_path / "ds"
    r = _invoke(runner, ["clickify", "--corpus", str(toy_corpus), "--out", str(ds),
                         "--seed", "3", "--p-click", "0.6"])
    assert r.exit_code == 0, r.output

    toml = tmp_path / "tiny.toml"
    toml.write_text(
        "[model]\nnum_blocks = 6\ncontract_filter_growth = 2\nexpand_filter_growth = 2\n"
        "[train]\nbatch_size = 5\nmax_epochs = 1\n"
    )
    run = tmp_path / "run"
    r = _invoke(runner, ["train", "--dataset", str(ds), "--out", str(run),
                         "--config", str(toml), "--seed", "0"])
    assert r.exit_code == 0, r.output
    best = json.loads(r.output.strip().splitlines()[-1])["best_checkpoint"]
    assert Path(best).exists()
    assert (run / "training_log.jsonl").exists()
    assert (run / "config.snapshot.json").exists()

    net_rep = tmp_path / "net.json"
    r = _invoke(runner, ["evaluate", "--dataset", str(ds), "--checkpoint", best,
                         "--report", str(net_rep)])
    assert r.exit_code == 0, r.output

    base_rep = tmp_path / "base.json"
    r = _invoke(runner, ["baseline", "--dataset", str(ds), "--sweep", "30,40",
                         "--report", str(base_rep)])
    assert r.exit_code == 0, r.output

    r = _invoke(runner, ["compare", str(base_rep), str(net_rep), "--csv", str(tmp_path / "c.csv")])
    assert r.exit_code == 0, r.output
    header = r.output.splitlines()[0].split()
    assert header[0] == "metric"
    assert (tmp_path / "c.csv").read_text().startswith("metric,")

    # Reports are byte-identical across reruns (no embedded wall time).
    rep2 = tmp_path / "net2.json"
    r = _invoke(runner, ["evaluate", "--dataset", str(ds), "--checkpoint", best,
                         "--report", str(rep2)])
    assert r.exit_code == 0
    assert net_rep.read_bytes() == rep2.read_bytes()


def test_baseline_single_file_scan(runner, toy_corpus):
    piece = sorted(toy_corpus.iterdir())[0]
    result = _invoke(runner, ["baseline", "--in", str(piece)])
    assert result.exit_code == 0
    body = json.loads(result.output.strip().splitlines()[-1])
    assert "click_positions" in body


def test_baseline_requires_input(runner):
    result = runner.invoke(main, ["baseline"])
    assert result.exit_code == 1
