import json

import pytest

from audiodefect.config import ToolkitConfig, load_config
from audiodefect.errors import DataError


def test_defaults():
    cfg = load_config(None)
    assert cfg.click.p_click == 0.1
    assert cfg.corruption.p_glitch == 0.05
    assert cfg.model.num_blocks == 13
    assert cfg.train.max_epochs == 40
    assert cfg.baseline.detection_threshold_db == 30.0


def test_toml_sections(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text(
        """
rng_seed = 42

[click]
p_click = 0.25

[model]
num_blocks = 6
contract_filter_growth = 4

[baseline]
detection_threshold_db = 35.0
"""
    )
    cfg = load_config(p)
    assert cfg.click.p_click == 0.25
    assert cfg.model.num_blocks == 6
    assert cfg.baseline.detection_threshold_db == 35.0
    # Global seed overrides every section seed.
    assert cfg.click.rng_seed == 42
    assert cfg.model.rng_seed == 42
    assert cfg.train.rng_seed == 42


def test_unknown_keys_rejected(tmp_path):
    p = tmp_path / "bad.toml"
    p.write_text("[click]\nnot_a_knob = 3\n")
    with pytest.raises(DataError):
        load_config(p)
    p.write_text("[nosuchsection]\nx = 1\n")
    with pytest.raises(DataError):
        load_config(p)


def test_malformed_toml_rejected(tmp_path):
    p = tmp_path / "broken.toml"
    p.write_text("this is = not [ valid")
    with pytest.raises(DataError):
        load_config(p)


def test_snapshot_is_deterministic_json(tmp_path):
    cfg = ToolkitConfig()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    cfg.write_snapshot(a)
    cfg.write_snapshot(b)
    assert a.read_bytes() == b.read_bytes()
    body = json.loads(a.read_text())
    assert set(body) >= {"click", "corruption", "model", "train", "baseline"}


def test_adapter_command_overrides(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('decoder_command = ["/opt/dec", "{input}", "{output}"]\n')
    cfg = load_config(p)
    assert cfg.decoder().command[0] == "/opt/dec"
    assert cfg.encoder().command  # default still resolves
