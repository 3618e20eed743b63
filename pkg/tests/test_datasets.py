import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from audiodefect.clicks import ClickConfig
from audiodefect.datasets import (
    SPLITS,
    DiskDataset,
    build_click_dataset,
    build_glitch_dataset,
    dataset_id,
    iter_dataset,
    list_corpus,
    split_pieces,
)
from audiodefect.errors import DataError
from audiodefect.glitch_target import GlitchTargetConfig
from audiodefect.mp3.corrupt import CorruptionConfig


def _tree_digest(root: Path) -> str:
    h = hashlib.sha256()
    for p in sorted(root.rglob("*")):
        if p.is_file():
            h.update(str(p.relative_to(root)).encode())
            h.update(p.read_bytes())
    return h.hexdigest()


def test_list_corpus_sorted_and_empty_error(tmp_path, toy_corpus):
    pieces = list_corpus(toy_corpus)
    assert [p.name for p in pieces] == sorted(p.name for p in pieces)
    empty = tmp_path / "empty"
    empty.mkdir()
    with pytest.raises(DataError):
        list_corpus(empty)


def test_split_pieces_partition(toy_corpus):
    pieces = list_corpus(toy_corpus)
    out = split_pieces(pieces, (0.69, 0.155, 0.155), np.random.default_rng(0))
    combined = [p for s in SPLITS for p in out[s]]
    assert sorted(combined) == sorted(pieces)
    assert all(out[s] for s in SPLITS)  # no empty split for n >= 3


def test_click_dataset_structure_and_prior(tmp_path, toy_corpus):
    out = tmp_path / "ds"
    manifest = build_click_dataset(toy_corpus, ClickConfig(p_click=0.5, rng_seed=1), out)
    assert set(manifest["counts"]) == set(SPLITS)
    total = sum(manifest["counts"].values())
    assert total == 4 * 5  # 2-second pieces hold five 16384-sample segments

    # Segments on disk agree with the manifest, piece-disjoint splits.
    sources = {}
    positives = values = 0
    for split in SPLITS:
        for seg, target, record in iter_dataset(out, split):
            assert seg.samples.shape == (16384,)
            assert target.shape == (128,)
            sources.setdefault(record["source_id"], split)
            assert sources[record["source_id"]] == split
            positives += target.sum()
            values += target.size
            if record["provenance"]["click"] is not None:
                assert target.sum() >= 1
            else:
                assert target.sum() == 0
    assert manifest["positive_fraction"] == pytest.approx(positives / values)


def test_click_dataset_rebuild_byte_identical(tmp_path, toy_corpus):
    cfg = ClickConfig(p_click=0.3, rng_seed=7)
    a, b = tmp_path / "a", tmp_path / "b"
    build_click_dataset(toy_corpus, cfg, a)
    build_click_dataset(toy_corpus, cfg, b)
    assert _tree_digest(a) == _tree_digest(b)
    assert dataset_id(a) == dataset_id(b)


def test_click_dataset_p_zero_all_negative(tmp_path, toy_corpus):
    out = tmp_path / "z"
    manifest = build_click_dataset(toy_corpus, ClickConfig(p_click=0.0, rng_seed=1), out)
    assert manifest["positive_fraction"] == 0.0


def test_disk_dataset_view(tmp_path, toy_corpus):
    out = tmp_path / "dd"
    build_click_dataset(toy_corpus, ClickConfig(p_click=0.5, rng_seed=2), out)
    ds = DiskDataset(out, "train")
    assert len(ds) > 0
    x, y = ds[0]
    assert x.shape == (16384,) and x.dtype == np.float32
    assert y.shape == (128,)
    assert 0.0 <= ds.positive_prior <= 1.0
    with pytest.raises(DataError):
        DiskDataset(out, "nosuchsplit")


def test_glitch_dataset_build(tmp_path, toy_corpus, mp3tool):
    out = tmp_path / "g"
    manifest = build_glitch_dataset(
        toy_corpus, CorruptionConfig(p_glitch=0.3, rng_seed=3), GlitchTargetConfig(), out
    )
    assert sum(manifest["counts"].values()) > 0
    cache = out / "cache"
    assert sorted(p.suffix for p in cache.iterdir()) == sorted(
        [".mp3"] * 4 + [".json"] * 4
    )
    for split in SPLITS:
        for seg, target, record in iter_dataset(out, split):
            assert seg.samples.shape == (16384,)
            glitch_json = json.loads((out / record["provenance"]["glitch_json"]).read_text())
            surviving = {r["frame_ordinal"] for r in glitch_json["records"] if r["survived"]}
            assert set(record["provenance"]["surviving_records"]) == surviving


def test_glitch_dataset_p_zero_all_negative(tmp_path, toy_corpus, mp3tool):
    out = tmp_path / "g0"
    manifest = build_glitch_dataset(
        toy_corpus, CorruptionConfig(p_glitch=0.0, rng_seed=3), GlitchTargetConfig(), out
    )
    assert manifest["positive_fraction"] == 0.0


def test_glitch_dataset_rebuild_byte_identical(tmp_path, toy_corpus, mp3tool):
    ccfg = CorruptionConfig(p_glitch=0.2, rng_seed=5)
    a, b = tmp_path / "ga", tmp_path / "gb"
    build_glitch_dataset(toy_corpus, ccfg, GlitchTargetConfig(), a)
    build_glitch_dataset(toy_corpus, ccfg, GlitchTargetConfig(), b)
    assert _tree_digest(a) == _tree_digest(b)
