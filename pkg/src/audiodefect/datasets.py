"""Dataset builders and the on-disk dataset format.

A dataset directory holds one subdirectory per split (train/val/test),
each with 32-bit-float segment WAVs and a manifest.jsonl carrying one
record per segment: segment_id, source piece, offset, the 128-value
target, defect provenance and any post-processing parameters. A top-level
manifest.json records the full build configuration, so rebuilding with the
same corpus and seed is byte-identical.
"""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np

from .clicks import ClickConfig, click_target, insert_click
from .errors import AdapterError, DataError
from .glitch_target import GlitchTargetConfig, glitch_target
from .metrics import config_digest
from .mp3.adapters import DecoderAdapter, EncoderAdapter
from .mp3.corrupt import CorruptionConfig, validated_corrupt
from .postprocess import PostProcessorAdapter, PostProcessSpec, postprocess
from .waveio import Segment, Waveform, mixdown_mono, read_audio, segment_piece, write_audio

SPLITS = ("train", "val", "test")
DEFAULT_RATIOS = (0.69, 0.155, 0.155)
DEFAULT_MAX_SEGMENTS = 50

AUDIO_SUFFIXES = (".wav",)


def list_corpus(corpus_path) -> list[Path]:
    corpus = Path(corpus_path)
    pieces = sorted(p for p in corpus.iterdir() if p.suffix.lower() in AUDIO_SUFFIXES)
    if not pieces:
        raise DataError(f"corpus {corpus} contains no audio files")
    return pieces


def split_pieces(pieces: list[Path], ratios, rng: np.random.Generator) -> dict[str, list[Path]]:
    """Disjoint train/val/test assignment by piece (never splits a piece)."""
    n = len(pieces)
    order = list(rng.permutation(n))
    counts = [int(n * r) for r in ratios]
    counts[0] = n - counts[1] - counts[2]
    if n >= 3:
        for i in (1, 2):
            if counts[i] == 0:
                counts[i] += 1
                counts[0] -= 1
    out: dict[str, list[Path]] = {}
    pos = 0
    for split, c in zip(SPLITS, counts):
        out[split] = [pieces[i] for i in sorted(order[pos : pos + c])]
        pos += c
    return out


def _write_manifest_line(fh, record: dict) -> None:
    fh.write(json.dumps(record, sort_keys=True) + "\n")


def _finalize(out_dir: Path, kind: str, config: dict, counts: dict, extra: dict | None = None) -> dict:
    top = {
        "kind": kind,
        "config": config,
        "counts": counts,
    }
    if extra:
        top.update(extra)
    top["dataset_id"] = config_digest(top)
    (out_dir / "manifest.json").write_text(json.dumps(top, indent=2, sort_keys=True) + "\n")
    return top


def dataset_id(dataset_path) -> str:
    top = json.loads((Path(dataset_path) / "manifest.json").read_text())
    return top["dataset_id"]


def build_click_dataset(
    corpus_path,
    cfg: ClickConfig,
    out_path,
    post_adapter: PostProcessorAdapter | None = None,
    ratios=DEFAULT_RATIOS,
    max_segments: int = DEFAULT_MAX_SEGMENTS,
) -> dict:
    """Insert clicks into corpus segments and persist segments + targets.

    Every stochastic draw flows from cfg.rng_seed through per-piece
    sub-generators, so the result does not depend on processing order.
    """
    pieces = list_corpus(corpus_path)
    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    assignment = split_pieces(pieces, ratios, np.random.default_rng(cfg.rng_seed))
    piece_index = {p: i for i, p in enumerate(pieces)}

    counts = {}
    positives = 0
    total_values = 0
    for split in SPLITS:
        split_dir = out_dir / split
        split_dir.mkdir(exist_ok=True)
        n_segments = 0
        with open(split_dir / "manifest.jsonl", "w") as manifest:
            for piece in assignment[split]:
                rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, piece_index[piece]]))
                wave = mixdown_mono(read_audio(piece))
                for seg in segment_piece(wave, max_segments, source_id=piece.stem):
                    seg_out, event = insert_click(seg, cfg, rng)
                    spec = None
                    if post_adapter is not None:
                        # Applied regardless of whether a click was inserted.
                        spec = PostProcessSpec.draw(rng, seed=cfg.rng_seed)
                        seg_out = postprocess(seg_out, spec, post_adapter)
                    target = click_target(event)
                    seg_id = f"{piece.stem}_{seg.offset_samples:08d}"
                    write_audio(
                        Waveform(samples=seg_out.samples, sample_rate=44100),
                        split_dir / f"{seg_id}.wav",
                        bits=32,
                    )
                    _write_manifest_line(
                        manifest,
                        {
                            "segment_id": seg_id,
                            "source_id": seg.source_id,
                            "offset": seg.offset_samples,
                            "target": target.astype(int).tolist(),
                            "provenance": {"click": event.to_json() if event else None},
                            "postprocess": spec.to_json() if spec else None,
                        },
                    )
                    n_segments += 1
                    positives += int(target.sum())
                    total_values += target.size
        counts[split] = n_segments

    if total_values == 0:
        raise DataError("corpus produced no segments (all pieces shorter than 16384 samples?)")
    return _finalize(
        out_dir,
        "click",
        {"click": dataclasses.asdict(cfg), "ratios": list(ratios), "max_segments": max_segments,
         "postprocess": post_adapter is not None},
        counts,
        {"positive_fraction": positives / total_values},
    )


def build_glitch_dataset(
    corpus_path,
    ccfg: CorruptionConfig,
    gcfg: GlitchTargetConfig,
    out_path,
    encoder: EncoderAdapter | None = None,
    decoder: DecoderAdapter | None = None,
    ratios=DEFAULT_RATIOS,
    max_segments: int = DEFAULT_MAX_SEGMENTS,
) -> dict:
    """Encode each piece to 128 kbps mono MP3, corrupt it with decode
    validation, and persist degraded segments with spectral-distance targets.

    Corrupted streams and their corruption records are cached side by side
    under cache/ as <piece>.glitch.mp3 + <piece>.glitch.json.
    """
    encoder = encoder or EncoderAdapter()
    decoder = decoder or DecoderAdapter()
    encoder.probe()
    decoder.probe()

    pieces = list_corpus(corpus_path)
    out_dir = Path(out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    cache_dir = out_dir / "cache"
    cache_dir.mkdir(exist_ok=True)
    assignment = split_pieces(pieces, ratios, np.random.default_rng(ccfg.rng_seed))
    piece_index = {p: i for i, p in enumerate(pieces)}

    counts = {}
    positives = 0
    total_values = 0
    for split in SPLITS:
        split_dir = out_dir / split
        split_dir.mkdir(exist_ok=True)
        n_segments = 0
        with open(split_dir / "manifest.jsonl", "w") as manifest:
            for piece in assignment[split]:
                piece_seed = int(
                    np.random.SeedSequence([ccfg.rng_seed, piece_index[piece]]).generate_state(1)[0]
                )
                piece_cfg = CorruptionConfig(
                    p_glitch=ccfg.p_glitch,
                    overwrite_mean=ccfg.overwrite_mean,
                    overwrite_std=ccfg.overwrite_std,
                    rng_seed=piece_seed,
                )
                wave = mixdown_mono(read_audio(piece))
                stream = encoder.encode_waveform(wave)
                final, records, degraded, clean = validated_corrupt(stream, piece_cfg, decoder)

                (cache_dir / f"{piece.stem}.glitch.mp3").write_bytes(final)
                (cache_dir / f"{piece.stem}.glitch.json").write_text(
                    json.dumps(
                        {
                            "config": dataclasses.asdict(piece_cfg),
                            "records": [r.to_json() for r in records],
                        },
                        indent=2,
                        sort_keys=True,
                    )
                    + "\n"
                )

                clean_segs = segment_piece(clean, max_segments, source_id=piece.stem)
                degraded_segs = segment_piece(degraded, max_segments, source_id=piece.stem)
                for cseg, dseg in zip(clean_segs, degraded_segs):
                    target = glitch_target(cseg, dseg, gcfg)
                    seg_id = f"{piece.stem}_{cseg.offset_samples:08d}"
                    write_audio(
                        Waveform(samples=dseg.samples, sample_rate=44100),
                        split_dir / f"{seg_id}.wav",
                        bits=32,
                    )
                    _write_manifest_line(
                        manifest,
                        {
                            "segment_id": seg_id,
                            "source_id": cseg.source_id,
                            "offset": cseg.offset_samples,
                            "target": target.astype(int).tolist(),
                            "provenance": {
                                "glitch_json": f"cache/{piece.stem}.glitch.json",
                                "surviving_records": [
                                    r.frame_ordinal for r in records if r.survived
                                ],
                            },
                            "postprocess": None,
                        },
                    )
                    n_segments += 1
                    positives += int(target.sum())
                    total_values += target.size
        counts[split] = n_segments

    if total_values == 0:
        raise DataError("corpus produced no segments (all pieces shorter than 16384 samples?)")
    return _finalize(
        out_dir,
        "glitch",
        {
            "corruption": dataclasses.asdict(ccfg),
            "glitch_target": dataclasses.asdict(gcfg),
            "ratios": list(ratios),
            "max_segments": max_segments,
        },
        counts,
        {"positive_fraction": positives / total_values},
    )


class DiskDataset:
    """Indexable view over one split of a built dataset.

    Targets come from the manifest at construction time; segment audio is
    read lazily per access and cached.
    """

    def __init__(self, dataset_path, split: str):
        self.split_dir = Path(dataset_path) / split
        manifest = self.split_dir / "manifest.jsonl"
        if not manifest.exists():
            raise DataError(f"missing manifest for split '{split}' in {dataset_path}")
        with open(manifest) as fh:
            self.records = [json.loads(line) for line in fh]
        self.targets = np.asarray([r["target"] for r in self.records], dtype=np.float32)
        self._cache: dict[int, np.ndarray] = {}

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, i: int):
        if i not in self._cache:
            wav = self.split_dir / f"{self.records[i]['segment_id']}.wav"
            self._cache[i] = read_audio(wav).samples.astype(np.float32)
        return self._cache[i], self.targets[i]

    @property
    def positive_prior(self) -> float:
        return float(self.targets.mean()) if self.targets.size else 0.0


def iter_dataset(dataset_path, split: str):
    """Yield (Segment, target array, manifest record) for one split."""
    split_dir = Path(dataset_path) / split
    manifest = split_dir / "manifest.jsonl"
    if not manifest.exists():
        raise DataError(f"missing manifest for split '{split}' in {dataset_path}")
    with open(manifest) as fh:
        for line in fh:
            record = json.loads(line)
            wav = split_dir / f"{record['segment_id']}.wav"
            wave = read_audio(wav)
            if wave.num_frames != 16384:
                raise DataError(f"{wav}: segment length {wave.num_frames} != 16384")
            seg = Segment(
                samples=wave.samples,
                source_id=record["source_id"],
                offset_samples=record["offset"],
            )
            target = np.asarray(record["target"], dtype=np.float32)
            yield seg, target, record
