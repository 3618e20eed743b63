"""Format-aware byte corruption of MP3 streams with decode validation.

Frames are independently selected with probability p_glitch; a selected
frame has a byte range (normal-length draw, clamped) overwritten with
uniform random bytes, header included. validated_corrupt then checks each
candidate corruption against an external decoder and reverts frames whose
corruption breaks decoding or changes the decoded sample count, so the
degraded decoding always has exactly the clean decoding's length.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import DataError
from ..waveio import Waveform
from .adapters import DecoderAdapter
from .frames import FrameIndex, is_metadata_frame, walk_frames


@dataclass
class CorruptionConfig:
    p_glitch: float = 0.05
    overwrite_mean: float = 120.0
    overwrite_std: float = 60.0
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p_glitch < 1:
            raise DataError(f"p_glitch must be in [0, 1), got {self.p_glitch}")
        if self.overwrite_mean <= 0 or self.overwrite_std < 0:
            raise DataError("overwrite_mean must be > 0 and overwrite_std >= 0")


@dataclass
class CorruptionRecord:
    frame_ordinal: int
    start_byte_in_frame: int
    length_bytes: int
    rng_draws: dict = field(default_factory=dict)
    survived: bool = True

    def to_json(self) -> dict:
        return {
            "frame_ordinal": self.frame_ordinal,
            "start_byte_in_frame": self.start_byte_in_frame,
            "length_bytes": self.length_bytes,
            "rng_draws": self.rng_draws,
            "survived": self.survived,
        }

    @classmethod
    def from_json(cls, d: dict) -> "CorruptionRecord":
        return cls(**d)


def plan_corruptions(
    idx: FrameIndex, cfg: CorruptionConfig, stream: bytes | None = None
) -> list[CorruptionRecord]:
    """Draw the full corruption plan for a stream, one record per selected
    frame. The replacement bytes are recorded (hex) so a plan is replayable.

    When the stream is given, a leading Xing/Info metadata frame is skipped:
    corrupting it changes decoder length bookkeeping, not audio.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    records = []
    for ordinal, frame in enumerate(idx.frames):
        select = rng.random()
        if select >= cfg.p_glitch:
            continue
        raw_length = rng.normal(cfg.overwrite_mean, cfg.overwrite_std)
        length = int(np.clip(round(raw_length), 1, frame.byte_length))
        start = int(rng.integers(0, frame.byte_length - length + 1))
        payload = rng.integers(0, 256, size=length, dtype=np.uint8).tobytes()
        if stream is not None and is_metadata_frame(stream, frame):
            continue
        records.append(
            CorruptionRecord(
                frame_ordinal=ordinal,
                start_byte_in_frame=start,
                length_bytes=length,
                rng_draws={
                    "select": select,
                    "raw_length": raw_length,
                    "bytes_hex": payload.hex(),
                },
            )
        )
    return records


def _apply(buf: bytearray, idx: FrameIndex, rec: CorruptionRecord) -> bytes:
    frame = idx.frames[rec.frame_ordinal]
    lo = frame.byte_offset + rec.start_byte_in_frame
    hi = lo + rec.length_bytes
    original = bytes(buf[lo:hi])
    buf[lo:hi] = bytes.fromhex(rec.rng_draws["bytes_hex"])
    return original


def corrupt_stream(
    stream: bytes, idx: FrameIndex, cfg: CorruptionConfig
) -> tuple[bytes, list[CorruptionRecord]]:
    """Apply the seeded corruption plan without decode validation."""
    records = plan_corruptions(idx, cfg, stream)
    buf = bytearray(stream)
    for rec in records:
        _apply(buf, idx, rec)
    return bytes(buf), records


def validated_corrupt(
    stream: bytes,
    cfg: CorruptionConfig,
    decoder: DecoderAdapter,
    records: list[CorruptionRecord] | None = None,
) -> tuple[bytes, list[CorruptionRecord], Waveform, Waveform]:
    """Corrupt a stream frame by frame, reverting any corruption the decoder
    cannot survive with an unchanged sample count.

    Returns (final bytes, records, degraded decoding, clean decoding); the
    two decodings always have identical length. Pass ``records`` to replay
    or hand-craft a corruption plan instead of drawing one from cfg.
    """
    idx = walk_frames(stream)
    clean = decoder.decode_bytes(stream)
    if records is None:
        records = plan_corruptions(idx, cfg, stream)

    buf = bytearray(stream)
    for rec in records:
        original = _apply(buf, idx, rec)
        try:
            decoded = decoder.decode_bytes(bytes(buf))
            ok = decoded.num_frames == clean.num_frames
        except Exception:
            ok = False
        if not ok:
            frame = idx.frames[rec.frame_ordinal]
            lo = frame.byte_offset + rec.start_byte_in_frame
            buf[lo : lo + rec.length_bytes] = original
            rec.survived = False

    final = bytes(buf)
    degraded = decoder.decode_bytes(final) if any(r.survived for r in records) else clean
    if degraded.num_frames != clean.num_frames:
        raise DataError("degraded decoding length diverged despite per-frame validation")
    return final, records, degraded, clean
