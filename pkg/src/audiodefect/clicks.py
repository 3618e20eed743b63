"""Click defect insertion and per-segment target vectors.

A click is a 1-3 sample jump: the same signed offset (uniform in [0.3, 1))
is added to each affected sample, and the sign is inverted event-wide when
the initial sign would clip any affected sample. At most one click per
segment, inserted with probability p_click.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .waveio import SEGMENT_LEN, Segment

TARGET_LEN = 128
SAMPLES_PER_TARGET = SEGMENT_LEN // TARGET_LEN  # 128


@dataclass
class ClickConfig:
    p_click: float = 0.1
    min_offset: float = 0.3
    max_offset: float = 1.0  # exclusive
    min_len: int = 1
    max_len: int = 3
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.p_click <= 1:
            raise DataError(f"p_click must be in [0, 1], got {self.p_click}")
        if not 0 < self.min_offset < self.max_offset <= 1.0:
            raise DataError("offsets must satisfy 0 < min < max <= 1")
        if not 1 <= self.min_len <= self.max_len:
            raise DataError("lengths must satisfy 1 <= min_len <= max_len")


@dataclass
class ClickEvent:
    position: int
    length: int
    offset: float
    sign: int  # +-1, after clipping correction

    def to_json(self) -> dict:
        return {
            "position": self.position,
            "length": self.length,
            "offset": self.offset,
            "sign": self.sign,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ClickEvent":
        return cls(**d)


def insert_click(
    s: Segment, cfg: ClickConfig, rng: np.random.Generator
) -> tuple[Segment, ClickEvent | None]:
    """Insert at most one click into a copy of the segment.

    Draw order is fixed (gate, length, position, offset, sign) so a seeded
    generator reproduces the event stream exactly.
    """
    if rng.random() >= cfg.p_click:
        return s, None

    length = int(rng.integers(cfg.min_len, cfg.max_len + 1))
    position = int(rng.integers(0, SEGMENT_LEN - length + 1))
    offset = float(rng.uniform(cfg.min_offset, cfg.max_offset))
    sign = 1 if rng.random() < 0.5 else -1

    window = s.samples[position : position + length].astype(np.float64)
    if np.any(np.abs(window + sign * offset) > 1.0):
        sign = -sign
    if np.any(np.abs(window + sign * offset) > 1.0):
        # Both directions clip; cannot insert without violating range.
        return s, None

    out = s.samples.copy()
    out[position : position + length] = (window + sign * offset).astype(np.float32)
    event = ClickEvent(position=position, length=length, offset=offset, sign=sign)
    return Segment(samples=out, source_id=s.source_id, offset_samples=s.offset_samples), event


def click_target(e: ClickEvent | None) -> np.ndarray:
    """128-value binary vector marking the output frame of every affected sample."""
    target = np.zeros(TARGET_LEN, dtype=np.float32)
    if e is not None:
        for p in range(e.position, e.position + e.length):
            target[p // SAMPLES_PER_TARGET] = 1.0
    return target
