"""Glitch ground truth from spectral comparison of clean vs degraded decodings.

Per output frame we take the RMS log-power-spectral distance between the
two aligned segments and flag frames whose distance exceeds a threshold.
Unaffected regions decode bit-identically, so their distance is exactly 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .spectrogram import power_spectrogram
from .waveio import Segment


@dataclass
class GlitchTargetConfig:
    threshold_tau: float = 1.0
    epsilon_floor: float = 1e-10

    def __post_init__(self):
        if self.threshold_tau <= 0:
            raise DataError("threshold_tau must be positive")
        if self.epsilon_floor <= 0:
            raise DataError("epsilon_floor must be positive")


def frame_distances(clean: Segment, degraded: Segment, cfg: GlitchTargetConfig) -> np.ndarray:
    """Per-frame RMS difference of log power spectra (128 values)."""
    if clean.offset_samples != degraded.offset_samples or clean.source_id != degraded.source_id:
        raise DataError(
            "glitch_target requires time-aligned segments "
            f"(clean {clean.source_id}@{clean.offset_samples} vs "
            f"degraded {degraded.source_id}@{degraded.offset_samples})"
        )
    pc = power_spectrogram(clean).frames
    pd = power_spectrogram(degraded).frames
    diff = np.log(pd + cfg.epsilon_floor) - np.log(pc + cfg.epsilon_floor)
    return np.sqrt(np.mean(diff**2, axis=1))


def glitch_target(clean: Segment, degraded: Segment, cfg: GlitchTargetConfig) -> np.ndarray:
    """128-value binary vector: 1 where the spectral distance exceeds tau."""
    return (frame_distances(clean, degraded, cfg) > cfg.threshold_tau).astype(np.float32)
