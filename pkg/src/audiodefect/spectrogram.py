"""Power spectrogram aligned with the 128-value detector output grid.

A 16384-sample segment analysed with window 256 / hop 128 yields exactly
128 frames, one per output value. Frames are Hann-windowed and centred via
reflection padding, so frame f only sees samples near f * hop.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .waveio import SEGMENT_LEN, Segment

DEFAULT_WINDOW = 256
DEFAULT_HOP = 128


@dataclass
class PowerSpectrogram:
    frames: np.ndarray  # (num_frames, num_bins), non-negative
    window_size: int
    hop_size: int

    @property
    def num_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def num_bins(self) -> int:
        return self.frames.shape[1]


def power_spectrogram(
    s: Segment, window: int = DEFAULT_WINDOW, hop: int = DEFAULT_HOP
) -> PowerSpectrogram:
    """|DFT|^2 of Hann-windowed slices. Returns len(segment)//hop frames with
    window//2 + 1 bins each."""
    if window < hop:
        raise DataError(f"window ({window}) must be >= hop ({hop})")
    x = np.asarray(s.samples, dtype=np.float64)
    if x.shape[0] != SEGMENT_LEN:
        raise DataError(f"expected a {SEGMENT_LEN}-sample segment")

    half = window // 2
    padded = np.pad(x, (half, window - half), mode="reflect")
    win = np.hanning(window)
    num_frames = SEGMENT_LEN // hop
    frames = np.empty((num_frames, window // 2 + 1), dtype=np.float64)
    for f in range(num_frames):
        sl = padded[f * hop : f * hop + window] * win
        frames[f] = np.abs(np.fft.rfft(sl)) ** 2
    return PowerSpectrogram(frames=frames, window_size=window, hop_size=hop)
