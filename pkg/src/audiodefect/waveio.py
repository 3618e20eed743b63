"""Waveform representation, PCM WAV I/O, mono mixdown and segmentation.

WAV parsing is done by hand over the RIFF chunk structure so that unreadable
files, unsupported encodings and truncated data chunks are reported as
distinct errors instead of whatever a generic reader happens to raise.
Supported encodings: 16-bit integer PCM and 32-bit float PCM.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

SEGMENT_LEN = 16384

WAVE_FORMAT_PCM = 0x0001
WAVE_FORMAT_IEEE_FLOAT = 0x0003
WAVE_FORMAT_EXTENSIBLE = 0xFFFE


class UnsupportedEncodingError(DataError):
    """WAV file uses an encoding other than PCM16 / float32."""


class TruncatedFileError(DataError):
    """WAV data chunk is shorter than its declared size."""


@dataclass
class Waveform:
    """Float audio in [-1, 1]. ``samples`` has shape (frames,) for mono and
    (frames, channels) otherwise."""

    samples: np.ndarray
    sample_rate: int = 44100

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise DataError(f"sample_rate must be positive, got {self.sample_rate}")
        self.samples = np.asarray(self.samples, dtype=np.float32)

    @property
    def channel_count(self) -> int:
        return 1 if self.samples.ndim == 1 else self.samples.shape[1]

    @property
    def num_frames(self) -> int:
        return self.samples.shape[0]


@dataclass
class Segment:
    """Fixed-length analysis unit of 16384 samples."""

    samples: np.ndarray
    source_id: str = ""
    offset_samples: int = 0

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float32)
        if self.samples.shape != (SEGMENT_LEN,):
            raise DataError(
                f"segment must hold exactly {SEGMENT_LEN} samples, got shape {self.samples.shape}"
            )


def read_audio(path) -> Waveform:
    """Read a PCM WAV file (16-bit int or 32-bit float) into a Waveform."""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise DataError(f"cannot read {path}: {e}") from e

    if len(raw) < 12 or raw[:4] != b"RIFF" or raw[8:12] != b"WAVE":
        raise DataError(f"{path}: not a RIFF/WAVE file")

    fmt = None
    data = None
    pos = 12
    while pos + 8 <= len(raw):
        cid, size = struct.unpack_from("<4sI", raw, pos)
        body = raw[pos + 8 : pos + 8 + size]
        if cid == b"fmt ":
            fmt = body
        elif cid == b"data":
            if len(body) < size:
                raise TruncatedFileError(
                    f"{path}: data chunk declares {size} bytes, only {len(body)} present"
                )
            data = body
        pos += 8 + size + (size & 1)

    if fmt is None or len(fmt) < 16:
        raise DataError(f"{path}: missing fmt chunk")
    if data is None:
        raise DataError(f"{path}: missing data chunk")

    audio_format, channels, sample_rate, _, _, bits = struct.unpack_from("<HHIIHH", fmt, 0)
    if audio_format == WAVE_FORMAT_EXTENSIBLE and len(fmt) >= 26:
        audio_format = struct.unpack_from("<H", fmt, 24)[0]

    if audio_format == WAVE_FORMAT_PCM and bits == 16:
        ints = np.frombuffer(data[: len(data) - len(data) % (2 * channels)], dtype="<i2")
        samples = ints.astype(np.float32) / 32768.0
    elif audio_format == WAVE_FORMAT_IEEE_FLOAT and bits == 32:
        samples = np.frombuffer(
            data[: len(data) - len(data) % (4 * channels)], dtype="<f4"
        ).astype(np.float32)
    else:
        raise UnsupportedEncodingError(
            f"{path}: unsupported encoding (format {audio_format}, {bits} bit)"
        )

    if channels > 1:
        samples = samples.reshape(-1, channels)
    return Waveform(samples=samples, sample_rate=sample_rate)


def write_audio(w: Waveform, path, bits: int = 16) -> None:
    """Write a Waveform as PCM WAV (bits = 16 for int16, 32 for float32)."""
    peak = float(np.max(np.abs(w.samples))) if w.samples.size else 0.0
    if peak > 1.0 + 1e-6:
        raise DataError(f"sample out of range (peak {peak:.4f}); upstream synthesis bug")

    samples = w.samples if w.samples.ndim == 2 else w.samples[:, None]
    channels = samples.shape[1]
    if bits == 16:
        fmt_code, block = WAVE_FORMAT_PCM, 2 * channels
        # Symmetric with the reader's 1/32768 scale so a round trip stays
        # within one integer LSB; +1.0 saturates at 32767.
        ints = np.clip(np.round(samples * 32768.0), -32768, 32767)
        payload = ints.astype("<i2").tobytes()
    elif bits == 32:
        fmt_code, block = WAVE_FORMAT_IEEE_FLOAT, 4 * channels
        payload = samples.astype("<f4").tobytes()
    else:
        raise DataError(f"unsupported output depth: {bits}")

    fmt = struct.pack(
        "<HHIIHH", fmt_code, channels, w.sample_rate, w.sample_rate * block, block, bits
    )
    chunks = b"".join(
        [
            b"fmt ",
            struct.pack("<I", len(fmt)),
            fmt,
            b"data",
            struct.pack("<I", len(payload)),
            payload,
            b"\x00" if len(payload) & 1 else b"",
        ]
    )
    out = b"RIFF" + struct.pack("<I", 4 + len(chunks)) + b"WAVE" + chunks
    try:
        Path(path).write_bytes(out)
    except OSError as e:
        raise DataError(f"cannot write {path}: {e}") from e


def mixdown_mono(w: Waveform) -> Waveform:
    """Average all channels down to one. Mono input is returned unchanged."""
    if w.samples.ndim == 1:
        return w
    return Waveform(samples=w.samples.mean(axis=1).astype(np.float32), sample_rate=w.sample_rate)


def segment_piece(w: Waveform, max_segments: int, source_id: str = "") -> list[Segment]:
    """Cut a mono 44.1 kHz waveform into consecutive non-overlapping 16384-sample
    segments starting at offset 0. Trailing partial data is discarded."""
    if w.channel_count != 1:
        raise DataError("segment_piece expects mono input; run mixdown_mono first")
    n = min(max_segments, w.num_frames // SEGMENT_LEN)
    return [
        Segment(
            samples=w.samples[i * SEGMENT_LEN : (i + 1) * SEGMENT_LEN],
            source_id=source_id,
            offset_samples=i * SEGMENT_LEN,
        )
        for i in range(n)
    ]
