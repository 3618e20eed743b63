"""MP3 (MPEG audio) frame header parsing and whole-stream frame indexing.

Follows the ISO 11172-3 / 13818-3 header layout. Only what the corruption
pipeline needs is implemented: header decoding, frame sizing, ID3v2
skipping and a sync walker with two-header confirmation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from ..errors import DataError

MIN_FRAME_BYTES = 24


class MpegVersion(Enum):
    MPEG1 = "MPEG1"
    MPEG2 = "MPEG2"
    MPEG2_5 = "MPEG2.5"


class Layer(Enum):
    I = 1
    II = 2
    III = 3


class ChannelMode(Enum):
    STEREO = "stereo"
    JOINT = "joint"
    DUAL = "dual"
    MONO = "mono"


class HeaderError(DataError):
    """Four bytes do not form a usable frame header. ``reason`` is one of
    'no_sync', 'reserved_version', 'reserved_layer', 'reserved_bitrate',
    'free_bitrate', 'reserved_sample_rate', 'short_frame'."""

    def __init__(self, reason: str, message: str):
        super().__init__(message)
        self.reason = reason


# Bitrate tables in kbps, indexed by bitrate_index 1..14 (0 = free, 15 = reserved).
_BITRATES = {
    (MpegVersion.MPEG1, Layer.I): [None, 32, 64, 96, 128, 160, 192, 224, 256, 288, 320, 352, 384, 416, 448],
    (MpegVersion.MPEG1, Layer.II): [None, 32, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320, 384],
    (MpegVersion.MPEG1, Layer.III): [None, 32, 40, 48, 56, 64, 80, 96, 112, 128, 160, 192, 224, 256, 320],
    (MpegVersion.MPEG2, Layer.I): [None, 32, 48, 56, 64, 80, 96, 112, 128, 144, 160, 176, 192, 224, 256],
    (MpegVersion.MPEG2, Layer.II): [None, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160],
    (MpegVersion.MPEG2, Layer.III): [None, 8, 16, 24, 32, 40, 48, 56, 64, 80, 96, 112, 128, 144, 160],
}
_BITRATES[(MpegVersion.MPEG2_5, Layer.I)] = _BITRATES[(MpegVersion.MPEG2, Layer.I)]
_BITRATES[(MpegVersion.MPEG2_5, Layer.II)] = _BITRATES[(MpegVersion.MPEG2, Layer.II)]
_BITRATES[(MpegVersion.MPEG2_5, Layer.III)] = _BITRATES[(MpegVersion.MPEG2, Layer.III)]

_SAMPLE_RATES = {
    MpegVersion.MPEG1: [44100, 48000, 32000],
    MpegVersion.MPEG2: [22050, 24000, 16000],
    MpegVersion.MPEG2_5: [11025, 12000, 8000],
}


@dataclass(frozen=True)
class FrameHeader:
    mpeg_version: MpegVersion
    layer: Layer
    protection_absent: bool
    bitrate_kbps: int
    sample_rate_hz: int
    padding: bool
    channel_mode: ChannelMode


def parse_header(raw: bytes) -> FrameHeader:
    """Decode a 4-byte frame header, raising HeaderError with a distinct
    reason when the bytes cannot start a frame."""
    if len(raw) < 4:
        raise HeaderError("no_sync", "need 4 bytes")
    b0, b1, b2, b3 = raw[0], raw[1], raw[2], raw[3]
    if b0 != 0xFF or (b1 & 0xE0) != 0xE0:
        raise HeaderError("no_sync", "missing 11-bit sync pattern")

    version_bits = (b1 >> 3) & 0x03
    if version_bits == 1:
        raise HeaderError("reserved_version", "reserved MPEG version")
    version = {0: MpegVersion.MPEG2_5, 2: MpegVersion.MPEG2, 3: MpegVersion.MPEG1}[version_bits]

    layer_bits = (b1 >> 1) & 0x03
    if layer_bits == 0:
        raise HeaderError("reserved_layer", "reserved layer")
    layer = {1: Layer.III, 2: Layer.II, 3: Layer.I}[layer_bits]

    bitrate_index = (b2 >> 4) & 0x0F
    if bitrate_index == 15:
        raise HeaderError("reserved_bitrate", "reserved bitrate index")
    if bitrate_index == 0:
        # Free-format sizing is undefined without payload scanning.
        raise HeaderError("free_bitrate", "free-format bitrate unsupported")

    sr_index = (b2 >> 2) & 0x03
    if sr_index == 3:
        raise HeaderError("reserved_sample_rate", "reserved sample-rate index")

    header = FrameHeader(
        mpeg_version=version,
        layer=layer,
        protection_absent=bool(b1 & 0x01),
        bitrate_kbps=_BITRATES[(version, layer)][bitrate_index],
        sample_rate_hz=_SAMPLE_RATES[version][sr_index],
        padding=bool((b2 >> 1) & 0x01),
        channel_mode=[ChannelMode.STEREO, ChannelMode.JOINT, ChannelMode.DUAL, ChannelMode.MONO][
            (b3 >> 6) & 0x03
        ],
    )
    if frame_length_bytes(header) < MIN_FRAME_BYTES:
        raise HeaderError("short_frame", "computed frame length implausibly small")
    return header


def try_parse_header(raw: bytes) -> FrameHeader | None:
    try:
        return parse_header(raw)
    except HeaderError:
        return None


def frame_length_bytes(h: FrameHeader) -> int:
    """Total frame size in bytes including the 4-byte header."""
    bitrate = h.bitrate_kbps * 1000
    if h.layer is Layer.I:
        return (12 * bitrate // h.sample_rate_hz + int(h.padding)) * 4
    # Layers II/III: 144 coefficient halves for MPEG2/2.5 Layer III.
    coeff = 72 if (h.layer is Layer.III and h.mpeg_version is not MpegVersion.MPEG1) else 144
    return coeff * bitrate // h.sample_rate_hz + int(h.padding)


@dataclass(frozen=True)
class FrameEntry:
    byte_offset: int
    byte_length: int
    header: FrameHeader


@dataclass
class FrameIndex:
    frames: list[FrameEntry] = field(default_factory=list)
    leading_skip: int = 0
    trailing_skip: int = 0

    def emit(self, stream: bytes) -> bytes:
        """Reassemble the stream from the indexed regions (identity check)."""
        parts = [stream[: self.leading_skip]]
        parts += [stream[f.byte_offset : f.byte_offset + f.byte_length] for f in self.frames]
        if self.trailing_skip:
            parts.append(stream[-self.trailing_skip :])
        return b"".join(parts)


def _id3v2_size(stream: bytes) -> int:
    """Byte length of a leading ID3v2 tag, 0 when absent."""
    if len(stream) < 10 or stream[:3] != b"ID3":
        return 0
    if any(b & 0x80 for b in stream[6:10]):
        return 0
    size = (stream[6] << 21) | (stream[7] << 14) | (stream[8] << 7) | stream[9]
    footer = 10 if stream[5] & 0x10 else 0
    return 10 + size + footer


def walk_frames(stream: bytes) -> FrameIndex:
    """Locate all MP3 frames in a byte stream.

    A candidate frame is accepted only when its computed length lands on
    end-of-stream or another parseable header (two-header confirmation),
    guarding against false syncs inside payload bytes.
    """
    idx = FrameIndex()
    pos = _id3v2_size(stream)
    n = len(stream)

    # Scan for the first confirmed frame; everything before it is leading
    # skip. Confirmation: the computed length must land on end-of-stream or
    # on another parseable header.
    first = None
    while pos + 4 <= n:
        header = try_parse_header(stream[pos : pos + 4])
        if header is not None:
            end = pos + frame_length_bytes(header)
            if end == n or (end + 4 <= n and try_parse_header(stream[end : end + 4]) is not None):
                first = header
                break
        pos += 1
    if first is None:
        raise DataError("no valid MP3 frame found in stream")

    # After the confirmed sync, accept consecutive frames that fit; the
    # first non-header position starts the trailing skip.
    idx.leading_skip = pos
    while pos + 4 <= n:
        header = try_parse_header(stream[pos : pos + 4])
        if header is None:
            break
        length = frame_length_bytes(header)
        if pos + length > n:
            break
        idx.frames.append(FrameEntry(byte_offset=pos, byte_length=length, header=header))
        pos += length

    idx.trailing_skip = n - pos
    return idx


def is_metadata_frame(stream: bytes, frame: FrameEntry) -> bool:
    """True for a LAME/Xing info frame (first-frame length bookkeeping)."""
    head = stream[frame.byte_offset : frame.byte_offset + min(frame.byte_length, 48)]
    return b"Xing" in head or b"Info" in head
