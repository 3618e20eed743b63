from .frames import FrameHeader, FrameIndex, HeaderError, frame_length_bytes, parse_header, walk_frames
from .corrupt import CorruptionConfig, CorruptionRecord, corrupt_stream, validated_corrupt
from .adapters import DecoderAdapter, EncoderAdapter

__all__ = [
    "FrameHeader",
    "FrameIndex",
    "HeaderError",
    "parse_header",
    "frame_length_bytes",
    "walk_frames",
    "CorruptionConfig",
    "CorruptionRecord",
    "corrupt_stream",
    "validated_corrupt",
    "DecoderAdapter",
    "EncoderAdapter",
]
