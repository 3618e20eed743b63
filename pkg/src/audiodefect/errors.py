"""Exception hierarchy shared across the toolkit.

The CLI maps these onto exit codes: DataError -> 2, AdapterError -> 3.
"""


class AudioDefectError(Exception):
    """Base class for all toolkit errors."""


class DataError(AudioDefectError):
    """Malformed or unusable input data (audio files, streams, datasets)."""


class AdapterError(AudioDefectError):
    """External subprocess adapter (encoder/decoder/post-processor) failed."""
