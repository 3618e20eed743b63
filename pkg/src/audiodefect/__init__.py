"""Toolkit for synthesizing and detecting click and MP3-corruption audio defects."""

__version__ = "0.1.0"

SEGMENT_LEN = 16384
TARGET_LEN = 128
SAMPLE_RATE = 44100
