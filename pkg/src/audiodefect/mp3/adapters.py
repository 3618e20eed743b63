"""Subprocess adapters for external MP3 encode/decode commands.

Commands are templates with {input} / {output} (and {bitrate} for the
encoder) placeholders, treated as black boxes: input path in, output path
out, nonzero exit on failure. The bundled Rust `mp3tool` binary is the
default; any LAME/mpg123-compatible wrapper can be substituted.
"""

from __future__ import annotations

import os
import subprocess
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import AdapterError
from ..waveio import Waveform, read_audio

_REPO_TOOL = Path(__file__).resolve().parents[3] / "tools" / "mp3tool" / "target" / "release" / "mp3tool"


def default_mp3tool() -> str:
    """Path of the bundled mp3tool binary (overridable via AUDIODEFECT_MP3TOOL)."""
    env = os.environ.get("AUDIODEFECT_MP3TOOL")
    if env:
        return env
    if _REPO_TOOL.exists():
        return str(_REPO_TOOL)
    return "mp3tool"


def _run(argv: list[str], what: str) -> None:
    try:
        proc = subprocess.run(argv, capture_output=True, text=True)
    except OSError as e:
        raise AdapterError(f"{what}: cannot invoke {argv[0]}: {e}") from e
    if proc.returncode != 0:
        raise AdapterError(f"{what} failed (exit {proc.returncode}): {proc.stderr.strip()}")


@dataclass
class DecoderAdapter:
    """External MP3 -> WAV decoder command."""

    command: list[str] = field(default_factory=lambda: [default_mp3tool(), "decode", "{input}", "{output}"])
    probe_args: list[str] = field(default_factory=lambda: ["--version"])

    def probe(self) -> None:
        _run([self.command[0], *self.probe_args], "decoder probe")

    def decode_file(self, mp3_path, wav_path) -> Waveform:
        argv = [a.format(input=str(mp3_path), output=str(wav_path)) for a in self.command]
        _run(argv, "decode")
        return read_audio(wav_path)

    def decode_bytes(self, data: bytes) -> Waveform:
        with tempfile.TemporaryDirectory(prefix="addec") as d:
            mp3 = Path(d) / "in.mp3"
            wav = Path(d) / "out.wav"
            mp3.write_bytes(data)
            return self.decode_file(mp3, wav)


@dataclass
class EncoderAdapter:
    """External WAV -> MP3 CBR encoder command."""

    command: list[str] = field(
        default_factory=lambda: [default_mp3tool(), "encode", "{input}", "{output}", "--bitrate", "{bitrate}"]
    )
    bitrate_kbps: int = 128
    probe_args: list[str] = field(default_factory=lambda: ["--version"])

    def probe(self) -> None:
        _run([self.command[0], *self.probe_args], "encoder probe")

    def encode_file(self, wav_path, mp3_path) -> None:
        argv = [
            a.format(input=str(wav_path), output=str(mp3_path), bitrate=self.bitrate_kbps)
            for a in self.command
        ]
        _run(argv, "encode")

    def encode_waveform(self, w: Waveform) -> bytes:
        from ..waveio import write_audio

        with tempfile.TemporaryDirectory(prefix="adenc") as d:
            wav = Path(d) / "in.wav"
            mp3 = Path(d) / "out.mp3"
            write_audio(w, wav)
            self.encode_file(wav, mp3)
            return mp3.read_bytes()
