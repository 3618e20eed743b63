import subprocess
from pathlib import Path

import numpy as np
import pytest

from audiodefect.waveio import Segment, Waveform, write_audio

REPO = Path(__file__).resolve().parents[1]
MP3TOOL = REPO / "tools" / "mp3tool" / "target" / "release" / "mp3tool"

# One "[ACCEPTANCE nn] PASS/FAIL" line per acceptance criterion, echoed in
# the terminal summary so they survive output capture.
ACCEPTANCE_VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_VERDICTS:
            terminalreporter.write_line(line)


def _ensure_mp3tool() -> Path:
    if MP3TOOL.exists():
        return MP3TOOL
    subprocess.run(
        ["cargo", "build", "--release"],
        cwd=REPO / "tools" / "mp3tool",
        check=True,
        capture_output=True,
    )
    return MP3TOOL


@pytest.fixture(scope="session")
def mp3tool() -> Path:
    return _ensure_mp3tool()


def sine_segment(freq=440.0, amp=0.25, phase=0.0, n=16384, sr=44100, source_id="sine"):
    t = np.arange(n) / sr
    x = (amp * np.sin(2 * np.pi * freq * t + phase)).astype(np.float32)
    return Segment(samples=x, source_id=source_id, offset_samples=0)


def noise_wave(seconds=2.0, amp=0.1, seed=0, sr=44100):
    rng = np.random.default_rng(seed)
    n = int(seconds * sr)
    return Waveform(samples=(amp * rng.standard_normal(n)).astype(np.float32), sample_rate=sr)


@pytest.fixture()
def toy_corpus(tmp_path):
    """Four short tonal pieces (~2 s each) on disk."""
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    rng = np.random.default_rng(42)
    for i in range(4):
        n = 2 * 44100
        t = np.arange(n) / 44100
        x = 0.3 * np.sin(2 * np.pi * (200 + 80 * i) * t)
        x += 0.02 * rng.standard_normal(n)
        write_audio(Waveform(samples=x.astype(np.float32), sample_rate=44100),
                    corpus / f"piece{i}.wav", bits=16)
    return corpus


@pytest.fixture(scope="session")
def encoded_noise(mp3tool, tmp_path_factory):
    """A 5-second noise piece encoded to 128 kbps CBR mono MP3 bytes."""
    from audiodefect.mp3.adapters import EncoderAdapter

    wave = noise_wave(seconds=5.0, seed=1)
    return EncoderAdapter().encode_waveform(wave), wave
