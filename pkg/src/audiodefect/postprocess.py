"""Mild post-processing of segments through an external effects processor.

The adapter invokes an external command (SoX, or the bundled
scripts/fx_process.py fallback) on a segment written to WAV, with effect
arguments drawn from a PostProcessSpec. Parameter ranges are deliberately
narrow so processing only mildly alters the signal.
"""

from __future__ import annotations

import math
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AdapterError, DataError
from .waveio import SEGMENT_LEN, Segment, Waveform, read_audio, write_audio

_FX_SCRIPT = Path(__file__).resolve().parents[2] / "scripts" / "fx_process.py"

REVERB_MAX = 25.0
EQ_FREQ_RANGE = (200.0, 8000.0)
EQ_GAIN_RANGE = (-3.0, 3.0)
COMPAND_RATIO_RANGE = (1.0, 2.0)


@dataclass
class PostProcessSpec:
    reverb_amount: float = 0.0  # percent, [0, 25]
    eq_band1: tuple[float, float] = (1000.0, 0.0)  # (centre Hz, gain dB)
    eq_band2: tuple[float, float] = (4000.0, 0.0)
    compand_ratio: float = 1.0
    reverb_enabled: bool = False
    eq_enabled: bool = False
    compand_enabled: bool = False
    rng_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.reverb_amount <= REVERB_MAX:
            raise DataError(f"reverb_amount outside [0, {REVERB_MAX}]")
        for freq, gain in (self.eq_band1, self.eq_band2):
            if not EQ_FREQ_RANGE[0] <= freq <= EQ_FREQ_RANGE[1]:
                raise DataError(f"EQ centre {freq} Hz outside {EQ_FREQ_RANGE}")
            if not EQ_GAIN_RANGE[0] <= gain <= EQ_GAIN_RANGE[1]:
                raise DataError(f"EQ gain {gain} dB outside {EQ_GAIN_RANGE}")
        if not COMPAND_RATIO_RANGE[0] <= self.compand_ratio <= COMPAND_RATIO_RANGE[1]:
            raise DataError(f"compand ratio outside {COMPAND_RATIO_RANGE}")

    @classmethod
    def draw(cls, rng: np.random.Generator, seed: int = 0) -> "PostProcessSpec":
        """Random combination of effects within the mild ranges."""
        log_lo, log_hi = math.log(EQ_FREQ_RANGE[0]), math.log(EQ_FREQ_RANGE[1])
        return cls(
            reverb_amount=float(rng.uniform(0, REVERB_MAX)),
            eq_band1=(float(math.exp(rng.uniform(log_lo, log_hi))), float(rng.uniform(*EQ_GAIN_RANGE))),
            eq_band2=(float(math.exp(rng.uniform(log_lo, log_hi))), float(rng.uniform(*EQ_GAIN_RANGE))),
            compand_ratio=float(rng.uniform(*COMPAND_RATIO_RANGE)),
            reverb_enabled=bool(rng.random() < 0.5),
            eq_enabled=bool(rng.random() < 0.5),
            compand_enabled=bool(rng.random() < 0.5),
            rng_seed=seed,
        )

    def effect_args(self) -> list[str]:
        """SoX-style effect argument list for the processor command."""
        args: list[str] = []
        if self.reverb_enabled:
            args += ["reverb", f"{self.reverb_amount:.3f}"]
        if self.eq_enabled:
            for freq, gain in (self.eq_band1, self.eq_band2):
                args += ["equalizer", f"{freq:.1f}", "1q", f"{gain:.3f}"]
        if self.compand_enabled:
            args += ["compand", f"{self.compand_ratio:.3f}"]
        return args

    def to_json(self) -> dict:
        return {
            "reverb_amount": self.reverb_amount,
            "eq_band1": list(self.eq_band1),
            "eq_band2": list(self.eq_band2),
            "compand_ratio": self.compand_ratio,
            "reverb_enabled": self.reverb_enabled,
            "eq_enabled": self.eq_enabled,
            "compand_enabled": self.compand_enabled,
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_json(cls, d: dict) -> "PostProcessSpec":
        d = dict(d)
        d["eq_band1"] = tuple(d["eq_band1"])
        d["eq_band2"] = tuple(d["eq_band2"])
        return cls(**d)


@dataclass
class PostProcessorAdapter:
    """External command template: {input} {output} followed by effect args."""

    command: list[str] = field(default_factory=lambda: [sys.executable, str(_FX_SCRIPT), "{input}", "{output}"])
    probe_args: list[str] | None = None

    def probe(self) -> None:
        argv = [self.command[0]]
        argv += self.probe_args if self.probe_args is not None else [self.command[1], "--version"]
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except OSError as e:
            raise AdapterError(f"post-processor probe: cannot invoke {argv[0]}: {e}") from e
        if proc.returncode != 0:
            raise AdapterError(f"post-processor probe failed: {proc.stderr.strip()}")

    def process_file(self, in_wav, out_wav, spec: PostProcessSpec) -> None:
        argv = [a.format(input=str(in_wav), output=str(out_wav)) for a in self.command]
        argv += spec.effect_args()
        try:
            proc = subprocess.run(argv, capture_output=True, text=True)
        except OSError as e:
            raise AdapterError(f"post-processor: cannot invoke {argv[0]}: {e}") from e
        if proc.returncode != 0:
            raise AdapterError(f"post-processor failed (exit {proc.returncode}): {proc.stderr.strip()}")


def postprocess(s: Segment, spec: PostProcessSpec, tool: PostProcessorAdapter) -> Segment:
    """Run a segment through the external processor; output is trimmed or
    zero-padded back to 16384 samples (reverb tails cut)."""
    with tempfile.TemporaryDirectory(prefix="adfx") as d:
        in_wav = Path(d) / "in.wav"
        out_wav = Path(d) / "out.wav"
        write_audio(Waveform(samples=s.samples, sample_rate=44100), in_wav, bits=32)
        tool.process_file(in_wav, out_wav, spec)
        processed = read_audio(out_wav)
    samples = processed.samples if processed.samples.ndim == 1 else processed.samples.mean(axis=1)
    if samples.shape[0] == 0:
        raise AdapterError("post-processor produced empty output")
    if samples.shape[0] >= SEGMENT_LEN:
        samples = samples[:SEGMENT_LEN]
    else:
        samples = np.pad(samples, (0, SEGMENT_LEN - samples.shape[0]))
    samples = np.clip(samples, -1.0, 1.0)
    return Segment(samples=samples, source_id=s.source_id, offset_samples=s.offset_samples)
