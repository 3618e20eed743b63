#!/usr/bin/env python3
"""Small SoX-like effects processor used as the default post-processing
command when SoX itself is not installed.

Usage: fx_process.py IN.wav OUT.wav [EFFECT ARGS]...

Supported effect vocabulary (a subset of SoX's, with a simplified compand):
  reverb AMOUNT              amount in percent (wet mix, short decay)
  equalizer FREQ WIDTHq GAIN peaking biquad at FREQ Hz, GAIN dB
  compand RATIO              static power-law compression toward 1:RATIO

With no effects the input is copied through unchanged.
"""

import sys
from pathlib import Path

import numpy as np
from scipy.signal import lfilter

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from audiodefect.waveio import Waveform, read_audio, write_audio  # noqa: E402


def peaking_eq(x, sr, freq, q, gain_db):
    # RBJ audio EQ cookbook peaking filter.
    a_lin = 10.0 ** (gain_db / 40.0)
    w0 = 2 * np.pi * freq / sr
    alpha = np.sin(w0) / (2 * q)
    b = [1 + alpha * a_lin, -2 * np.cos(w0), 1 - alpha * a_lin]
    a = [1 + alpha / a_lin, -2 * np.cos(w0), 1 - alpha / a_lin]
    return lfilter(np.array(b) / a[0], np.array(a) / a[0], x)


def reverb(x, sr, amount_pct):
    wet = amount_pct / 100.0
    delays = [int(sr * t) for t in (0.013, 0.019, 0.027)]
    out = x.copy()
    for d in delays:
        comb = np.zeros_like(x)
        comb[d:] = x[:-d]
        out = out + wet * 0.3 * comb
    return out / (1.0 + wet * 0.9)


def compand(x, ratio):
    # Static curve: unity below the knee, power-law compression above.
    knee = 0.3
    y = x.copy()
    hot = np.abs(x) > knee
    y[hot] = np.sign(x[hot]) * (knee + (np.abs(x[hot]) - knee) ** (1.0 / ratio) * (1 - knee) ** (1 - 1.0 / ratio))
    return y


def main(argv):
    if len(argv) >= 2 and argv[1] == "--version":
        print("fx_process 0.1.0")
        return 0
    if len(argv) < 3:
        print(__doc__, file=sys.stderr)
        return 1
    in_path, out_path = argv[1], argv[2]
    w = read_audio(in_path)
    x = w.samples.astype(np.float64)
    if x.ndim == 2:
        x = x.mean(axis=1)

    args = argv[3:]
    i = 0
    while i < len(args):
        effect = args[i]
        if effect == "reverb":
            x = reverb(x, w.sample_rate, float(args[i + 1]))
            i += 2
        elif effect == "equalizer":
            freq = float(args[i + 1])
            q = float(args[i + 2].rstrip("q"))
            gain = float(args[i + 3])
            x = peaking_eq(x, w.sample_rate, freq, q, gain)
            i += 4
        elif effect == "compand":
            x = compand(x, float(args[i + 1]))
            i += 2
        else:
            print(f"unknown effect: {effect}", file=sys.stderr)
            return 1

    x = np.clip(x, -1.0, 1.0)
    write_audio(Waveform(samples=x.astype(np.float32), sample_rate=w.sample_rate), out_path, bits=32)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
