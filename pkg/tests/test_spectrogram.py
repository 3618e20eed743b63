import numpy as np

from audiodefect.spectrogram import power_spectrogram

from conftest import sine_segment

WIN = 256
HOP = 128


def test_all_zero_segment():
    seg = sine_segment(amp=0.0)
    spec = power_spectrogram(seg)
    assert spec.frames.shape == (128, 129)
    assert np.all(spec.frames == 0.0)


def test_bin_centre_sine_energy_concentration():
    # Frequency at the centre of bin k leaks < 1% of the peak elsewhere
    # (Hann sidelobes put ~25% into the two adjacent bins, so "elsewhere"
    # excludes the immediate neighbours).
    k = 20
    freq = k * 44100 / WIN
    seg = sine_segment(freq=freq, amp=0.5)
    spec = power_spectrogram(seg)
    for f in range(10, 100, 17):
        row = spec.frames[f]
        peak = row[k]
        others = np.delete(row, [k - 1, k, k + 1])
        assert np.max(others) < 0.01 * peak


def test_single_frame_matches_direct_dft():
    rng = np.random.default_rng(7)
    seg = sine_segment(amp=0.0)
    seg.samples[:] = rng.standard_normal(16384).astype(np.float32)
    spec = power_spectrogram(seg)

    # Frame 10 starts at 10*HOP in the reflection-padded signal.
    half = WIN // 2
    padded = np.pad(seg.samples.astype(np.float64), (half, WIN - half), mode="reflect")
    frame = padded[10 * HOP : 10 * HOP + WIN].astype(np.float64) * np.hanning(WIN)
    oracle = np.abs(np.fft.rfft(frame)) ** 2
    assert np.allclose(spec.frames[10], oracle, rtol=1e-6, atol=1e-10)


def test_parseval_consistency():
    rng = np.random.default_rng(3)
    seg = sine_segment(amp=0.0)
    seg.samples[:] = (0.3 * rng.standard_normal(16384)).astype(np.float32)
    spec = power_spectrogram(seg)

    half = WIN // 2
    padded = np.pad(seg.samples.astype(np.float64), (half, WIN - half), mode="reflect")
    f = 40
    frame = padded[f * HOP : f * HOP + WIN].astype(np.float64) * np.hanning(WIN)
    time_energy = np.sum(frame**2)
    # One-sided spectrum: interior bins carry both conjugate halves.
    row = spec.frames[f].astype(np.float64)
    spectral = (2 * np.sum(row[1:-1]) + row[0] + row[-1]) / WIN
    assert abs(spectral - time_energy) <= 1e-6 * time_energy


def test_frame_count_and_locality():
    # An impulse at sample 8000 only influences frames whose window
    # covers it: frame f spans samples f*HOP - half .. f*HOP + half.
    seg = sine_segment(amp=0.0)
    seg.samples[8000] = 1.0
    spec = power_spectrogram(seg)
    nonzero = np.flatnonzero(spec.frames.sum(axis=1) > 1e-12)
    for f in nonzero:
        start = f * HOP - WIN // 2
        assert start <= 8000 < start + WIN
