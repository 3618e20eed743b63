import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from audiodefect.errors import DataError
from audiodefect.waveio import (
    Segment,
    Waveform,
    mixdown_mono,
    read_audio,
    segment_piece,
    write_audio,
)
from audiodefect.waveio import TruncatedFileError, UnsupportedEncodingError


def test_silence_round_trip(tmp_path):
    w = Waveform(samples=np.zeros(44100, dtype=np.float32), sample_rate=44100)
    p = tmp_path / "silence.wav"
    write_audio(w, p, bits=16)
    back = read_audio(p)
    assert back.sample_rate == 44100
    assert back.num_frames == 44100
    assert np.all(back.samples == 0.0)


def test_pcm16_scale_endpoints(tmp_path):
    # -32768 maps to -1.0; +1.0 maps to the format maximum without wrap.
    p = tmp_path / "end.wav"
    w = Waveform(samples=np.array([-1.0, 1.0, 0.0], dtype=np.float32), sample_rate=44100)
    write_audio(w, p, bits=16)
    raw = p.read_bytes()
    data = np.frombuffer(raw[-6:], dtype="<i2")
    assert data[0] == -32768
    assert data[1] == 32767
    back = read_audio(p)
    assert back.samples[0] == pytest.approx(-1.0)
    assert back.samples[1] == pytest.approx(1.0, abs=2**-15)


def test_pcm16_round_trip_noise(tmp_path):
    rng = np.random.default_rng(0)
    x = rng.uniform(-0.99, 0.99, 8192).astype(np.float32)
    p = tmp_path / "n.wav"
    write_audio(Waveform(samples=x, sample_rate=44100), p, bits=16)
    back = read_audio(p)
    assert np.max(np.abs(back.samples - x)) <= 2**-15


def test_float32_round_trip_exact(tmp_path):
    rng = np.random.default_rng(1)
    x = rng.uniform(-1, 1, 4096).astype(np.float32)
    p = tmp_path / "f.wav"
    write_audio(Waveform(samples=x, sample_rate=44100), p, bits=32)
    back = read_audio(p)
    assert np.array_equal(back.samples, x)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 2000), st.integers(0, 2**32 - 1))
def test_round_trip_property(tmp_path_factory, n, seed):
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1, 1, n).astype(np.float32)
    p = tmp_path_factory.mktemp("rt") / "x.wav"
    write_audio(Waveform(samples=x, sample_rate=44100), p, bits=16)
    back = read_audio(p)
    assert back.num_frames == n
    assert np.max(np.abs(back.samples - x)) <= 2**-15


def test_stereo_read_and_mixdown(tmp_path):
    x = np.stack([np.full(100, 0.2, np.float32), np.full(100, 0.6, np.float32)], axis=1)
    p = tmp_path / "st.wav"
    write_audio(Waveform(samples=x, sample_rate=44100), p, bits=16)
    mono = mixdown_mono(read_audio(p))
    assert mono.samples.ndim == 1
    assert np.allclose(mono.samples, 0.4, atol=2**-15)


def test_mixdown_identity_and_symmetry():
    mono = Waveform(samples=np.arange(10, dtype=np.float32), sample_rate=44100)
    assert mixdown_mono(mono) is mono or np.array_equal(mixdown_mono(mono).samples, mono.samples)
    st_ = Waveform(
        samples=np.stack([np.full(8, 0.5, np.float32), np.full(8, -0.5, np.float32)], axis=1),
        sample_rate=44100,
    )
    assert np.allclose(mixdown_mono(st_).samples, 0.0)


def test_truncated_file(tmp_path):
    p = tmp_path / "t.wav"
    write_audio(Waveform(samples=np.zeros(1000, np.float32), sample_rate=44100), p, bits=16)
    p.write_bytes(p.read_bytes()[:-700])
    with pytest.raises(TruncatedFileError):
        read_audio(p)


def test_unsupported_encoding(tmp_path):
    p = tmp_path / "u.wav"
    write_audio(Waveform(samples=np.zeros(100, np.float32), sample_rate=44100), p, bits=16)
    raw = bytearray(p.read_bytes())
    fmt = raw.find(b"fmt ")
    raw[fmt + 8 : fmt + 10] = (7).to_bytes(2, "little")  # mu-law format tag
    p.write_bytes(bytes(raw))
    with pytest.raises(UnsupportedEncodingError):
        read_audio(p)


def test_segment_piece_counts():
    w = Waveform(samples=np.zeros(819200, np.float32), sample_rate=44100)
    segs = segment_piece(w, 50, source_id="p")
    assert len(segs) == 50
    assert [s.offset_samples for s in segs] == [i * 16384 for i in range(50)]

    assert segment_piece(Waveform(samples=np.zeros(16383, np.float32), sample_rate=44100), 50) == []
    assert len(segment_piece(Waveform(samples=np.zeros(32769, np.float32), sample_rate=44100), 50)) == 2


def test_segment_requires_exact_length():
    with pytest.raises(DataError):
        Segment(samples=np.zeros(100, np.float32), source_id="x", offset_samples=0)
