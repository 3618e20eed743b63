import numpy as np
import pytest
from scipy import stats

from audiodefect.clicks import ClickConfig, ClickEvent, click_target, insert_click
from audiodefect.errors import DataError
from audiodefect.waveio import Segment

from conftest import sine_segment


def _silence():
    return Segment(samples=np.zeros(16384, np.float32), source_id="s", offset_samples=0)


def test_config_validation():
    with pytest.raises(DataError):
        ClickConfig(p_click=1.5)
    with pytest.raises(DataError):
        ClickConfig(min_offset=0.9, max_offset=0.3)
    with pytest.raises(DataError):
        ClickConfig(min_len=3, max_len=1)


def test_certain_click_on_silence():
    cfg = ClickConfig(p_click=1.0, rng_seed=0)
    out, event = insert_click(_silence(), cfg, np.random.default_rng(0))
    assert event is not None
    changed = np.flatnonzero(out.samples)
    assert np.array_equal(changed, np.arange(event.position, event.position + event.length))
    assert np.allclose(out.samples[changed], event.sign * event.offset)
    assert 0.3 <= event.offset < 1.0


def test_clipping_inverts_sign():
    # Sample 0.9 plus +0.4 would clip; the event flips to -0.4 -> 0.5.
    seg = _silence()
    seg.samples[:] = 0.9
    cfg = ClickConfig(p_click=1.0)
    for seed in range(40):
        out, event = insert_click(seg, cfg, np.random.default_rng(seed))
        if event is None:
            continue
        if 0.9 + event.offset > 1.0:
            assert event.sign == -1
        assert np.max(np.abs(out.samples)) <= 1.0


def test_both_directions_clip_skips():
    seg = _silence()
    # Alternate near-rail samples so any offset >= 0.3 clips both ways.
    seg.samples[::2] = 0.95
    seg.samples[1::2] = -0.95
    cfg = ClickConfig(p_click=1.0, min_len=2, max_len=2, min_offset=0.9, max_offset=0.99)
    out, event = insert_click(seg, cfg, np.random.default_rng(0))
    assert event is None
    assert np.array_equal(out.samples, seg.samples)


def test_insertion_statistics_and_offset_uniformity():
    cfg = ClickConfig(p_click=0.1, rng_seed=0)
    seg = _silence()
    rng = np.random.default_rng(123)
    n = 100_000
    offsets = []
    max_changed = 0
    for _ in range(n):
        out, event = insert_click(seg, cfg, rng)
        if event is not None:
            offsets.append(event.offset)
            assert np.max(np.abs(out.samples)) <= 1.0
            max_changed = max(max_changed, int(np.count_nonzero(out.samples != seg.samples)))
    k = len(offsets)
    sigma = np.sqrt(n * 0.1 * 0.9)
    assert abs(k - 0.1 * n) <= 3 * sigma
    assert max_changed <= 3
    # KS test against uniform [0.3, 1).
    u = (np.asarray(offsets) - 0.3) / 0.7
    assert stats.kstest(u, "uniform").pvalue > 0.01


def test_draws_deterministic():
    cfg = ClickConfig(p_click=0.5, rng_seed=0)
    seg = sine_segment()
    a = [insert_click(seg, cfg, np.random.default_rng(9))[1] for _ in range(1)]
    b = [insert_click(seg, cfg, np.random.default_rng(9))[1] for _ in range(1)]
    assert a == b


def test_click_target_cases():
    assert np.array_equal(click_target(None), np.zeros(128, np.float32))

    t = click_target(ClickEvent(position=5000, length=1, offset=0.5, sign=1))
    assert np.flatnonzero(t).tolist() == [39]

    t = click_target(ClickEvent(position=16381, length=3, offset=0.5, sign=1))
    assert np.flatnonzero(t).tolist() == [127]

    # A length-2 click straddling a frame boundary marks both frames.
    t = click_target(ClickEvent(position=127, length=2, offset=0.5, sign=1))
    assert np.flatnonzero(t).tolist() == [0, 1]


def test_event_json_round_trip():
    e = ClickEvent(position=10, length=2, offset=0.4, sign=-1)
    assert ClickEvent.from_json(e.to_json()) == e
