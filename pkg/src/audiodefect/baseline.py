"""Classical LPC click detector (prediction error + matched filter).

Each 4096-sample window is whitened by an inverse LPC filter; the residual
is passed through a matched filter (time-reversed whitening coefficients)
and samples whose instantaneous matched-filter power exceeds a robust
noise floor by the detection threshold are flagged as clicks. Segments are
scanned with 7 half-overlapping windows and detections deduplicated.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from .clicks import SAMPLES_PER_TARGET, TARGET_LEN
from .errors import DataError
from .waveio import SEGMENT_LEN, Segment


@dataclass
class BaselineConfig:
    lpc_order: int = 12
    detection_threshold_db: float = 30.0
    frame_size: int = 4096
    hop_size: int = 2048
    power_estimation_threshold_db: float = 10.0
    silence_threshold_db: float = -50.0

    def __post_init__(self):
        if not self.frame_size > self.hop_size > 0:
            raise DataError("frame_size must exceed hop_size > 0")
        if self.lpc_order >= self.frame_size:
            raise DataError("lpc_order must be smaller than frame_size")


@dataclass
class LpcResult:
    coeffs: np.ndarray       # [a1..ap] of the inverse filter 1 + sum a_i z^-i
    reflection: np.ndarray
    error_power: float
    degenerate: bool = False


@dataclass
class Detection:
    positions: list[int] = field(default_factory=list)


def lpc_coefficients(frame: np.ndarray, order: int) -> LpcResult:
    """Levinson-Durbin solve of the autocorrelation normal equations.

    Returns inverse-filter coefficients, so an AR(1) signal with pole 0.9
    yields coeffs[0] ~= -0.9. All-zero / numerically singular frames return
    a zero result flagged degenerate.
    """
    x = np.asarray(frame, dtype=np.float64)
    n = x.shape[0]
    if n <= order:
        raise DataError("frame shorter than LPC order")
    r = np.empty(order + 1)
    for lag in range(order + 1):
        r[lag] = np.dot(x[: n - lag], x[lag:])
    if r[0] <= 0.0:
        return LpcResult(np.zeros(order), np.zeros(order), 0.0, degenerate=True)
    r[0] *= 1.0 + 1e-9  # stabilises tonal (near-singular) frames

    a = np.zeros(order + 1)
    a[0] = 1.0
    k = np.zeros(order)
    err = r[0]
    for i in range(1, order + 1):
        acc = r[i] + np.dot(a[1:i], r[i - 1 : 0 : -1])
        ki = -acc / err
        k[i - 1] = ki
        a[1 : i + 1] = a[1 : i + 1] + ki * a[i - 1 :: -1][: i]
        err *= 1.0 - ki * ki
        if err <= 0.0:
            return LpcResult(np.zeros(order), np.zeros(order), 0.0, degenerate=True)
    return LpcResult(coeffs=a[1:], reflection=k, error_power=err / n)


def _residual_and_power(frame: np.ndarray, context: np.ndarray, inv: np.ndarray) -> np.ndarray:
    """Matched-filter output power for each frame sample."""
    ext = np.concatenate([context, frame])
    residual = lfilter(inv, [1.0], ext)[len(context):]
    # Zero-extend so the matched-filter peak of a click at the very end of
    # the window still lands inside the analysed range.
    residual = np.concatenate([residual, np.zeros(len(inv) - 1)])
    matched = lfilter(inv[::-1], [1.0], residual)
    return matched**2


def detect_clicks_frame(
    frame: np.ndarray, cfg: BaselineConfig, context: np.ndarray | None = None
) -> list[int]:
    """Click positions within one analysis window.

    ``context`` supplies the lpc_order samples preceding the window so the
    inverse filter has no warm-up transient; when absent the window start
    is reflected. The noise floor is the median matched-filter power of the
    quiet majority of samples, but never below the silence threshold, so a
    lone click in digital silence is still detected while pure silence
    yields nothing.
    """
    x = np.asarray(frame, dtype=np.float64)
    order = cfg.lpc_order
    lpc = lpc_coefficients(x, order)
    if lpc.degenerate:
        return []
    inv = np.concatenate([[1.0], lpc.coeffs])
    if context is None:
        context = x[1 : order + 1][::-1]
    power = _residual_and_power(x, np.asarray(context, dtype=np.float64), inv)

    robust = np.median(power)
    quiet = power[power <= robust * 10 ** (cfg.power_estimation_threshold_db / 10)]
    floor = np.median(quiet) if quiet.size else robust
    floor = max(floor, 10 ** (cfg.silence_threshold_db / 10))

    flagged = np.flatnonzero(power > floor * 10 ** (cfg.detection_threshold_db / 10))
    if flagged.size == 0:
        return []

    # Merge flags within lpc_order samples; report the power peak of each
    # run, compensated for the matched-filter delay.
    positions = []
    run_start = 0
    for i in range(1, flagged.size + 1):
        if i == flagged.size or flagged[i] - flagged[i - 1] > order:
            run = flagged[run_start:i]
            peak = run[np.argmax(power[run])]
            positions.append(min(max(0, int(peak) - order), x.shape[0] - 1))
            run_start = i
    return positions


def detect_clicks_segment(s: Segment, cfg: BaselineConfig) -> tuple[Detection, np.ndarray]:
    """Scan a segment with overlapping windows; returns deduplicated
    detections and the 128-value binary output vector."""
    x = np.asarray(s.samples, dtype=np.float64)
    order = cfg.lpc_order
    positions: list[int] = []
    for offset in range(0, SEGMENT_LEN - cfg.frame_size + 1, cfg.hop_size):
        frame = x[offset : offset + cfg.frame_size]
        context = x[offset - order : offset] if offset >= order else None
        for p in detect_clicks_frame(frame, cfg, context=context):
            positions.append(offset + p)

    positions.sort()
    deduped: list[int] = []
    for p in positions:
        if not deduped or p - deduped[-1] > order:
            deduped.append(p)

    target = np.zeros(TARGET_LEN, dtype=np.float32)
    for p in deduped:
        target[min(p // SAMPLES_PER_TARGET, TARGET_LEN - 1)] = 1.0
    return Detection(positions=deduped), target


def threshold_sweep(dataset_path, thresholds, split: str = "val", base: BaselineConfig | None = None):
    """Evaluate the baseline at each threshold over a labelled dataset split.

    Returns (per-threshold Metrics dict, best threshold by accuracy).
    """
    from .datasets import iter_dataset
    from .metrics import compute_metrics

    base = base or BaselineConfig()
    results = {}
    pairs = [(seg, target) for seg, target, _ in iter_dataset(dataset_path, split)]
    if not pairs:
        raise DataError(f"dataset split '{split}' at {dataset_path} is empty")
    for thr in thresholds:
        cfg = BaselineConfig(
            lpc_order=base.lpc_order,
            detection_threshold_db=thr,
            frame_size=base.frame_size,
            hop_size=base.hop_size,
            power_estimation_threshold_db=base.power_estimation_threshold_db,
            silence_threshold_db=base.silence_threshold_db,
        )
        preds = np.stack([detect_clicks_segment(seg, cfg)[1] for seg, _ in pairs])
        targets = np.stack([t for _, t in pairs])
        results[thr] = compute_metrics(preds, targets)
    best = max(results, key=lambda t: results[t].accuracy)
    return results, best
