"""Per-target-value metrics and detector evaluation reports.

All scoring is done over individual target values (N segments x 128
values), never summarised at the segment level. Precision is reported for
the defect (positive) class and defined as 0, with an explicit flag, when
there are no predicted positives.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass
class Metrics:
    tp: int
    fp: int
    tn: int
    fn: int
    positive_class_defined: bool = True

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    @property
    def accuracy(self) -> float:
        return (self.tp + self.tn) / self.total if self.total else 0.0

    @property
    def precision(self) -> float:
        return self.tp / (self.tp + self.fp) if (self.tp + self.fp) else 0.0

    @property
    def recall(self) -> float:
        return self.tp / (self.tp + self.fn) if (self.tp + self.fn) else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0

    def to_json(self) -> dict:
        return {
            "tp": self.tp,
            "fp": self.fp,
            "tn": self.tn,
            "fn": self.fn,
            "accuracy": self.accuracy,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "positive_class_defined": self.positive_class_defined,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Metrics":
        return cls(
            tp=d["tp"], fp=d["fp"], tn=d["tn"], fn=d["fn"],
            positive_class_defined=d.get("positive_class_defined", True),
        )

    def merged(self, other: "Metrics") -> "Metrics":
        m = Metrics(self.tp + other.tp, self.fp + other.fp, self.tn + other.tn, self.fn + other.fn)
        m.positive_class_defined = (m.tp + m.fp) > 0
        return m


def compute_metrics(pred: np.ndarray, target: np.ndarray) -> Metrics:
    """Confusion counts over every value of binary (N, 128) arrays."""
    pred = np.asarray(pred)
    target = np.asarray(target)
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch: pred {pred.shape} vs target {target.shape}")
    p = pred.astype(bool)
    t = target.astype(bool)
    tp = int(np.count_nonzero(p & t))
    fp = int(np.count_nonzero(p & ~t))
    fn = int(np.count_nonzero(~p & t))
    tn = int(np.count_nonzero(~p & ~t))
    return Metrics(tp=tp, fp=fp, tn=tn, fn=fn, positive_class_defined=(tp + fp) > 0)


def config_digest(obj) -> str:
    """Stable hash of a JSON-serialisable configuration."""
    blob = json.dumps(obj, sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class Report:
    detector_id: str
    dataset_id: str
    config_digest: str
    metrics: Metrics
    per_threshold: dict = field(default_factory=dict)  # threshold -> Metrics
    timestamp: str = ""
    toolkit_version: str = ""

    def to_json(self) -> dict:
        return {
            "detector_id": self.detector_id,
            "dataset_id": self.dataset_id,
            "config_digest": self.config_digest,
            "metrics": self.metrics.to_json(),
            "per_threshold": {str(k): v.to_json() for k, v in self.per_threshold.items()},
            "timestamp": self.timestamp,
            "toolkit_version": self.toolkit_version,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Report":
        return cls(
            detector_id=d["detector_id"],
            dataset_id=d["dataset_id"],
            config_digest=d["config_digest"],
            metrics=Metrics.from_json(d["metrics"]),
            per_threshold={k: Metrics.from_json(v) for k, v in d.get("per_threshold", {}).items()},
            timestamp=d.get("timestamp", ""),
            toolkit_version=d.get("toolkit_version", ""),
        )

    def save(self, path) -> None:
        from pathlib import Path

        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")

    @classmethod
    def load(cls, path) -> "Report":
        from pathlib import Path

        return cls.from_json(json.loads(Path(path).read_text()))


def evaluate_detector(detector, dataset_path, split: str = "test", detector_id: str = "detector",
                      config=None, timestamp: str = "") -> Report:
    """Stream a dataset split through a detector callable.

    ``detector`` maps a Segment to a binary 128-value prediction vector.
    """
    from . import __version__
    from .datasets import dataset_id as _dataset_id, iter_dataset

    preds, targets = [], []
    for seg, target, _record in iter_dataset(dataset_path, split):
        preds.append(np.asarray(detector(seg), dtype=np.float32))
        targets.append(target)
    if not preds:
        raise DataError(f"dataset split '{split}' at {dataset_path} is empty")
    metrics = compute_metrics(np.stack(preds), np.stack(targets))
    return Report(
        detector_id=detector_id,
        dataset_id=_dataset_id(dataset_path),
        config_digest=config_digest(config if config is not None else detector_id),
        metrics=metrics,
        timestamp=timestamp,
        toolkit_version=__version__,
    )


_COLUMNS = ["accuracy", "precision", "recall", "f1", "tp", "fp", "tn", "fn"]


def compare_reports(a: Report, b: Report) -> tuple[str, str]:
    """Side-by-side metric comparison. Returns (text table, CSV)."""
    if a.dataset_id != b.dataset_id:
        raise DataError(
            f"cannot compare reports from different datasets: {a.dataset_id!r} vs {b.dataset_id!r}"
        )
    rows = []
    for col in _COLUMNS:
        va, vb = getattr(a.metrics, col), getattr(b.metrics, col)
        rows.append((col, va, vb, vb - va))

    width = max(len(a.detector_id), len(b.detector_id), 12)
    lines = [f"{'metric':<12} {a.detector_id:>{width}} {b.detector_id:>{width}} {'delta':>12}"]
    for col, va, vb, d in rows:
        if col in ("tp", "fp", "tn", "fn"):
            lines.append(f"{col:<12} {va:>{width}d} {vb:>{width}d} {d:>12d}")
        else:
            lines.append(f"{col:<12} {va:>{width}.6f} {vb:>{width}.6f} {d:>12.6f}")
    text = "\n".join(lines)

    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["metric", a.detector_id, b.detector_id, "delta"])
    for col, va, vb, d in rows:
        writer.writerow([col, va, vb, d])
    return text, buf.getvalue()
