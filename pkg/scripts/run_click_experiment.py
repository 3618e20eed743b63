#!/usr/bin/env python3
"""End-to-end click experiment: build a dataset from a WAV corpus, train the
detection network, evaluate it against the LPC baseline and print the
comparison table.

Usage:
    python3 scripts/run_click_experiment.py --corpus path/to/wavs --out runs/click \
        [--config config.toml] [--seed 7] [--epochs 10]
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from audiodefect.baseline import detect_clicks_segment
from audiodefect.config import load_config
from audiodefect.datasets import DiskDataset, build_click_dataset
from audiodefect.metrics import Report, compare_reports, evaluate_detector
from audiodefect.net import build_model, load_checkpoint
from audiodefect.net.training import restore_weights, train


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--corpus", required=True)
    ap.add_argument("--out", required=True)
    ap.add_argument("--config", default=None)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--epochs", type=int, default=None)
    args = ap.parse_args()

    cfg = load_config(args.config)
    cfg.click.rng_seed = args.seed
    if args.epochs is not None:
        cfg.train.max_epochs = args.epochs

    out = Path(args.out)
    ds_dir = out / "dataset"
    print(f"building click dataset in {ds_dir} ...")
    manifest = build_click_dataset(args.corpus, cfg.click, ds_dir)
    print(json.dumps({"counts": manifest["counts"],
                      "positive_fraction": manifest["positive_fraction"]}))

    train_set = DiskDataset(ds_dir, "train")
    val_set = DiskDataset(ds_dir, "val")
    model_cfg = dataclasses.replace(
        cfg.model,
        output_bias_init_prior=float(np.clip(train_set.positive_prior, 1e-6, 1 - 1e-6)),
    )
    model = build_model(model_cfg)
    print(model.summary())
    result = train(model, train_set, val_set, cfg.train, out / "training",
                   log_path=out / "training" / "log.jsonl", progress=True)
    print(f"best epoch {result['best_epoch']} val accuracy {result['best_val_accuracy']:.6f}")

    model_cfg2, weights, _, _, _ = load_checkpoint(result["best_checkpoint"])
    best = build_model(model_cfg2)
    restore_weights(best, weights)
    best.eval()

    import torch

    def net_detector(seg):
        with torch.no_grad():
            probs = best(torch.from_numpy(seg.samples[None])).numpy()[0]
        return (probs > cfg.train.decision_threshold).astype(np.float32)

    net_report = evaluate_detector(net_detector, ds_dir, split="test",
                                   detector_id="defect-net", config=model_cfg2.to_json())
    net_report.save(out / "net_report.json")

    base_report = evaluate_detector(
        lambda seg: detect_clicks_segment(seg, cfg.baseline)[1],
        ds_dir, split="test", detector_id="sigclick-baseline",
        config=dataclasses.asdict(cfg.baseline),
    )
    base_report.save(out / "baseline_report.json")

    text, _ = compare_reports(base_report, net_report)
    print(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
