#!/usr/bin/env python3
"""End-to-end glitch experiment: encode a WAV corpus to MP3, corrupt the
bitstreams with decode validation, build spectral-distance targets and train
the detection network on the degraded audio.

Usage:
    python3 scripts/run_glitch_experiment.py --corpus path/to/wavs --out runs/glitch \
        [--config config.toml] [--seed 7] [--epochs 10]
"""

import argparse
import dataclasses
import json
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

import numpy as np

from audiodefect.config import load_config
from audiodefect.datasets import DiskDataset, build_glitch_dataset
from audiodefect.metrics import evaluate_detector
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
    cfg.corruption.rng_seed = args.seed
    if args.epochs is not None:
        cfg.train.max_epochs = args.epochs

    out = Path(args.out)
    ds_dir = out / "dataset"
    print(f"building glitch dataset in {ds_dir} ...")
    manifest = build_glitch_dataset(
        args.corpus, cfg.corruption, cfg.glitch_target, ds_dir,
        encoder=cfg.encoder(), decoder=cfg.decoder(),
    )
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

    import torch

    model_cfg2, weights, _, _, _ = load_checkpoint(result["best_checkpoint"])
    best = build_model(model_cfg2)
    restore_weights(best, weights)
    best.eval()

    def net_detector(seg):
        with torch.no_grad():
            probs = best(torch.from_numpy(seg.samples[None])).numpy()[0]
        return (probs > cfg.train.decision_threshold).astype(np.float32)

    report = evaluate_detector(net_detector, ds_dir, split="test",
                               detector_id="defect-net", config=model_cfg2.to_json())
    report.save(out / "net_report.json")
    print(json.dumps(report.metrics.to_json(), indent=2, sort_keys=True))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
