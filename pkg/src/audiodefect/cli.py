"""Command-line surface tying the synthesis, detection and evaluation
pipelines together.

Subcommands: clickify, glitchify, train, detect, baseline, evaluate,
compare, model-summary. Exit codes: 0 success, 1 usage, 2 data error,
3 adapter error. Every pipeline run writes a resolved-config snapshot
(config.snapshot.json) next to its outputs.
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__
from .errors import AdapterError, DataError

# Spec'd exit-code convention: usage errors are 1 (click defaults to 2).
click.UsageError.exit_code = 1


def _timestamp() -> str:
    # Sourced from the environment so reruns stay byte-identical.
    return os.environ.get("AUDIODEFECT_TIMESTAMP", "")


def _handle_errors(fn):
    import functools

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except AdapterError as e:
            click.echo(f"adapter error [{fn.__name__}]: {e}", err=True)
            sys.exit(3)
        except DataError as e:
            click.echo(f"data error [{fn.__name__}]: {e}", err=True)
            sys.exit(2)

    return wrapper


def _load_config(config_path, seed):
    from .config import load_config

    cfg = load_config(config_path)
    if seed is not None:
        from .config import ToolkitConfig

        cfg = ToolkitConfig(
            click=cfg.click, corruption=cfg.corruption, glitch_target=cfg.glitch_target,
            model=cfg.model, train=cfg.train, baseline=cfg.baseline,
            encoder_command=cfg.encoder_command, decoder_command=cfg.decoder_command,
            postprocessor_command=cfg.postprocessor_command, rng_seed=seed,
        )
    return cfg


@click.group()
@click.version_option(__version__)
def main():
    """Audio defect synthesis and detection toolkit."""


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Overrides the configured seed.")
@click.option("--p-click", type=float, default=None)
@click.option("--postprocess", is_flag=True, help="Apply mild random post-processing to every segment.")
@click.option("--max-segments", type=int, default=50, show_default=True)
@_handle_errors
def clickify(corpus, out, config_path, seed, p_click, postprocess, max_segments):
    """Build a click-degraded dataset from a corpus of WAV pieces."""
    from .datasets import build_click_dataset

    cfg = _load_config(config_path, seed)
    if p_click is not None:
        cfg.click.p_click = p_click
    post_adapter = cfg.postprocessor() if postprocess else None
    if post_adapter is not None:
        post_adapter.probe()
    manifest = build_click_dataset(
        corpus, cfg.click, out, post_adapter=post_adapter, max_segments=max_segments
    )
    cfg.write_snapshot(Path(out) / "config.snapshot.json")
    click.echo(json.dumps({"dataset_id": manifest["dataset_id"], "counts": manifest["counts"],
                           "positive_fraction": manifest["positive_fraction"]}, sort_keys=True))


@main.command()
@click.option("--corpus", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--p-glitch", type=float, default=None)
@click.option("--max-segments", type=int, default=50, show_default=True)
@_handle_errors
def glitchify(corpus, out, config_path, seed, p_glitch, max_segments):
    """Build an MP3-corruption glitch dataset (encode, corrupt, decode)."""
    from .datasets import build_glitch_dataset

    cfg = _load_config(config_path, seed)
    if p_glitch is not None:
        cfg.corruption.p_glitch = p_glitch
    encoder, decoder = cfg.encoder(), cfg.decoder()
    manifest = build_glitch_dataset(
        corpus, cfg.corruption, cfg.glitch_target, out,
        encoder=encoder, decoder=decoder, max_segments=max_segments,
    )
    cfg.write_snapshot(Path(out) / "config.snapshot.json")
    click.echo(json.dumps({"dataset_id": manifest["dataset_id"], "counts": manifest["counts"],
                           "positive_fraction": manifest["positive_fraction"]}, sort_keys=True))


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None)
@click.option("--max-epochs", type=int, default=None)
@click.option("--bias-prior", type=float, default=None,
              help="Output bias init prior; defaults to the dataset's positive fraction.")
@click.option("--progress", is_flag=True)
@_handle_errors
def train(dataset, out, config_path, seed, max_epochs, bias_prior, progress):
    """Train the detection network on a built dataset."""
    import dataclasses

    from .datasets import DiskDataset
    from .net import build_model
    from .net.training import train as run_train

    cfg = _load_config(config_path, seed)
    if max_epochs is not None:
        cfg.train.max_epochs = max_epochs
    train_set = DiskDataset(dataset, "train")
    val_set = DiskDataset(dataset, "val")
    prior = bias_prior if bias_prior is not None else train_set.positive_prior
    model_cfg = dataclasses.replace(
        cfg.model, output_bias_init_prior=float(np.clip(prior, 1e-6, 1 - 1e-6))
    )
    model = build_model(model_cfg)
    out_dir = Path(out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg.write_snapshot(out_dir / "config.snapshot.json")
    result = run_train(model, train_set, val_set, cfg.train, out_dir,
                       log_path=out_dir / "training_log.jsonl", progress=progress)
    click.echo(json.dumps({"best_epoch": result["best_epoch"],
                           "best_val_accuracy": result["best_val_accuracy"],
                           "best_checkpoint": result["best_checkpoint"]}, sort_keys=True))


@main.command()
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--in", "input_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_path", type=click.Path(dir_okay=False))
@click.option("--threshold", type=float, default=0.5, show_default=True)
@_handle_errors
def detect(checkpoint, input_path, out_path, threshold):
    """Run a trained network over a WAV file; reports flagged output frames."""
    from .net import build_model, load_checkpoint, predict
    from .net.training import restore_weights
    from .waveio import mixdown_mono, read_audio, segment_piece

    model_cfg, weights, _opt, epoch, _acc = load_checkpoint(checkpoint)
    model = build_model(model_cfg)
    restore_weights(model, weights)

    wave = mixdown_mono(read_audio(input_path))
    segments = segment_piece(wave, max_segments=10**9, source_id=Path(input_path).stem)
    if not segments:
        raise DataError(
            f"{input_path} too short: {wave.num_frames} samples < 16384 (one analysis segment)"
        )
    probs, binary = predict(model, segments, threshold=threshold)
    result = {
        "input": str(input_path),
        "checkpoint_epoch": epoch,
        "segments": len(segments),
        "flagged": [
            {"segment": i, "offset": segments[i].offset_samples,
             "frames": np.flatnonzero(binary[i]).tolist()}
            for i in range(len(segments)) if binary[i].any()
        ],
    }
    text = json.dumps(result, indent=2, sort_keys=True)
    if out_path:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@main.command()
@click.option("--dataset", type=click.Path(exists=True, file_okay=False))
@click.option("--in", "input_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--split", default="test", show_default=True)
@click.option("--threshold", type=float, default=30.0, show_default=True)
@click.option("--sweep", default=None, help="Comma-separated thresholds, e.g. 30,33,35,40,50.")
@click.option("--report", "report_path", type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@_handle_errors
def baseline(dataset, input_path, split, threshold, sweep, report_path, config_path):
    """Classical LPC click detector: evaluate a dataset or scan one WAV."""
    import dataclasses as dc

    from .baseline import BaselineConfig, detect_clicks_segment, threshold_sweep
    from .metrics import Report, config_digest, evaluate_detector

    cfg = _load_config(config_path, None)
    base = dc.replace(cfg.baseline, detection_threshold_db=threshold)

    if input_path:
        from .waveio import mixdown_mono, read_audio, segment_piece

        wave = mixdown_mono(read_audio(input_path))
        segments = segment_piece(wave, max_segments=10**9, source_id=Path(input_path).stem)
        if not segments:
            raise DataError(f"{input_path} too short for one 16384-sample segment")
        positions = []
        for seg in segments:
            det, _ = detect_clicks_segment(seg, base)
            positions += [seg.offset_samples + p for p in det.positions]
        click.echo(json.dumps({"input": str(input_path), "click_positions": positions}))
        return
    if not dataset:
        raise click.UsageError("provide --dataset or --in")

    if sweep:
        thresholds = [float(t) for t in sweep.split(",")]
        results, best = threshold_sweep(dataset, thresholds, split=split, base=base)
        report = evaluate_detector(
            lambda seg: detect_clicks_segment(seg, dc.replace(base, detection_threshold_db=best))[1],
            dataset, split=split, detector_id="sigclick-baseline",
            config=dc.asdict(dc.replace(base, detection_threshold_db=best)),
            timestamp=_timestamp(),
        )
        report.per_threshold = {t: m for t, m in results.items()}
        click.echo(f"best threshold by {split} accuracy: {best}")
    else:
        report = evaluate_detector(
            lambda seg: detect_clicks_segment(seg, base)[1],
            dataset, split=split, detector_id="sigclick-baseline",
            config=dc.asdict(base), timestamp=_timestamp(),
        )
    click.echo(json.dumps(report.metrics.to_json(), sort_keys=True))
    if report_path:
        report.save(report_path)


@main.command()
@click.option("--dataset", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--checkpoint", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--split", default="test", show_default=True)
@click.option("--threshold", type=float, default=0.5, show_default=True)
@click.option("--report", "report_path", required=True, type=click.Path(dir_okay=False))
@_handle_errors
def evaluate(dataset, checkpoint, split, threshold, report_path):
    """Evaluate a trained network checkpoint on a dataset split."""
    import torch

    from .metrics import evaluate_detector
    from .net import build_model, load_checkpoint
    from .net.training import restore_weights

    model_cfg, weights, _opt, _epoch, _acc = load_checkpoint(checkpoint)
    model = build_model(model_cfg)
    restore_weights(model, weights)
    model.eval()

    def detector(seg):
        with torch.no_grad():
            probs = model(torch.from_numpy(seg.samples[None].astype(np.float32))).numpy()[0]
        return (probs > threshold).astype(np.float32)

    report = evaluate_detector(
        detector, dataset, split=split, detector_id="defect-net",
        config={"checkpoint_config": model_cfg.to_json(), "threshold": threshold},
        timestamp=_timestamp(),
    )
    report.save(report_path)
    click.echo(json.dumps(report.metrics.to_json(), sort_keys=True))


@main.command()
@click.argument("report_a", type=click.Path(exists=True, dir_okay=False))
@click.argument("report_b", type=click.Path(exists=True, dir_okay=False))
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False))
@_handle_errors
def compare(report_a, report_b, csv_path):
    """Side-by-side comparison of two evaluation reports."""
    from .metrics import Report, compare_reports

    text, csv_text = compare_reports(Report.load(report_a), Report.load(report_b))
    click.echo(text)
    if csv_path:
        Path(csv_path).write_text(csv_text)


@main.command("model-summary")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False))
@_handle_errors
def model_summary(config_path):
    """Print block-by-block shapes and the trainable parameter count."""
    from .net import build_model

    cfg = _load_config(config_path, None)
    model = build_model(cfg.model)
    click.echo(model.summary())


if __name__ == "__main__":
    main()
