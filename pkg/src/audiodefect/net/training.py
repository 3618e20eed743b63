"""Training loop: weighted RMS loss, hand-rolled Adam, plateau schedule.

The loop is a deterministic function of (dataset, TrainConfig): batch
shuffles come from per-epoch seeded sub-generators and the optimizer is
applied in a fixed parameter order, so reruns produce byte-identical
checkpoints and logs.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import torch

from ..errors import DataError
from ..metrics import compute_metrics
from .checkpoint import save_checkpoint
from .config import TrainConfig
from .model import DefectNet


def weighted_rms_loss(pred: torch.Tensor, target: torch.Tensor, w_pos: float) -> torch.Tensor:
    """Square root of the weighted mean squared error, weight w_pos on
    defect-class values and 1 elsewhere, weights normalised by their sum."""
    if pred.shape != target.shape:
        raise DataError(f"shape mismatch: {tuple(pred.shape)} vs {tuple(target.shape)}")
    w = 1.0 + (w_pos - 1.0) * target
    return torch.sqrt(torch.sum(w * (pred - target) ** 2) / torch.sum(w))


def init_adam_state(model: torch.nn.Module) -> dict:
    return {
        "step": 0,
        "m": {n: torch.zeros_like(p) for n, p in model.named_parameters()},
        "v": {n: torch.zeros_like(p) for n, p in model.named_parameters()},
    }


@torch.no_grad()
def adam_step(
    params: dict[str, torch.Tensor],
    grads: dict[str, torch.Tensor],
    state: dict,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> None:
    """Bias-corrected Adam update, in place on params and state."""
    state["step"] += 1
    t = state["step"]
    bc1 = 1.0 - beta1**t
    bc2 = 1.0 - beta2**t
    for name in params:
        g = grads[name]
        if g is None:
            continue
        m, v = state["m"][name], state["v"][name]
        m.mul_(beta1).add_(g, alpha=1.0 - beta1)
        v.mul_(beta2).addcmul_(g, g, value=1.0 - beta2)
        params[name].sub_(lr * (m / bc1) / ((v / bc2).sqrt() + eps))


def model_weights(model: torch.nn.Module) -> dict[str, np.ndarray]:
    """Full state (parameters and batchnorm buffers) as numpy arrays."""
    return {k: v.detach().cpu().numpy() for k, v in model.state_dict().items()}


def restore_weights(model: torch.nn.Module, weights: dict[str, np.ndarray]) -> None:
    state = model.state_dict()
    missing = set(state) - set(weights)
    if missing:
        raise DataError(f"checkpoint missing arrays: {sorted(missing)[:5]} ...")
    with torch.no_grad():
        for k, v in state.items():
            v.copy_(torch.from_numpy(np.asarray(weights[k])).to(v.dtype).reshape(v.shape))


def _positive_prior(dataset) -> float:
    if hasattr(dataset, "positive_prior"):
        return float(dataset.positive_prior)
    total = pos = 0
    for i in range(len(dataset)):
        _, y = dataset[i]
        pos += float(np.sum(y))
        total += y.size
    return pos / total if total else 0.0


def _evaluate(model: DefectNet, dataset, batch_size: int, threshold: float):
    model.eval()
    preds, targets = [], []
    with torch.no_grad():
        for start in range(0, len(dataset), batch_size):
            xs, ys = zip(*(dataset[i] for i in range(start, min(start + batch_size, len(dataset)))))
            x = torch.from_numpy(np.stack(xs).astype(np.float32))
            probs = model(x).numpy()
            preds.append(probs > threshold)
            targets.append(np.stack(ys))
    return compute_metrics(np.concatenate(preds), np.concatenate(targets))


def train(
    model: DefectNet,
    train_set,
    val_set,
    cfg: TrainConfig,
    out_dir,
    log_path=None,
    early_stop_f1: float | None = None,
    save_per_epoch: bool = True,
    progress: bool = False,
) -> dict:
    """Train with Adam and reduction-on-plateau; keeps the checkpoint of
    the epoch with best validation accuracy.

    Returns {"history": per-epoch records, "best_epoch", "best_val_accuracy",
    "best_checkpoint"}.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if len(train_set) == 0 or len(val_set) == 0:
        raise DataError("train and validation sets must be non-empty")

    w_pos = cfg.resolve_positive_weight(_positive_prior(train_set))
    params = dict(model.named_parameters())
    state = init_adam_state(model)
    lr = cfg.learning_rate

    history = []
    best_acc = -1.0
    best_epoch = -1
    stall = 0
    log_fh = open(log_path, "w") if log_path else None
    try:
        for epoch in range(1, cfg.max_epochs + 1):
            rng = np.random.default_rng(np.random.SeedSequence([cfg.rng_seed, 1, epoch]))
            order = rng.permutation(len(train_set))
            model.train()
            losses = []
            n_batches = (len(order) + cfg.batch_size - 1) // cfg.batch_size
            for b in range(n_batches):
                idx = order[b * cfg.batch_size : (b + 1) * cfg.batch_size]
                xs, ys = zip(*(train_set[int(i)] for i in idx))
                x = torch.from_numpy(np.stack(xs).astype(np.float32))
                y = torch.from_numpy(np.stack(ys).astype(np.float32))
                pred = model(x)
                loss = weighted_rms_loss(pred, y, w_pos)
                if not torch.isfinite(loss):
                    raise DataError(f"non-finite loss at epoch {epoch} batch {b}")
                model.zero_grad(set_to_none=True)
                loss.backward()
                adam_step(params, {n: p.grad for n, p in params.items()}, state, lr,
                          cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
                losses.append(float(loss.detach()))
                if progress and b % 10 == 0:
                    print(f"epoch {epoch} batch {b + 1}/{n_batches} loss {float(loss.detach()):.5f}", flush=True)

            val = _evaluate(model, val_set, cfg.batch_size, cfg.decision_threshold)
            record = {
                "epoch": epoch,
                "train_loss": float(np.mean(losses)),
                "val_accuracy": val.accuracy,
                "val_precision": val.precision,
                "val_recall": val.recall,
                "val_f1": val.f1,
                "lr": lr,
            }
            history.append(record)
            if log_fh:
                log_fh.write(json.dumps(record, sort_keys=True) + "\n")
                log_fh.flush()
            if progress:
                print(f"epoch {epoch}: loss {record['train_loss']:.5f} "
                      f"val_acc {val.accuracy:.6f} val_f1 {val.f1:.4f} lr {lr:g}", flush=True)

            opt_state = {
                "step": state["step"],
                "m": {n: t.detach().cpu().numpy() for n, t in state["m"].items()},
                "v": {n: t.detach().cpu().numpy() for n, t in state["v"].items()},
            }
            if save_per_epoch:
                save_checkpoint(out_dir / f"epoch_{epoch:03d}.ckpt", model.cfg,
                                model_weights(model), opt_state, epoch, val.accuracy)
            if val.accuracy > best_acc:
                best_acc = val.accuracy
                best_epoch = epoch
                stall = 0
                save_checkpoint(out_dir / "best.ckpt", model.cfg, model_weights(model),
                                opt_state, epoch, val.accuracy)
            else:
                stall += 1
                if stall >= cfg.plateau_patience:
                    lr *= cfg.plateau_factor
                    stall = 0

            if early_stop_f1 is not None and val.f1 >= early_stop_f1:
                break
    finally:
        if log_fh:
            log_fh.close()

    return {
        "history": history,
        "best_epoch": best_epoch,
        "best_val_accuracy": best_acc,
        "best_checkpoint": str(out_dir / "best.ckpt"),
    }


def predict(model: DefectNet, segments, threshold: float = 0.5, batch_size: int = 64):
    """Probabilities and strict-threshold binary decisions for segments
    given as an (N, input_len) array or an iterable of Segment."""
    if not isinstance(segments, np.ndarray):
        segments = np.stack([np.asarray(getattr(s, "samples", s), dtype=np.float32) for s in segments])
    model.eval()
    probs = []
    with torch.no_grad():
        for start in range(0, segments.shape[0], batch_size):
            x = torch.from_numpy(segments[start : start + batch_size].astype(np.float32))
            probs.append(model(x).numpy())
    probs = np.concatenate(probs)
    return probs, (probs > threshold).astype(np.float32)
