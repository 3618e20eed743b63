"""Self-describing binary checkpoint container.

Layout: magic, little-endian uint64 header length, JSON header (format
version, model config, array directory, optimizer step, epoch, best
validation accuracy), then raw little-endian array data. Weight arrays are
float32; writes are deterministic so identical training runs produce
byte-identical checkpoints.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import DataError
from .config import ModelConfig

MAGIC = b"ADCKPT01"
FORMAT_VERSION = 1


def save_checkpoint(
    path,
    cfg: ModelConfig,
    weights: dict[str, np.ndarray],
    optimizer_state: dict | None = None,
    epoch: int = 0,
    val_accuracy: float = 0.0,
) -> None:
    arrays: dict[str, np.ndarray] = {}
    for name, arr in weights.items():
        arrays[f"weights/{name}"] = np.asarray(arr, dtype="<f4")
    opt_meta = None
    if optimizer_state is not None:
        opt_meta = {"step": int(optimizer_state["step"])}
        for kind in ("m", "v"):
            for name, arr in optimizer_state[kind].items():
                arrays[f"adam_{kind}/{name}"] = np.asarray(arr, dtype="<f4")

    directory = []
    offset = 0
    for name in sorted(arrays):
        arr = arrays[name]
        directory.append(
            {"name": name, "shape": list(arr.shape), "dtype": "<f4", "offset": offset}
        )
        offset += arr.nbytes

    header = json.dumps(
        {
            "format_version": FORMAT_VERSION,
            "config": cfg.to_json(),
            "epoch": epoch,
            "val_accuracy": val_accuracy,
            "optimizer": opt_meta,
            "arrays": directory,
        },
        sort_keys=True,
    ).encode()

    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(header)))
        fh.write(header)
        for name in sorted(arrays):
            fh.write(arrays[name].tobytes())


def load_checkpoint(path):
    """Returns (ModelConfig, weights dict, optimizer_state or None, epoch,
    val_accuracy)."""
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise DataError(f"{path}: not a checkpoint file")
    header_len = struct.unpack_from("<Q", raw, len(MAGIC))[0]
    header = json.loads(raw[len(MAGIC) + 8 : len(MAGIC) + 8 + header_len])
    if header["format_version"] != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {header['format_version']}")
    data_start = len(MAGIC) + 8 + header_len

    arrays = {}
    for entry in header["arrays"]:
        n = int(np.prod(entry["shape"])) if entry["shape"] else 1
        start = data_start + entry["offset"]
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=start).reshape(entry["shape"])
        arrays[entry["name"]] = arr.copy()

    weights = {k[len("weights/"):]: v for k, v in arrays.items() if k.startswith("weights/")}
    opt = None
    if header["optimizer"] is not None:
        opt = {
            "step": header["optimizer"]["step"],
            "m": {k[len("adam_m/"):]: v for k, v in arrays.items() if k.startswith("adam_m/")},
            "v": {k[len("adam_v/"):]: v for k, v in arrays.items() if k.startswith("adam_v/")},
        }
    cfg = ModelConfig.from_json(header["config"])
    return cfg, weights, opt, header["epoch"], header["val_accuracy"]
