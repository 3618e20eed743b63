from .config import ModelConfig, TrainConfig
from .model import DefectNet, build_model, param_count
from .training import adam_step, predict, train, weighted_rms_loss
from .checkpoint import load_checkpoint, save_checkpoint

__all__ = [
    "ModelConfig",
    "TrainConfig",
    "DefectNet",
    "build_model",
    "param_count",
    "weighted_rms_loss",
    "adam_step",
    "train",
    "predict",
    "save_checkpoint",
    "load_checkpoint",
]
