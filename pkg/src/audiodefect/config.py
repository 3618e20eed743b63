"""Toolkit configuration: one TOML file, flag overrides, resolved snapshots.

Precedence is flags > config file > built-in defaults. Every pipeline run
writes its resolved configuration next to its outputs so results can be
reproduced from the snapshot alone.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

from .baseline import BaselineConfig
from .clicks import ClickConfig
from .errors import DataError
from .glitch_target import GlitchTargetConfig
from .mp3.adapters import DecoderAdapter, EncoderAdapter, default_mp3tool
from .mp3.corrupt import CorruptionConfig
from .net.config import ModelConfig, TrainConfig
from .postprocess import PostProcessorAdapter


@dataclass
class ToolkitConfig:
    click: ClickConfig = field(default_factory=ClickConfig)
    corruption: CorruptionConfig = field(default_factory=CorruptionConfig)
    glitch_target: GlitchTargetConfig = field(default_factory=GlitchTargetConfig)
    model: ModelConfig = field(default_factory=ModelConfig)
    train: TrainConfig = field(default_factory=TrainConfig)
    baseline: BaselineConfig = field(default_factory=BaselineConfig)
    encoder_command: list[str] | None = None
    decoder_command: list[str] | None = None
    postprocessor_command: list[str] | None = None
    rng_seed: int | None = None  # overrides every section seed when set

    def __post_init__(self):
        if self.rng_seed is not None:
            self.click.rng_seed = self.rng_seed
            self.corruption.rng_seed = self.rng_seed
            self.model.rng_seed = self.rng_seed
            self.train.rng_seed = self.rng_seed

    def encoder(self) -> EncoderAdapter:
        if self.encoder_command:
            return EncoderAdapter(command=list(self.encoder_command))
        return EncoderAdapter()

    def decoder(self) -> DecoderAdapter:
        if self.decoder_command:
            return DecoderAdapter(command=list(self.decoder_command))
        return DecoderAdapter()

    def postprocessor(self) -> PostProcessorAdapter:
        if self.postprocessor_command:
            return PostProcessorAdapter(command=list(self.postprocessor_command))
        return PostProcessorAdapter()

    def to_json(self) -> dict:
        return {
            "click": dataclasses.asdict(self.click),
            "corruption": dataclasses.asdict(self.corruption),
            "glitch_target": dataclasses.asdict(self.glitch_target),
            "model": self.model.to_json(),
            "train": self.train.to_json(),
            "baseline": dataclasses.asdict(self.baseline),
            "encoder_command": self.encoder_command or EncoderAdapter().command,
            "decoder_command": self.decoder_command or DecoderAdapter().command,
            "postprocessor_command": self.postprocessor_command
            or [str(c) for c in PostProcessorAdapter().command],
            "rng_seed": self.rng_seed,
            "mp3tool": default_mp3tool(),
        }

    def write_snapshot(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True) + "\n")


_SECTION_TYPES = {
    "click": ClickConfig,
    "corruption": CorruptionConfig,
    "glitch_target": GlitchTargetConfig,
    "model": ModelConfig,
    "train": TrainConfig,
    "baseline": BaselineConfig,
}


def load_config(path=None) -> ToolkitConfig:
    """Load a TOML config file; unknown keys are rejected."""
    if path is None:
        return ToolkitConfig()
    try:
        data = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise DataError(f"cannot load config {path}: {e}") from e

    kwargs = {}
    for section, cls in _SECTION_TYPES.items():
        if section in data:
            body = data.pop(section)
            valid = {f.name for f in dataclasses.fields(cls)}
            unknown = set(body) - valid
            if unknown:
                raise DataError(f"unknown keys in [{section}]: {sorted(unknown)}")
            kwargs[section] = cls(**body)
    for key in ("encoder_command", "decoder_command", "postprocessor_command", "rng_seed"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        raise DataError(f"unknown config sections/keys: {sorted(data)}")
    return ToolkitConfig(**kwargs)
