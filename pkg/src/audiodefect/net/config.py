"""Configuration dataclasses for the detection network and its training."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..errors import DataError


@dataclass
class ModelConfig:
    num_blocks: int = 13
    contract_filter_growth: int = 15
    expand_filter_growth: int = 5
    kernel_size: int = 5
    activation: str = "leaky_relu"  # leaky_relu (slope 0.01) or relu
    input_len: int = 16384
    output_len: int = 128
    output_bias_init_prior: float = 0.00078
    rng_seed: int = 0
    contract_channels: list[int] | None = None  # explicit per-block override
    expand_channels: list[int] | None = None

    def __post_init__(self):
        if self.input_len % (1 << self.num_blocks) != 0:
            raise DataError(
                f"input_len {self.input_len} not divisible by 2^{self.num_blocks}"
            )
        if self.bottleneck_len < 1:
            raise DataError(
                f"contracting path infeasible: {self.input_len} / 2^{self.num_blocks} < 1"
            )
        if self.activation not in ("leaky_relu", "relu"):
            raise DataError(f"unknown activation: {self.activation}")
        if not 0 < self.output_bias_init_prior < 1:
            raise DataError("output_bias_init_prior must be a probability in (0, 1)")
        if self.contract_channels is not None and len(self.contract_channels) != self.num_blocks:
            raise DataError("contract_channels must list one channel count per block")
        if self.expand_channels is not None and len(self.expand_channels) != self.num_blocks:
            raise DataError("expand_channels must list one channel count per block")
        self.doubling_schedule()  # rejects unreachable output lengths early

    @property
    def bottleneck_len(self) -> int:
        return self.input_len >> self.num_blocks

    def contract_channel(self, block: int) -> int:
        """Channels of contracting block (0-based); linear growth by default."""
        if self.contract_channels is not None:
            return self.contract_channels[block]
        return self.contract_filter_growth * (block + 1)

    def expand_channel(self, block: int) -> int:
        """Channels of expanding block (0-based from the bottleneck);
        mirrors the contracting growth downward."""
        if self.expand_channels is not None:
            return self.expand_channels[block]
        return self.expand_filter_growth * (self.num_blocks - block)

    def doubling_schedule(self) -> list[int]:
        """Per-expanding-block resolution step: +1 double, 0 keep, -1 halve.

        Stride-2 transposed convolutions go on even-indexed blocks first
        (counting from the bottleneck), using exactly as many doublings as
        the output length requires. When the bottleneck is already longer
        than the output grid, the last blocks downsample with stride-2
        convolutions instead, so the output grid stays a learned, strided
        readout rather than a parameter-free pool.
        """
        needed = math.log2(self.output_len / self.bottleneck_len)
        if needed != int(needed):
            raise DataError(
                f"output_len {self.output_len} unreachable from bottleneck {self.bottleneck_len}"
            )
        needed = int(needed)
        if abs(needed) > self.num_blocks:
            raise DataError(
                f"need {abs(needed)} resolution steps but only {self.num_blocks} expanding blocks"
            )
        steps = [0] * self.num_blocks
        if needed >= 0:
            order = list(range(0, self.num_blocks, 2)) + list(range(1, self.num_blocks, 2))
            for i in order[:needed]:
                steps[i] = 1
        else:
            for i in range(self.num_blocks + needed, self.num_blocks):
                steps[i] = -1
        return steps

    def to_json(self) -> dict:
        return {
            "num_blocks": self.num_blocks,
            "contract_filter_growth": self.contract_filter_growth,
            "expand_filter_growth": self.expand_filter_growth,
            "kernel_size": self.kernel_size,
            "activation": self.activation,
            "input_len": self.input_len,
            "output_len": self.output_len,
            "output_bias_init_prior": self.output_bias_init_prior,
            "rng_seed": self.rng_seed,
            "contract_channels": self.contract_channels,
            "expand_channels": self.expand_channels,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ModelConfig":
        return cls(**d)


@dataclass
class TrainConfig:
    batch_size: int = 200
    learning_rate: float = 0.001
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    plateau_factor: float = 0.1
    plateau_patience: int = 10
    max_epochs: int = 40
    positive_class_weight: float | None = None  # default: 1/prior, capped
    positive_weight_cap: float = 1000.0
    decision_threshold: float = 0.5
    rng_seed: int = 0

    def __post_init__(self):
        if self.batch_size < 1:
            raise DataError("batch_size must be >= 1")
        if not 0 < self.plateau_factor < 1:
            raise DataError("plateau_factor must be in (0, 1)")

    def resolve_positive_weight(self, prior: float) -> float:
        if self.positive_class_weight is not None:
            return self.positive_class_weight
        return min(1.0 / max(prior, 1e-12), self.positive_weight_cap)

    def to_json(self) -> dict:
        return {k: getattr(self, k) for k in (
            "batch_size", "learning_rate", "adam_beta1", "adam_beta2", "adam_eps",
            "plateau_factor", "plateau_patience", "max_epochs", "positive_class_weight",
            "positive_weight_cap", "decision_threshold", "rng_seed",
        )}

    @classmethod
    def from_json(cls, d: dict) -> "TrainConfig":
        return cls(**d)
