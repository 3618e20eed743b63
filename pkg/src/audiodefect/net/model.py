"""Encoder-decoder convolutional network for per-frame defect detection.

Raw 16384-sample waveform in, 128 per-frame defect probabilities out. The
contracting path halves the time resolution every block; the expanding
path doubles it with stride-2 transposed convolutions on alternating
blocks only, so the output grid sits at 1/128 of the input sample rate.
Horizontal skips feed max-pooled contracting activations into the
expanding path; each contracting block carries an additive vertical skip
across its two convolutions.
"""

from __future__ import annotations

import math

import torch
from torch import nn

from ..errors import DataError
from .config import ModelConfig


def _activation(name: str) -> nn.Module:
    return nn.LeakyReLU(0.01) if name == "leaky_relu" else nn.ReLU()


class ContractBlock(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, kernel: int, activation: str):
        super().__init__()
        pad = (kernel - 1) // 2
        self.conv1 = nn.Conv1d(in_ch, out_ch, kernel, padding=pad)
        self.bn1 = nn.BatchNorm1d(out_ch)
        self.conv2 = nn.Conv1d(out_ch, out_ch, kernel, padding=pad)
        self.bn2 = nn.BatchNorm1d(out_ch)
        self.act = _activation(activation)
        # Vertical skip bridging the two convolutions; 1-wide projection
        # only when the channel count changes.
        self.project = nn.Conv1d(in_ch, out_ch, 1) if in_ch != out_ch else nn.Identity()
        self.pool = nn.MaxPool1d(2)

    def forward(self, x):
        h = self.act(self.bn1(self.conv1(x)))
        h = self.act(self.bn2(self.conv2(h)))
        h = h + self.project(x)
        return self.pool(h), h  # (pooled, pre-pool activation for skips)


class ExpandBlock(nn.Module):
    def __init__(self, in_ch: int, skip_ch: int, out_ch: int, kernel: int,
                 activation: str, step: int, skip_pool: int):
        super().__init__()
        pad = (kernel - 1) // 2
        if step > 0:
            self.up = nn.ConvTranspose1d(in_ch, out_ch, kernel, stride=2,
                                         padding=pad, output_padding=1)
        elif step < 0:
            # Resolution decrease: a strided convolution keeps the readout
            # grid-aware of which input cell pair feeds each output value.
            self.up = nn.Conv1d(in_ch, out_ch, kernel, stride=2, padding=pad)
        else:
            self.up = nn.ConvTranspose1d(in_ch, out_ch, kernel, stride=1, padding=pad)
        self.skip_pool = nn.MaxPool1d(skip_pool) if skip_pool > 1 else nn.Identity()
        self.conv = nn.Conv1d(out_ch + skip_ch, out_ch, kernel, padding=pad)
        self.bn = nn.BatchNorm1d(out_ch)
        self.act = _activation(activation)

    def forward(self, x, skip):
        h = self.up(x)
        h = torch.cat([h, self.skip_pool(skip)], dim=1)
        return self.act(self.bn(self.conv(h)))


class DefectNet(nn.Module):
    """Built via build_model; see ModelConfig for the architecture knobs."""

    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        self.debug_checks = False
        steps = cfg.doubling_schedule()
        self.doubling_steps = steps

        # Contracting path and its per-block (length, channels) bookkeeping.
        self.contract = nn.ModuleList()
        lengths = []  # pre-pool length of contracting block i
        in_ch = 1
        length = cfg.input_len
        for i in range(cfg.num_blocks):
            out_ch = cfg.contract_channel(i)
            self.contract.append(ContractBlock(in_ch, out_ch, cfg.kernel_size, cfg.activation))
            lengths.append(length)
            in_ch = out_ch
            length //= 2

        pad = (cfg.kernel_size - 1) // 2
        self.bottleneck = nn.Sequential(
            nn.Conv1d(in_ch, in_ch, cfg.kernel_size, padding=pad),
            nn.BatchNorm1d(in_ch),
            _activation(cfg.activation),
        )

        # Expanding path; block j mirrors contracting block num_blocks-1-j.
        self.expand = nn.ModuleList()
        self.block_lengths = []  # (name, length, channels) rows for summaries
        for i, (ln, m) in enumerate(zip(lengths, self.contract)):
            self.block_lengths.append((f"contract[{i}]", ln, m.conv1.out_channels))
        self.block_lengths.append(("bottleneck", length, in_ch))
        for j in range(cfg.num_blocks):
            mirror = cfg.num_blocks - 1 - j
            out_ch = cfg.expand_channel(j)
            if steps[j] > 0:
                new_length = length * 2
            elif steps[j] < 0:
                new_length = length // 2
            else:
                new_length = length
            skip_pool = lengths[mirror] // new_length
            if skip_pool < 1 or lengths[mirror] % new_length != 0:
                raise DataError(
                    f"expanding block {j}: skip length {lengths[mirror]} "
                    f"not reducible to {new_length}"
                )
            self.expand.append(
                ExpandBlock(
                    in_ch,
                    self.contract[mirror].conv1.out_channels,
                    out_ch,
                    cfg.kernel_size,
                    cfg.activation,
                    step=steps[j],
                    skip_pool=skip_pool,
                )
            )
            in_ch = out_ch
            length = new_length
            marker = {1: "*2", -1: "/2", 0: ""}[steps[j]]
            self.block_lengths.append((f"expand[{j}]{marker}", length, out_ch))

        self.head = nn.Conv1d(in_ch, 1, 1)
        if length != cfg.output_len:
            raise DataError(
                f"resolution arithmetic broken: expanding path ends at {length}, "
                f"expected output {cfg.output_len}"
            )
        self.block_lengths.append(("head", cfg.output_len, 1))

        self._init_weights()

    def _init_weights(self):
        """Fan-in-scaled uniform init from the config seed; the output bias
        starts at the logit of the expected defect prior."""
        g = torch.Generator().manual_seed(self.cfg.rng_seed)
        for name, p in self.named_parameters():
            owner = self._owner_of(name)
            with torch.no_grad():
                if isinstance(owner, nn.BatchNorm1d):
                    p.fill_(1.0 if name.endswith("weight") else 0.0)
                elif p.ndim > 1:  # conv / transposed-conv kernels
                    if isinstance(owner, nn.ConvTranspose1d):
                        fan_in = p.shape[0] * math.prod(p.shape[2:])
                    else:
                        fan_in = p.shape[1] * math.prod(p.shape[2:])
                    bound = 1.0 / math.sqrt(max(fan_in, 1))
                    p.uniform_(-bound, bound, generator=g)
                else:
                    p.zero_()
        prior = self.cfg.output_bias_init_prior
        with torch.no_grad():
            self.head.bias.fill_(math.log(prior / (1.0 - prior)))

    def _owner_of(self, param_name: str) -> nn.Module:
        mod_path = param_name.rsplit(".", 1)[0]
        return self.get_submodule(mod_path)

    def _check(self, t: torch.Tensor, where: str):
        if self.debug_checks and not torch.isfinite(t).all():
            raise DataError(f"non-finite activation after {where}")

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        """x: (batch, input_len) or (batch, input_len, 1); returns (batch,
        output_len) probabilities in (0, 1)."""
        if x.ndim == 3:
            x = x.squeeze(-1)
        if x.ndim != 2 or x.shape[1] != self.cfg.input_len:
            raise DataError(f"expected input shape (B, {self.cfg.input_len}), got {tuple(x.shape)}")
        h = x.unsqueeze(1)
        skips = []
        for i, block in enumerate(self.contract):
            h, pre_pool = block(h)
            self._check(h, f"contract[{i}]")
            skips.append(pre_pool)
        h = self.bottleneck(h)
        self._check(h, "bottleneck")
        for j, block in enumerate(self.expand):
            h = block(h, skips[self.cfg.num_blocks - 1 - j])
            self._check(h, f"expand[{j}]")
        logits = self.head(h)
        return torch.sigmoid(logits).squeeze(1)

    def summary(self) -> str:
        lines = [f"{'stage':<16} {'length':>8} {'channels':>9}"]
        lines += [f"{name:<16} {ln:>8} {ch:>9}" for name, ln, ch in self.block_lengths]
        schedule = "".join({1: "2", 0: "1", -1: "h"}[s] for s in self.doubling_steps)
        lines.append(f"resolution step schedule (from bottleneck; 2=double, 1=keep, h=halve): {schedule}")
        lines.append(f"trainable parameters: {param_count(self):,}")
        return "\n".join(lines)


def build_model(cfg: ModelConfig) -> DefectNet:
    return DefectNet(cfg)


def param_count(m: nn.Module) -> int:
    return sum(p.numel() for p in m.parameters() if p.requires_grad)
