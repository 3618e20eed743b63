"""Deterministic on-the-fly synthetic click dataset for the toy training run.

Each item is a sine carrier plus low-level noise with one inserted click
(offset >= 0.3). Items are generated from SeedSequence([seed, index]) so the
dataset is index-addressable and identical across epochs and processes.
"""

import numpy as np

from audiodefect.clicks import ClickConfig, click_target, insert_click
from audiodefect.waveio import Segment

_CLICK_CFG = ClickConfig(p_click=1.0)


class SyntheticClickDataset:
    def __init__(self, n: int, seed: int):
        self.n = n
        self.seed = seed

    def __len__(self):
        return self.n

    def __getitem__(self, i: int):
        rng = np.random.default_rng(np.random.SeedSequence([self.seed, i]))
        amp = rng.uniform(0.1, 0.6)
        freq = rng.uniform(100.0, 4000.0)
        phase = rng.uniform(0.0, 2 * np.pi)
        noise = rng.uniform(0.001, 0.01)
        t = np.arange(16384) / 44100.0
        x = amp * np.sin(2 * np.pi * freq * t + phase)
        x += noise * rng.standard_normal(16384)
        seg = Segment(samples=np.clip(x, -1, 1).astype(np.float32),
                      source_id=f"synth{i}", offset_samples=0)
        out, event = insert_click(seg, _CLICK_CFG, rng)
        return out.samples, click_target(event)

    @property
    def positive_prior(self) -> float:
        # One click of 1-3 samples marks 1-2 of 128 values.
        total = min(200, self.n)
        pos = sum(float(self[i][1].sum()) for i in range(total))
        return pos / (total * 128)
