"""Fixed-length history buffers, zero-padded before warmup."""

from __future__ import annotations

import numpy as np

from ..errors import ContractError
from ..sensor.camera import DepthImage


class ProprioBuffer:
    """Ring of the last H proprioception vectors; flattens oldest-first."""

    def __init__(self, length: int, dim: int) -> None:
        self.length = length
        self.dim = dim
        self.data = np.zeros((length, dim))

    def push(self, obs: np.ndarray) -> None:
        obs = np.asarray(obs, dtype=np.float64)
        if obs.shape != (self.dim,):
            raise ContractError(f"observation shape {obs.shape} != ({self.dim},)")
        self.data[:-1] = self.data[1:]
        self.data[-1] = obs

    def flat(self) -> np.ndarray:
        return self.data.reshape(-1).copy()

    def reset(self) -> None:
        self.data[...] = 0.0


class DepthBuffer:
    """Ring of the last H depth frames; stacks oldest-first as channels."""

    def __init__(self, length: int, height: int, width: int) -> None:
        self.length = length
        self.shape = (height, width)
        self.data = np.zeros((length, height, width))
        self.stages: list[str | None] = [None] * length

    def push(self, img: DepthImage) -> None:
        if img.data.shape != self.shape:
            raise ContractError(f"frame shape {img.data.shape} != {self.shape}")
        self.data[:-1] = self.data[1:]
        self.data[-1] = img.data
        self.stages = self.stages[1:] + [img.stage]

    def stacked(self) -> np.ndarray:
        return self.data.copy()

    def newest_pair(self) -> np.ndarray:
        """The two most recent frames as (2, H, W), older first."""
        return self.data[-2:].copy()

    def reset(self) -> None:
        self.data[...] = 0.0
        self.stages = [None] * self.length
