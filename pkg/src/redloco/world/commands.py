"""Velocity commands and the two-level command curriculum."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import WorldConfig
from ..errors import ContractError


@dataclass(frozen=True)
class Command:
    c_x: float                 # target forward speed, m/s
    c_yaw: float               # target heading, fixed per episode
    zero_flag: bool

    def __post_init__(self) -> None:
        if self.zero_flag != (self.c_x == 0.0):
            raise ContractError(f"zero_flag must equal (c_x == 0); got c_x={self.c_x}")


def make_command(c_x: float, c_yaw: float = 0.0) -> Command:
    return Command(float(c_x), float(c_yaw), float(c_x) == 0.0)


def sample_command(rng: np.random.Generator, curriculum_phase: int,
                   cfg: WorldConfig | None = None) -> Command:
    """Phase 1 draws speeds from [0.2, 1.0]; phase 2 widens to [0, 1.0].

    Phase-2 draws below ``zero_cmd_snap`` collapse to an exact standstill
    command so zero-velocity episodes occur with positive probability.
    """
    cfg = cfg or WorldConfig()
    if curriculum_phase not in (1, 2):
        raise ContractError(f"curriculum_phase must be 1 or 2, got {curriculum_phase}")
    if curriculum_phase == 1:
        c_x = float(rng.uniform(0.2, 1.0))
    else:
        c_x = float(rng.uniform(0.0, 1.0))
        if c_x < cfg.zero_cmd_snap:
            c_x = 0.0
    c_yaw = float(rng.uniform(-cfg.yaw_cmd_range, cfg.yaw_cmd_range))
    return make_command(c_x, c_yaw)


def update_curriculum(level: int, distance: float, commanded: float,
                      promote_ratio: float = 0.8, demote_ratio: float = 0.4,
                      n_levels: int = 10) -> int:
    """Promote when the episode covered >= promote_ratio of the commanded
    distance, demote below demote_ratio; zero-command episodes keep the level."""
    if commanded <= 0.0:
        return level
    ratio = distance / commanded
    if ratio >= promote_ratio:
        level += 1
    elif ratio < demote_ratio:
        level -= 1
    return min(max(level, 0), n_levels - 1)
