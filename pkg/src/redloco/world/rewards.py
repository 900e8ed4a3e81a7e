"""Per-step reward: command tracking plus shaping penalties.

The tracking term follows the capped-projection rule with a standstill
branch; shaping scales follow the pinned table in :class:`RewardConfig`.
Contributions are multiplied by dt when ``dt_scaled`` is set (the pinned
convention), so the collision penalty lands as scale * dt per event. Terms
with no planar analog are emitted as zero with ``planar_zero`` set.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import RewardConfig, WorldConfig
from .commands import Command
from .robot import PlanarWorld, RobotState, StepEvents


@dataclass(frozen=True)
class RewardTerm:
    value: float           # raw, unweighted term
    scale: float
    contribution: float    # scale * value (* dt under the pinned convention)
    planar_zero: bool = False


def linear_velocity_reward(c_x: float, v_along: float, v_norm: float) -> float:
    """Capped projection tracking with a standstill branch at c_x = 0."""
    if c_x != 0.0:
        return min(v_along, c_x) / (c_x + 1e-5)
    return 1.0 / (1.0 + v_norm)


def compute_reward(prev: RobotState, world: PlanarWorld, action, command: Command,
                   events: StepEvents, rcfg: RewardConfig
                   ) -> tuple[float, dict[str, RewardTerm]]:
    cfg: WorldConfig = world.cfg
    r = world.robot
    a = np.asarray(action, dtype=np.float64)
    dt = cfg.dt
    mult = dt if rcfg.dt_scaled else 1.0

    v_along = r.vx * np.cos(command.c_yaw)
    v_norm = abs(r.vx)
    lin = linear_velocity_reward(command.c_x, float(v_along), float(v_norm))

    # angular stability tracked against zero: the gait-implied rate grows
    # quadratically with speed, so this term penalizes sustained overspeed
    # with a noise-free gradient
    gait_rate = rcfg.gait_rate_gain * r.vx * abs(r.vx)
    ang = float(np.exp(-(gait_rate ** 2) / rcfg.ang_vel_sigma))
    coll = 1.0 if events.collision else 0.0
    energy = abs(r.ax * r.vx)
    act_rate = float(np.sum((a - prev.last_action) ** 2))
    support = world.support(r.x)
    if support > -np.inf:
        dev = (r.z - (support + cfg.stand_height)) / rcfg.default_pos_unit
        default_pos = min(dev * dev, rcfg.default_pos_cap)
    else:
        default_pos = 0.0
    joint_acc = ((r.ax - prev.ax) / dt) ** 2
    orient = r.pitch ** 2

    terms = {
        "lin_vel_tracking": RewardTerm(lin, rcfg.lin_vel, rcfg.lin_vel * lin * mult),
        "ang_vel_tracking": RewardTerm(ang, rcfg.ang_vel, rcfg.ang_vel * ang * mult),
        "collision": RewardTerm(coll, rcfg.collision, rcfg.collision * coll * mult),
        "joint_energy": RewardTerm(energy, rcfg.joint_energy, rcfg.joint_energy * energy * mult),
        "action_rate": RewardTerm(act_rate, rcfg.action_rate, rcfg.action_rate * act_rate * mult),
        "default_pos": RewardTerm(default_pos, rcfg.default_pos, rcfg.default_pos * default_pos * mult),
        "hip_bias": RewardTerm(0.0, rcfg.hip_bias, 0.0, planar_zero=True),
        "joint_acc": RewardTerm(joint_acc, rcfg.joint_acc, rcfg.joint_acc * joint_acc * mult),
        "orientation": RewardTerm(orient, rcfg.orientation, rcfg.orientation * orient * mult),
    }
    total = float(sum(t.contribution for t in terms.values()))
    return total, terms
