from .terrain import (DIFFICULT_KINDS, N_LEVELS, SIMPLE_KINDS, TERRAIN_KINDS,
                      Heightfield, difficulty_value, generate_terrain)
from .commands import Command, make_command, sample_command, update_curriculum
from .robot import OBS_DIM, PlanarWorld, PrivilegedInfo, RobotState, StepEvents
from .rewards import RewardTerm, compute_reward, linear_velocity_reward

__all__ = [
    "DIFFICULT_KINDS", "N_LEVELS", "SIMPLE_KINDS", "TERRAIN_KINDS", "Heightfield",
    "difficulty_value", "generate_terrain", "Command", "make_command",
    "sample_command", "update_curriculum", "OBS_DIM", "PlanarWorld",
    "PrivilegedInfo", "RobotState", "StepEvents", "RewardTerm", "compute_reward",
    "linear_velocity_reward",
]
