#!/usr/bin/env python3
"""Train the desk-scale joint checkpoint used by the evaluation protocols.

Roughly seven minutes on two cores. Writes checkpoint, metrics, mask log,
and a calibrated switching threshold next to it.
"""

import argparse
import time
from pathlib import Path

from redloco.config import desk_config
from redloco.harness import calibrate_beta_run, write_beta_file
from redloco.training import train


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="runs/desk")
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--iterations", type=int, default=600)
    ap.add_argument("--envs", type=int, default=24)
    args = ap.parse_args()

    cfg = desk_config()
    cfg.seed = args.seed
    cfg.n_envs = args.envs
    cfg.horizon = 48
    cfg.iterations = args.iterations
    cfg.terrain_mix = ("flat", "stairs_up", "gap", "flat", "stairs_down",
                       "platform", "flat", "rough")
    t0 = time.time()
    res = train(cfg, args.out)
    print(f"trained {args.iterations} iterations in {time.time() - t0:.0f}s; "
          f"final tracking {res.final_mean_lin_vel:.3f}")
    calib = calibrate_beta_run(res.checkpoint, episodes=20, seed=5)
    beta_path = Path(args.out) / "beta.cfg"
    write_beta_file(calib, beta_path)
    print(f"beta = {calib['beta']:.5f} ({calib['successful_episodes']} successful "
          f"episodes) -> {beta_path}")


if __name__ == "__main__":
    main()
