"""Joint training loop: rollouts, policy update, supervised estimator and
autoencoder updates, curriculum and adaptation schedules, metrics, and
checkpoints. Fully deterministic under a fixed master seed."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import config as config_mod
from ..config import TrainConfig
from ..errors import RolloutAbort
from ..nn import Adam
from ..world import OBS_DIM
from .bundle import Networks, build_networks, critic_obs_dim, policy_obs_dim, save_bundle
from .ppo import ppo_update
from .rollout import RolloutBuffer
from .runner import VecRunner
from .schedule import AdaptationSchedule, PhaseTracker, terrain_class
from .supervised import supervised_update

METRICS_SCHEMA = "train-metrics/v1"
METRICS_COLUMNS = (
    "iteration", "mean_reward", "mean_lin_vel", "loss_op", "loss_vp", "loss_ad",
    "surrogate", "value_loss", "entropy", "clip_fraction", "mean_level", "phase",
    "mask_vp_fraction", "resets", "collisions", "adv_norm_skipped", "rejected_updates",
)


@dataclass
class TrainResult:
    checkpoint: Path
    metrics: Path
    masks_log: Path | None
    iterations: int
    final_mean_lin_vel: float
    duration: float = 0.0


class Trainer:
    def __init__(self, cfg: TrainConfig, out_dir: str | Path | None = None) -> None:
        self.cfg = cfg
        self.out_dir = Path(out_dir if out_dir is not None else cfg.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        ss = np.random.SeedSequence(cfg.seed)
        child = ss.spawn(5 + cfg.n_envs)
        self.net_rng = np.random.default_rng(child[0])
        self.sample_rng = np.random.default_rng(child[1])
        self.shuffle_rng = np.random.default_rng(child[2])
        self.ae_rng = np.random.default_rng(child[3])
        env_rngs = [np.random.default_rng(c) for c in child[5:]]
        self.nets: Networks = build_networks(cfg, self.net_rng)
        mix = list(cfg.terrain_mix)
        self.kinds = [mix[i % len(mix)] for i in range(cfg.n_envs)]
        self.runner = VecRunner(cfg, self.kinds, env_rngs, self.nets.op, self.nets.vp)
        self.schedule = AdaptationSchedule(self.kinds, cfg.flip_period)
        self.phase = PhaseTracker(cfg.phase_threshold,
                                  int(cfg.phase_budget_frac * cfg.iterations))
        p = cfg.ppo
        self.policy_opt = Adam(self.nets.policy.params(), p.lr)
        self.critic_opt = Adam(self.nets.critic.params(), p.lr)
        self.op_opt = Adam(self.nets.op.params(), p.est_lr)
        self.vp_opt = Adam(self.nets.vp.params(), p.est_lr)
        self.him_opt = Adam(self.nets.him.params(), p.est_lr)
        self.ae_opt = Adam(self.nets.ae.params(), p.ae_lr)

    # ------------------------------------------------------------------
    def collect(self, iteration: int) -> tuple[RolloutBuffer, np.ndarray]:
        cfg = self.cfg
        runner = self.runner
        masks = self.schedule.masks(iteration)
        buf = RolloutBuffer(cfg.n_envs, cfg.horizon, policy_obs_dim(cfg),
                            critic_obs_dim(cfg))
        pending = None
        for _ in range(cfg.horizon):
            if runner.is_tick_step():
                tick = runner.tick_estimators()
                runner.set_latents(masks)
                tick.masks = masks.copy()
                buf.add_tick(tick)
                pending = tick
            obs_p = runner.policy_obs()
            obs_c = runner.critic_obs()
            actions, log_probs = self.nets.policy.act(obs_p, self.sample_rng)
            values = self.nets.critic.value(obs_c)
            if not (np.isfinite(obs_p).all() and np.isfinite(actions).all()):
                self._dump_diagnostics(iteration, obs_p, actions)
                raise RolloutAbort(f"non-finite rollout data at iteration {iteration}")
            sd = runner.step(np.clip(actions, -1.0, 1.0))
            if not np.isfinite(sd.rewards).all():
                self._dump_diagnostics(iteration, obs_p, actions)
                raise RolloutAbort(f"non-finite reward at iteration {iteration}")
            if pending is not None:
                pending.next_obs = runner.obs.copy()
                pending.loss_valid = ~sd.resets
                pending = None
            buf.add_step(obs_p, obs_c, actions, log_probs, values, sd.rewards,
                         sd.lin_vel, sd.terminated, sd.truncated, masks,
                         collisions=sd.collisions)
        bootstrap = self.nets.critic.value(runner.critic_obs())
        return buf, bootstrap

    def _dump_diagnostics(self, iteration: int, obs: np.ndarray, actions: np.ndarray) -> None:
        path = self.out_dir / f"diagnostics_iter{iteration}.json"
        path.write_text(json.dumps({
            "schema": "rollout-diagnostics/v1", "iteration": iteration,
            "bad_obs_envs": np.where(~np.isfinite(obs).all(axis=1))[0].tolist(),
            "bad_action_envs": np.where(~np.isfinite(actions).all(axis=1))[0].tolist(),
        }, indent=2))

    # ------------------------------------------------------------------
    def run(self) -> TrainResult:
        import time
        t_start = time.time()
        cfg = self.cfg
        metrics_path = self.out_dir / "metrics.csv"
        masks_path = self.out_dir / "masks.csv" if cfg.log_masks else None
        mfile = open(metrics_path, "w")
        mfile.write(f"# schema: {METRICS_SCHEMA}\n")
        mfile.write(",".join(METRICS_COLUMNS) + "\n")
        kfile = None
        if masks_path:
            kfile = open(masks_path, "w")
            kfile.write("# schema: train-masks/v1\n")
            kfile.write("iteration,env,kind,terrain_class,mask\n")
        mean_lin = 0.0
        try:
            for it in range(cfg.iterations):
                self.runner.phase = self.phase.phase
                buf, bootstrap = self.collect(it)
                adv, ret = buf.compute_advantages(bootstrap, cfg.ppo.discount,
                                                  cfg.ppo.gae_lambda)
                stats = ppo_update(
                    self.nets.policy, self.nets.critic, self.policy_opt,
                    self.critic_opt, buf.flat(buf.obs), buf.flat(buf.critic_obs),
                    buf.flat(buf.actions), buf.flat(buf.log_probs),
                    adv.reshape(-1), ret.reshape(-1), cfg.ppo, self.shuffle_rng)
                sup = supervised_update(
                    self.nets.op, self.nets.vp, self.nets.him, self.nets.ae,
                    self.op_opt, self.vp_opt, self.him_opt, self.ae_opt,
                    buf.ticks, cfg.ppo, self.ae_rng)
                mean_lin = float(buf.lin_vel[:buf.ptr].mean())
                self.phase.update(it, mean_lin)
                row = (
                    it, float(buf.rewards[:buf.ptr].mean()), mean_lin, sup.loss_op,
                    sup.loss_vp, sup.loss_ad, stats.surrogate, stats.value_loss,
                    stats.entropy, stats.clip_fraction,
                    float(np.mean(self.runner.levels())), self.phase.phase,
                    float(np.mean(buf.masks[:buf.ptr] == 0)),
                    int(buf.terminated[:buf.ptr].sum() + buf.truncated[:buf.ptr].sum()),
                    int(buf.collisions[:buf.ptr].sum()),
                    int(stats.adv_norm_skipped), sup.rejected_updates,
                )
                mfile.write(",".join(repr(v) if isinstance(v, float) else str(v)
                                     for v in row) + "\n")
                if kfile:
                    masks = self.schedule.masks(it)
                    for i, kind in enumerate(self.kinds):
                        kfile.write(f"{it},{i},{kind},{terrain_class(kind)},{masks[i]}\n")
                if cfg.checkpoint_every and (it + 1) % cfg.checkpoint_every == 0:
                    save_bundle(self.out_dir / f"checkpoint_{it + 1}.ckpt", cfg,
                                self.nets, {"iteration": it + 1})
        finally:
            mfile.close()
            if kfile:
                kfile.close()
        ckpt = self.out_dir / "checkpoint.ckpt"
        save_bundle(ckpt, cfg, self.nets, {"iteration": cfg.iterations})
        config_mod.save(cfg, self.out_dir / "config.resolved.cfg")
        return TrainResult(ckpt, metrics_path, masks_path, cfg.iterations, mean_lin,
                           duration=time.time() - t_start)


def train(cfg: TrainConfig, out_dir: str | Path | None = None) -> TrainResult:
    return Trainer(cfg, out_dir).run()
