"""Vectorized stepping engine shared by the trainer and the eval harness.

Owns the environments, history buffers, estimator hidden states, and the
10 Hz-analog estimator tick (every ``tick_period`` sim steps). The caller
decides the fusion masks each tick, so the trainer can apply the adaptation
schedule while the eval harness runs the anomaly selector or pins a mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..config import TrainConfig
from ..estimators import DepthBuffer, EstimatorOutput, OpEstimator, ProprioBuffer, VpEstimator, fuse_batch
from ..selector.autoencoder import loss_ad_batch
from ..sensor import STAGE_RANDOMIZED, edge_truncate_resize, render_batch
from ..world import OBS_DIM, PlanarWorld, compute_reward, make_command, update_curriculum
from ..nn import LayerStack


@dataclass
class TickData:
    step: int
    flat_obs: np.ndarray           # (E, H1 * od)
    depth_pairs: np.ndarray        # (E, 2, H, W)
    op_out: EstimatorOutput
    vp_out: EstimatorOutput
    op_h0: np.ndarray              # hiddens before this tick
    vp_h0: np.ndarray
    v_true: np.ndarray             # (E, 2)
    h_f: np.ndarray                # (E, 2)
    m_t: np.ndarray                # (E, K)
    losses: np.ndarray | None      # (E,) anomaly losses, when an AE is attached
    pair_valid: np.ndarray         # (E,) both frames are real renders
    clean_stage: np.ndarray        # (E,) both frames are randomize-stage only
    resets_before: np.ndarray      # (E,) env reset since the previous tick
    next_obs: np.ndarray | None = None   # (E, od) filled one step later
    loss_valid: np.ndarray | None = None  # (E,) no episode boundary crossed
    masks: np.ndarray | None = None


@dataclass
class StepData:
    rewards: np.ndarray
    lin_vel: np.ndarray            # raw tracking term per env
    terminated: np.ndarray
    truncated: np.ndarray
    resets: np.ndarray
    collisions: np.ndarray


class VecRunner:
    def __init__(self, cfg: TrainConfig, kinds: list[str],
                 env_rngs: list[np.random.Generator],
                 op: OpEstimator, vp: VpEstimator, ae: LayerStack | None = None,
                 eval_mode: bool = False, fixed_commands=None,
                 start_levels: list[int] | None = None) -> None:
        self.cfg = cfg
        self.n = len(kinds)
        self.kinds = kinds
        self.op = op
        self.vp = vp
        self.ae = ae
        self.eval_mode = eval_mode
        self.fixed_commands = fixed_commands
        self.phase = 1
        self.env_rngs = env_rngs
        levels = start_levels or [0] * self.n
        self.worlds: list[PlanarWorld] = []
        for i, kind in enumerate(kinds):
            w = PlanarWorld(cfg.world, kind, env_rngs[i], level=levels[i])
            if eval_mode and fixed_commands is not None:
                w.reset_episode(command=fixed_commands[i])
            self.worlds.append(w)
        h1 = cfg.net.history_len
        self.pbufs = [ProprioBuffer(h1, OBS_DIM) for _ in range(self.n)]
        self.dbufs = [DepthBuffer(cfg.net.depth_frames, cfg.camera.height,
                                  cfg.camera.width) for _ in range(self.n)]
        self.op_hidden = op.zero_hidden(self.n)
        self.vp_hidden = vp.zero_hidden(self.n)
        self.latents = np.zeros((self.n, 2 * cfg.net.latent))
        self.masks = np.zeros(self.n, dtype=np.int64)
        self.m_t_held = np.zeros((self.n, cfg.world.profile_samples))
        self.obs = np.zeros((self.n, OBS_DIM))
        self.global_step = 0
        self.resets_since_tick = np.ones(self.n, dtype=bool)
        self._last_op_h = np.zeros((self.n, cfg.net.latent))
        self._last_vp_h = np.zeros((self.n, cfg.net.latent))
        for i, w in enumerate(self.worlds):
            self.pbufs[i].push(w.observation())
        self._refresh_obs()

    def _refresh_obs(self) -> None:
        self.obs = np.stack([w.observation() for w in self.worlds])

    def v_true(self) -> np.ndarray:
        return np.array([[w.robot.vx, w.robot.vz] for w in self.worlds])

    def levels(self) -> list[int]:
        return [w.level for w in self.worlds]

    def policy_obs(self) -> np.ndarray:
        return np.concatenate([self.latents, self.obs], axis=1)

    def critic_obs(self) -> np.ndarray:
        return np.concatenate([self.latents, self.obs, self.v_true(), self.m_t_held],
                              axis=1)

    # -- estimator tick ------------------------------------------------------
    def tick_estimators(self, noise_hook=None) -> TickData:
        cam = self.cfg.camera
        frames = render_batch(self.worlds, cam, self.env_rngs, randomize=True)
        if cam.edge_border > 0:
            frames = [edge_truncate_resize(f, cam.edge_border) for f in frames]
        # deployment corruption lands on the processed image the networks consume
        if noise_hook is not None:
            frames = [noise_hook(i, f, self.global_step) for i, f in enumerate(frames)]
        for i, f in enumerate(frames):
            self.dbufs[i].push(f)
        depth_pairs = np.stack([d.newest_pair() for d in self.dbufs])
        flat_obs = np.stack([p.flat() for p in self.pbufs])
        pair_valid = np.array([all(s is not None for s in d.stages) for d in self.dbufs])
        clean_stage = np.array([all(s == STAGE_RANDOMIZED for s in d.stages)
                                for d in self.dbufs])
        op_h0 = self.op_hidden.copy()
        vp_h0 = self.vp_hidden.copy()
        op_out, _ = self.op.forward(flat_obs, self.op_hidden)
        vp_out, _ = self.vp.forward(flat_obs, depth_pairs, self.vp_hidden)
        self.op_hidden = op_out.gru_hidden
        self.vp_hidden = vp_out.gru_hidden
        self._last_op_h = op_out.h
        self._last_vp_h = vp_out.h
        losses = None
        if self.ae is not None:
            recon, _, _ = self.ae.forward(depth_pairs)
            losses = loss_ad_batch(depth_pairs, recon)
        priv = [w.privileged() for w in self.worlds]
        v_true = np.stack([p.v_true for p in priv])
        h_f = np.stack([p.h_f for p in priv])
        m_t = np.stack([p.m_t for p in priv])
        self.m_t_held = m_t
        resets_before = self.resets_since_tick.copy()
        self.resets_since_tick[...] = False
        return TickData(self.global_step, flat_obs, depth_pairs, op_out, vp_out,
                        op_h0, vp_h0, v_true, h_f, m_t, losses, pair_valid,
                        clean_stage, resets_before)

    def set_latents(self, masks: np.ndarray) -> None:
        self.masks = np.asarray(masks, dtype=np.int64)
        self.latents = fuse_batch(self._last_op_h, self._last_vp_h, self.masks)

    # -- one sim step over all envs -------------------------------------------
    def step(self, actions: np.ndarray) -> StepData:
        cfg = self.cfg
        rewards = np.empty(self.n)
        lin = np.empty(self.n)
        terminated = np.zeros(self.n, dtype=bool)
        truncated = np.zeros(self.n, dtype=bool)
        resets = np.zeros(self.n, dtype=bool)
        collisions = np.zeros(self.n, dtype=bool)
        for i, w in enumerate(self.worlds):
            prev = w.snapshot()
            ev = w.step(actions[i])
            total, terms = compute_reward(prev, w, actions[i], w.command, ev, cfg.reward)
            rewards[i] = total
            lin[i] = terms["lin_vel_tracking"].value
            terminated[i] = ev.terminated
            truncated[i] = ev.truncated
            collisions[i] = ev.collision
            if ev.done:
                if not self.eval_mode:
                    along = (w.robot.x - w.start_x) * np.cos(w.command.c_yaw)
                    w.level = update_curriculum(w.level, along, w.commanded_distance,
                                                cfg.promote_ratio, cfg.demote_ratio)
                    w.curriculum_phase = self.phase
                cmd = self.fixed_commands[i] if (self.eval_mode and
                                                 self.fixed_commands) else None
                w.reset_episode(command=cmd)
                self.pbufs[i].reset()
                self.dbufs[i].reset()
                self.op_hidden[i] = 0.0
                self.vp_hidden[i] = 0.0
                self.latents[i] = 0.0
                self.m_t_held[i] = 0.0
                self.resets_since_tick[i] = True
                resets[i] = True
            self.pbufs[i].push(w.observation())
        self._refresh_obs()
        self.global_step += 1
        return StepData(rewards, lin, terminated, truncated, resets, collisions)

    def is_tick_step(self) -> bool:
        return self.global_step % self.cfg.selector.tick_period == 0
