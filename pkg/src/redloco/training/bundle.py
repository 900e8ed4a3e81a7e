"""Construction and persistence of the full network set."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import config as config_mod
from ..config import TrainConfig
from ..errors import CheckpointError
from ..estimators import HimTargetEncoder, OpEstimator, VpEstimator
from ..nn import LayerStack, TensorParam, load_checkpoint, save_checkpoint
from ..selector.autoencoder import build_autoencoder
from ..world import OBS_DIM
from .policy import Critic, GaussianPolicy


def policy_obs_dim(cfg: TrainConfig) -> int:
    return 2 * cfg.net.latent + OBS_DIM


def critic_obs_dim(cfg: TrainConfig) -> int:
    return policy_obs_dim(cfg) + 2 + cfg.world.profile_samples


@dataclass
class Networks:
    op: OpEstimator
    vp: VpEstimator
    him: HimTargetEncoder
    ae: LayerStack
    policy: GaussianPolicy
    critic: Critic

    def named_stacks(self) -> dict[str, LayerStack | TensorParam]:
        out: dict[str, LayerStack | TensorParam] = {}
        for name, s in self.op.stacks.items():
            out[f"op.{name}"] = s
        for name, s in self.vp.stacks.items():
            out[f"vp.{name}"] = s
        out["him.him"] = self.him.stacks["him"]
        out["ae"] = self.ae
        out["actor"] = self.policy.actor
        out["log_std"] = self.policy.log_std
        out["critic"] = self.critic.net
        return out


def build_networks(cfg: TrainConfig, rng: np.random.Generator) -> Networks:
    op = OpEstimator(cfg.net, OBS_DIM, rng)
    vp = VpEstimator(cfg.net, OBS_DIM, (cfg.camera.height, cfg.camera.width),
                     cfg.world.profile_samples, rng)
    him = HimTargetEncoder(cfg.net, OBS_DIM, rng)
    ae = build_autoencoder(cfg.selector, cfg.camera.height, cfg.camera.width,
                           rng, dtype=cfg.net.dtype)
    policy = GaussianPolicy(cfg.net, policy_obs_dim(cfg), 2, rng)
    critic = Critic(cfg.net, critic_obs_dim(cfg), rng)
    return Networks(op, vp, him, ae, policy, critic)


def save_bundle(path: str | Path, cfg: TrainConfig, nets: Networks,
                extra_meta: dict | None = None) -> None:
    meta = {"config": config_mod.to_text(cfg)}
    if extra_meta:
        meta.update(extra_meta)
    save_checkpoint(path, nets.named_stacks(), meta)


def load_bundle(path: str | Path) -> tuple[TrainConfig, Networks, dict]:
    """Rebuild the network set from a checkpoint and its embedded config."""
    entries, meta = load_checkpoint(path)
    if "config" not in meta:
        raise CheckpointError(f"{path}: missing embedded config")
    cfg = config_mod.parse_text(meta["config"])
    nets = build_networks(cfg, np.random.default_rng(0))
    targets = nets.named_stacks()
    for name, loaded in entries.items():
        if name not in targets:
            raise CheckpointError(f"{path}: unexpected entry {name!r}")
        tgt = targets[name]
        if isinstance(loaded, TensorParam):
            tgt.values[...] = loaded.values
        else:
            for p_t, p_l in zip(tgt.params(), loaded.params()):
                if p_t.shape != p_l.shape:
                    raise CheckpointError(
                        f"{path}: shape mismatch for {name}.{p_t.name}")
                p_t.values[...] = p_l.values
    return cfg, nets, meta
