"""Finite-difference verification of the supervised losses end to end.

The layer suite lives in ``redloco.nn.gradcheck``; this module checks the
full loss pipelines (estimator losses and the autoencoder reconstruction
loss) against central differences over every parameter, at small widths and
float64. The FD side only calls forwards.
"""

from __future__ import annotations

import dataclasses

import numpy as np

from ..config import NetConfig, SelectorConfig
from ..estimators import HimTargetEncoder, OpEstimator, VpEstimator, loss_op, loss_vp
from ..nn.gradcheck import LAYER_KINDS, fd_grad, rel_err, run_layer_suite
from ..selector.autoencoder import build_autoencoder

TINY_NET = NetConfig(history_len=2, embed_hidden=4, embed_out=3, cnn_channels=(2, 2, 2),
                     encoder_hidden=4, encoder_out=3, gru_hidden=4, latent=3, z_dim=2,
                     him_hidden=4, dtype="f64")
TINY_OBS = 2
TINY_HW = (4, 4)
TINY_PROFILE = 3


def _check_params(objective, nets, eps: float = 1e-5) -> float:
    worst = 0.0
    for net in nets:
        for p in net.params():
            worst = max(worst, rel_err(p.grad, fd_grad(objective, p.values, eps)))
    return worst


def check_op_loss(seed: int, variant: str = "mlp") -> float:
    rng = np.random.default_rng([seed, 11])
    cfg = dataclasses.replace(TINY_NET, encoder=variant)
    op = OpEstimator(cfg, TINY_OBS, rng)
    him = HimTargetEncoder(cfg, TINY_OBS, rng)
    b = int(rng.integers(1, 3))
    obs = rng.standard_normal((b, cfg.history_len * TINY_OBS))
    hidden = rng.standard_normal((b, cfg.gru_hidden)) * 0.5
    next_obs = rng.standard_normal((b, TINY_OBS))
    v_true = rng.standard_normal((b, 2))

    def objective() -> float:
        z_hat, _ = him.forward(next_obs, v_true)
        out, _ = op.forward(obs, hidden)
        val, _ = loss_op(out, v_true, z_hat)
        return val

    for net in (op, him):
        for p in net.params():
            p.zero_grad()
    z_hat, him_tape = him.forward(next_obs, v_true)
    out, rec = op.forward(obs, hidden)
    _, grads = loss_op(out, v_true, z_hat)
    him.backward(him_tape, grads["z_hat"])
    op.backward(rec, grads)
    return _check_params(objective, (op, him))


def check_vp_loss(seed: int, variant: str = "mlp") -> float:
    rng = np.random.default_rng([seed, 23])
    cfg = dataclasses.replace(TINY_NET, encoder=variant)
    vp = VpEstimator(cfg, TINY_OBS, TINY_HW, TINY_PROFILE, rng)
    him = HimTargetEncoder(cfg, TINY_OBS, rng)
    b = int(rng.integers(1, 3))
    obs = rng.standard_normal((b, cfg.history_len * TINY_OBS))
    depth = rng.uniform(0.1, 2.0, (b, cfg.depth_frames) + TINY_HW)
    hidden = rng.standard_normal((b, cfg.gru_hidden)) * 0.5
    next_obs = rng.standard_normal((b, TINY_OBS))
    v_true = rng.standard_normal((b, 2))
    h_f = rng.uniform(0, 2, (b, 2))
    m_t = rng.uniform(-1, 1, (b, TINY_PROFILE))

    def objective() -> float:
        z_hat, _ = him.forward(next_obs, v_true)
        out, _ = vp.forward(obs, depth, hidden)
        val, _ = loss_vp(out, v_true, z_hat, h_f, m_t)
        return val

    for net in (vp, him):
        for p in net.params():
            p.zero_grad()
    z_hat, him_tape = him.forward(next_obs, v_true)
    out, rec = vp.forward(obs, depth, hidden)
    _, grads = loss_vp(out, v_true, z_hat, h_f, m_t)
    him.backward(him_tape, grads["z_hat"])
    vp.backward(rec, grads)
    return _check_params(objective, (vp, him))


def check_ad_loss(seed: int) -> float:
    rng = np.random.default_rng([seed, 37])
    sel = SelectorConfig(ae_channels=(2, 2, 2), ae_bottleneck=4)
    ae = build_autoencoder(sel, *TINY_HW, rng)
    b = int(rng.integers(1, 3))
    frames = rng.uniform(0.1, 2.0, (b, 2) + TINY_HW)

    def objective() -> float:
        recon, _, _ = ae.forward(frames)
        diff = recon - frames
        return float(np.mean(diff * diff))

    ae.zero_grads()
    recon, _, tape = ae.forward(frames)
    diff = recon - frames
    ae.backward(tape, (2.0 / diff.size) * diff)
    worst = 0.0
    for p in ae.params():
        worst = max(worst, rel_err(p.grad, fd_grad(objective, p.values)))
    return worst


def run_loss_suite(instances: int = 20, seed: int = 0) -> dict[str, float]:
    out = {}
    out["loss_op"] = max(check_op_loss(seed + i, "mlp" if i % 2 else "attention")
                         for i in range(instances))
    out["loss_vp"] = max(check_vp_loss(seed + i, "mlp" if i % 2 else "attention")
                         for i in range(instances))
    out["loss_ad"] = max(check_ad_loss(seed + i) for i in range(instances))
    return out


def run_full_suite(instances: int = 20, seed: int = 0) -> dict[str, float]:
    """Layer kinds plus the three supervised losses; all must sit under 1e-4."""
    results = run_layer_suite(instances, seed)
    results.update(run_loss_suite(instances, seed))
    return results
