"""Convolutional autoencoder over two consecutive depth frames.

Three stride-2 convolutions (8/16/32 channels) into a 64-wide dense
bottleneck, mirrored back with transposed convolutions whose output padding
is chosen to exactly invert each conv shape. Reconstruction error on a frame
pair is the anomaly signal.
"""

from __future__ import annotations

import numpy as np

from ..config import SelectorConfig
from ..errors import ContractError
from ..nn import (Conv2d, Deconv2d, Elu, Flatten, LayerStack, Linear, Reshape,
                  conv_shape, mirror_out_pad)


def build_autoencoder(cfg: SelectorConfig, height: int, width: int,
                      rng: np.random.Generator, dtype: str = "f64",
                      frames: int = 2) -> LayerStack:
    c1, c2, c3 = cfg.ae_channels
    k, s, p = cfg.ae_kernel, cfg.ae_stride, cfg.ae_pad
    s0 = (frames, height, width)
    s1 = conv_shape(s0, k, s, p, c1)
    s2 = conv_shape(s1, k, s, p, c2)
    s3 = conv_shape(s2, k, s, p, c3)
    flat = int(np.prod(s3))
    if cfg.ae_bottleneck >= frames * height * width:
        raise ContractError("bottleneck must be narrower than the input pixel count")
    op3 = mirror_out_pad(s2[1:], k, s, p)
    op2 = mirror_out_pad(s1[1:], k, s, p)
    op1 = mirror_out_pad(s0[1:], k, s, p)
    descs = [
        Conv2d(frames, c1, k, s, p), Elu(),
        Conv2d(c1, c2, k, s, p), Elu(),
        Conv2d(c2, c3, k, s, p), Elu(),
        Flatten(), Linear(flat, cfg.ae_bottleneck), Elu(),
        Linear(cfg.ae_bottleneck, flat), Elu(), Reshape(s3),
        Deconv2d(c3, c2, k, s, p, op3), Elu(),
        Deconv2d(c2, c1, k, s, p, op2), Elu(),
        Deconv2d(c1, frames, k, s, p, op1),
    ]
    return LayerStack(descs, s0, rng, dtype)


def autoencode(stack: LayerStack, frames: np.ndarray) -> np.ndarray:
    """Reconstruct a (2, H, W) pair or a (B, 2, H, W) batch."""
    single = frames.ndim == 3
    x = frames[None] if single else frames
    if x.shape[1:] != stack.input_shape:
        raise ContractError(f"frame shape {x.shape[1:]} != {stack.input_shape}")
    y, _, _ = stack.forward(x)
    return y[0] if single else y


def loss_ad(frames: np.ndarray, reconstruction: np.ndarray) -> float:
    """Mean squared error jointly over all pixels of both frames."""
    if frames.shape != reconstruction.shape:
        raise ContractError(f"shape mismatch {frames.shape} vs {reconstruction.shape}")
    diff = frames - reconstruction
    return float(np.mean(diff * diff))


def loss_ad_batch(frames: np.ndarray, reconstruction: np.ndarray) -> np.ndarray:
    """Per-sample reconstruction losses for a (B, 2, H, W) batch."""
    diff = frames - reconstruction
    return np.mean(diff * diff, axis=(1, 2, 3))
