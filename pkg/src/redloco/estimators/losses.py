"""Supervised estimator losses.

Every term is a mean-over-components MSE (pinned convention, so the example
values in the tests are exact). The latent-target term backpropagates into
both the estimator and the target encoder.
"""

from __future__ import annotations

import numpy as np

from .networks import EstimatorOutput


def mse(pred: np.ndarray, target: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean squared error over all elements and its gradient w.r.t. pred."""
    diff = pred - target
    n = diff.size
    return float(np.mean(diff * diff)), (2.0 / n) * diff


def loss_op(out: EstimatorOutput, v_true: np.ndarray, z_hat: np.ndarray
            ) -> tuple[float, dict[str, np.ndarray]]:
    """Velocity MSE plus latent-target MSE; grads flow to both encoders."""
    lv, gv = mse(out.v_hat, v_true)
    lz, gz = mse(out.z_o, z_hat)
    return lv + lz, {"head_v": gv, "head_z": gz, "z_hat": -gz}


def loss_vp(out: EstimatorOutput, v_true: np.ndarray, z_hat: np.ndarray,
            h_f: np.ndarray, m_t: np.ndarray) -> tuple[float, dict[str, np.ndarray]]:
    """Adds feet-clearance and height-profile terms with unit weights."""
    lv, gv = mse(out.v_hat, v_true)
    lz, gz = mse(out.z_o, z_hat)
    lf, gf = mse(out.h_f_hat, h_f)
    lm, gm = mse(out.m_t_hat, m_t)
    return lv + lz + lf + lm, {"head_v": gv, "head_z": gz, "z_hat": -gz,
                               "head_hf": gf, "head_mt": gm}
