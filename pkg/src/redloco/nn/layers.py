"""Dense layer kernels with hand-derived reverse-mode gradients.

Every kernel is a pure function of (params, inputs); the forward returns a
record with exactly the arrays the matching backward needs. Backwards
accumulate into ``TensorParam.grad`` (additive; the optimizer zeroes).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..errors import ContractError


# ---------------------------------------------------------------------------
# layer descriptors

@dataclass(frozen=True)
class Linear:
    n_in: int
    n_out: int
    kind: str = field(default="linear", init=False)


@dataclass(frozen=True)
class Elu:
    alpha: float = 1.0
    kind: str = field(default="elu", init=False)


@dataclass(frozen=True)
class Tanh:
    kind: str = field(default="tanh", init=False)


@dataclass(frozen=True)
class Sigmoid:
    kind: str = field(default="sigmoid", init=False)


@dataclass(frozen=True)
class Conv2d:
    c_in: int
    c_out: int
    kernel: int
    stride: int
    pad: int
    kind: str = field(default="conv2d", init=False)


@dataclass(frozen=True)
class Deconv2d:
    c_in: int
    c_out: int
    kernel: int
    stride: int
    pad: int
    out_pad: tuple[int, int] = (0, 0)
    kind: str = field(default="deconv2d", init=False)


@dataclass(frozen=True)
class GruCell:
    n_in: int
    n_hidden: int
    kind: str = field(default="gru_cell", init=False)


@dataclass(frozen=True)
class Attention1h:
    d_in: int
    d_k: int
    d_v: int
    kind: str = field(default="attention_1h", init=False)


@dataclass(frozen=True)
class Flatten:
    kind: str = field(default="flatten", init=False)


@dataclass(frozen=True)
class Reshape:
    shape: tuple[int, ...]
    kind: str = field(default="reshape", init=False)


LayerDesc = (
    Linear | Elu | Tanh | Sigmoid | Conv2d | Deconv2d | GruCell | Attention1h | Flatten | Reshape
)


# ---------------------------------------------------------------------------
# shape arithmetic

def conv_shape(input_shape: tuple[int, ...], kernel: int, stride: int, padding: int,
               out_channels: int | None = None) -> tuple[int, ...]:
    """Output shape of a direct 2D convolution over (C, H, W)."""
    if len(input_shape) != 3:
        raise ContractError(f"conv_shape expects (C, H, W), got {input_shape}")
    c, h, w = input_shape
    if min(c, h, w, kernel, stride) < 1 or padding < 0:
        raise ContractError(f"non-positive conv geometry: {input_shape} k={kernel} s={stride} p={padding}")
    ho = (h + 2 * padding - kernel) // stride + 1
    wo = (w + 2 * padding - kernel) // stride + 1
    if ho < 1 or wo < 1:
        raise ContractError(f"conv output collapses: {input_shape} k={kernel} s={stride} p={padding} -> ({ho},{wo})")
    return (out_channels if out_channels is not None else c, ho, wo)


def deconv_shape(input_shape: tuple[int, ...], kernel: int, stride: int, padding: int,
                 out_pad: tuple[int, int] = (0, 0), out_channels: int | None = None) -> tuple[int, ...]:
    """Output shape of a transposed convolution; inverts :func:`conv_shape`."""
    if len(input_shape) != 3:
        raise ContractError(f"deconv_shape expects (C, H, W), got {input_shape}")
    c, h, w = input_shape
    ho = (h - 1) * stride - 2 * padding + kernel + out_pad[0]
    wo = (w - 1) * stride - 2 * padding + kernel + out_pad[1]
    if ho < 1 or wo < 1:
        raise ContractError(f"deconv output collapses: {input_shape} -> ({ho},{wo})")
    return (out_channels if out_channels is not None else c, ho, wo)


def mirror_out_pad(conv_in: tuple[int, int], kernel: int, stride: int, padding: int) -> tuple[int, int]:
    """Output padding that makes a deconv exactly undo a conv of this geometry."""
    h, w = conv_in
    ho = (h + 2 * padding - kernel) // stride + 1
    wo = (w + 2 * padding - kernel) // stride + 1
    oph = h - ((ho - 1) * stride - 2 * padding + kernel)
    opw = w - ((wo - 1) * stride - 2 * padding + kernel)
    if oph < 0 or opw < 0:
        raise ContractError(f"conv geometry k={kernel} s={stride} p={padding} not mirrorable for {conv_in}")
    return (oph, opw)


def infer_shape(layer: LayerDesc, in_shape: tuple[int, ...]) -> tuple[int, ...]:
    k = layer.kind
    if k == "linear":
        if in_shape != (layer.n_in,):
            raise ContractError(f"linear expects ({layer.n_in},), got {in_shape}")
        return (layer.n_out,)
    if k in ("elu", "tanh", "sigmoid"):
        return in_shape
    if k == "conv2d":
        if len(in_shape) != 3 or in_shape[0] != layer.c_in:
            raise ContractError(f"conv2d expects ({layer.c_in}, H, W), got {in_shape}")
        return conv_shape(in_shape, layer.kernel, layer.stride, layer.pad, layer.c_out)
    if k == "deconv2d":
        if len(in_shape) != 3 or in_shape[0] != layer.c_in:
            raise ContractError(f"deconv2d expects ({layer.c_in}, H, W), got {in_shape}")
        return deconv_shape(in_shape, layer.kernel, layer.stride, layer.pad, layer.out_pad, layer.c_out)
    if k == "gru_cell":
        if in_shape != (layer.n_in,):
            raise ContractError(f"gru_cell expects ({layer.n_in},), got {in_shape}")
        return (layer.n_hidden,)
    if k == "attention_1h":
        if len(in_shape) != 2 or in_shape[1] != layer.d_in:
            raise ContractError(f"attention_1h expects (T, {layer.d_in}), got {in_shape}")
        if in_shape[0] < 1:
            raise ContractError("attention_1h needs at least one token")
        return (layer.d_v,)
    if k == "flatten":
        return (int(np.prod(in_shape)),)
    if k == "reshape":
        if int(np.prod(in_shape)) != int(np.prod(layer.shape)):
            raise ContractError(f"reshape {in_shape} -> {layer.shape} changes element count")
        return tuple(layer.shape)
    raise ContractError(f"unknown layer kind {k!r}")


# ---------------------------------------------------------------------------
# initialization: fan-in-scaled uniform weights, zero biases

def init_params(layer: LayerDesc, rng: np.random.Generator, dtype: np.dtype) -> dict[str, np.ndarray]:
    def uni(fan_in: int, shape: tuple[int, ...]) -> np.ndarray:
        lim = float(np.sqrt(1.0 / max(fan_in, 1)))
        return rng.uniform(-lim, lim, size=shape).astype(dtype)

    k = layer.kind
    if k == "linear":
        return {"W": uni(layer.n_in, (layer.n_in, layer.n_out)),
                "b": np.zeros(layer.n_out, dtype=dtype)}
    if k == "conv2d":
        fan = layer.c_in * layer.kernel * layer.kernel
        return {"W": uni(fan, (layer.c_out, layer.c_in, layer.kernel, layer.kernel)),
                "b": np.zeros(layer.c_out, dtype=dtype)}
    if k == "deconv2d":
        fan = layer.c_in * layer.kernel * layer.kernel
        return {"W": uni(fan, (layer.c_in, layer.c_out, layer.kernel, layer.kernel)),
                "b": np.zeros(layer.c_out, dtype=dtype)}
    if k == "gru_cell":
        ni, nh = layer.n_in, layer.n_hidden
        out: dict[str, np.ndarray] = {}
        for gate in ("z", "r", "n"):
            out[f"W{gate}"] = uni(ni, (ni, nh))
            out[f"U{gate}"] = uni(nh, (nh, nh))
            out[f"b{gate}"] = np.zeros(nh, dtype=dtype)
        return out
    if k == "attention_1h":
        return {"q": uni(layer.d_k, (layer.d_k,)),
                "Wk": uni(layer.d_in, (layer.d_in, layer.d_k)),
                "bk": np.zeros(layer.d_k, dtype=dtype),
                "Wv": uni(layer.d_in, (layer.d_in, layer.d_v)),
                "bv": np.zeros(layer.d_v, dtype=dtype)}
    return {}


# ---------------------------------------------------------------------------
# elementwise helpers

def _sigmoid(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-np.clip(x, -60.0, 60.0)))


# ---------------------------------------------------------------------------
# forward/backward kernels; `P` maps param name -> TensorParam

def forward(layer: LayerDesc, P: dict[str, Any], x: np.ndarray,
            hidden: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray | None, Any]:
    k = layer.kind
    if k == "linear":
        y = x @ P["W"].values + P["b"].values
        return y, None, x
    if k == "elu":
        y = np.where(x > 0, x, layer.alpha * np.expm1(np.minimum(x, 0.0)))
        return y, None, (x, y)
    if k == "tanh":
        y = np.tanh(x)
        return y, None, y
    if k == "sigmoid":
        y = _sigmoid(x)
        return y, None, y
    if k == "conv2d":
        y, rec = _conv2d_fwd(x, P["W"].values, P["b"].values, layer)
        return y, None, rec
    if k == "deconv2d":
        y, rec = _deconv2d_fwd(x, P["W"].values, P["b"].values, layer)
        return y, None, rec
    if k == "gru_cell":
        if hidden is None:
            raise ContractError("gru_cell forward requires a hidden state")
        return _gru_fwd(x, hidden, P)
    if k == "attention_1h":
        y, rec = _attn_fwd(x, P)
        return y, None, rec
    if k == "flatten":
        y = x.reshape(x.shape[0], -1)
        return y, None, x.shape
    if k == "reshape":
        y = x.reshape((x.shape[0],) + tuple(layer.shape))
        return y, None, x.shape
    raise ContractError(f"unknown layer kind {k!r}")


def backward(layer: LayerDesc, P: dict[str, Any], rec: Any,
             gy: np.ndarray) -> tuple[np.ndarray, np.ndarray | None]:
    """Returns (grad wrt input, grad wrt previous hidden or None)."""
    k = layer.kind
    if k == "linear":
        x = rec
        P["W"].grad += x.T @ gy
        P["b"].grad += gy.sum(0)
        return gy @ P["W"].values.T, None
    if k == "elu":
        x, y = rec
        return gy * np.where(x > 0, 1.0, y + layer.alpha), None
    if k == "tanh":
        y = rec
        return gy * (1.0 - y * y), None
    if k == "sigmoid":
        y = rec
        return gy * y * (1.0 - y), None
    if k == "conv2d":
        return _conv2d_bwd(gy, rec, P, layer), None
    if k == "deconv2d":
        return _deconv2d_bwd(gy, rec, P, layer), None
    if k == "gru_cell":
        return _gru_bwd(gy, rec, P)
    if k == "attention_1h":
        return _attn_bwd(gy, rec, P), None
    if k == "flatten":
        return gy.reshape(rec), None
    if k == "reshape":
        return gy.reshape(rec), None
    raise ContractError(f"unknown layer kind {k!r}")


# --- conv2d ---
# Channels-last internally: per-tap strided slices feed one GEMM each.

def _conv2d_fwd(x, W, b, L: Conv2d):
    B, C, H, Wd = x.shape
    _, ho, wo = conv_shape((C, H, Wd), L.kernel, L.stride, L.pad, L.c_out)
    p, s = L.pad, L.stride
    xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
    xp_t = np.ascontiguousarray(xp.transpose(0, 2, 3, 1))
    w_t = W.transpose(2, 3, 1, 0)          # (k, k, C, O)
    y_t = np.empty((B, ho, wo, L.c_out), dtype=x.dtype)
    y_t[...] = b
    for di in range(L.kernel):
        for dj in range(L.kernel):
            xs = xp_t[:, di:di + s * ho:s, dj:dj + s * wo:s, :]
            y_t += xs @ w_t[di, dj]
    return np.ascontiguousarray(y_t.transpose(0, 3, 1, 2)), (xp_t, x.shape)


def _conv2d_bwd(gy, rec, P, L: Conv2d):
    xp_t, xshape = rec
    B, C, H, Wd = xshape
    ho, wo = gy.shape[2], gy.shape[3]
    p, s = L.pad, L.stride
    w_t = P["W"].values.transpose(2, 3, 1, 0)
    gy_t = np.ascontiguousarray(gy.transpose(0, 2, 3, 1))
    gy_flat = gy_t.reshape(-1, L.c_out)
    P["b"].grad += gy_flat.sum(0)
    gxp_t = np.zeros_like(xp_t)
    for di in range(L.kernel):
        for dj in range(L.kernel):
            xs = xp_t[:, di:di + s * ho:s, dj:dj + s * wo:s, :]
            P["W"].grad[:, :, di, dj] += (xs.reshape(-1, C).T @ gy_flat).T
            gxp_t[:, di:di + s * ho:s, dj:dj + s * wo:s, :] += gy_t @ w_t[di, dj].T
    gx_t = gxp_t[:, p:p + H, p:p + Wd, :] if p else gxp_t
    return np.ascontiguousarray(gx_t.transpose(0, 3, 1, 2))


# --- deconv2d (transposed conv) ---

def _deconv2d_fwd(x, W, b, L: Deconv2d):
    B, C, H, Wd = x.shape
    _, ho, wo = deconv_shape((C, H, Wd), L.kernel, L.stride, L.pad, L.out_pad, L.c_out)
    s, p = L.stride, L.pad
    x_t = np.ascontiguousarray(x.transpose(0, 2, 3, 1))
    w_t = W.transpose(2, 3, 0, 1)          # (k, k, C, O)
    full_t = np.zeros((B, (H - 1) * s + L.kernel + L.out_pad[0],
                       (Wd - 1) * s + L.kernel + L.out_pad[1], L.c_out), dtype=x.dtype)
    for di in range(L.kernel):
        for dj in range(L.kernel):
            full_t[:, di:di + s * H:s, dj:dj + s * Wd:s, :] += x_t @ w_t[di, dj]
    y_t = full_t[:, p:p + ho, p:p + wo, :] + b
    return np.ascontiguousarray(y_t.transpose(0, 3, 1, 2)), (x_t, full_t.shape)


def _deconv2d_bwd(gy, rec, P, L: Deconv2d):
    x_t, full_shape = rec
    B, H, Wd, C = x_t.shape
    s, p = L.stride, L.pad
    w_t = P["W"].values.transpose(2, 3, 0, 1)
    gy_t = gy.transpose(0, 2, 3, 1)
    P["b"].grad += gy.sum((0, 2, 3))
    gfull_t = np.zeros(full_shape, dtype=gy.dtype)
    gfull_t[:, p:p + gy.shape[2], p:p + gy.shape[3], :] = gy_t
    gx_t = np.zeros_like(x_t)
    x_flat = x_t.reshape(-1, C)
    for di in range(L.kernel):
        for dj in range(L.kernel):
            gslice = gfull_t[:, di:di + s * H:s, dj:dj + s * Wd:s, :]
            P["W"].grad[:, :, di, dj] += x_flat.T @ gslice.reshape(-1, L.c_out)
            gx_t += gslice @ w_t[di, dj].T
    return np.ascontiguousarray(gx_t.transpose(0, 3, 1, 2))


# --- gru cell ---
# z = sig(x Wz + h Uz + bz); r = sig(x Wr + h Ur + br)
# n = tanh(x Wn + r * (h Un) + bn); h' = (1 - z) * n + z * h

def _gru_fwd(x, h, P):
    z = _sigmoid(x @ P["Wz"].values + h @ P["Uz"].values + P["bz"].values)
    r = _sigmoid(x @ P["Wr"].values + h @ P["Ur"].values + P["br"].values)
    hU = h @ P["Un"].values
    n = np.tanh(x @ P["Wn"].values + r * hU + P["bn"].values)
    h_new = (1.0 - z) * n + z * h
    return h_new, h_new, (x, h, z, r, n, hU)


def _gru_bwd(gy, rec, P):
    x, h, z, r, n, hU = rec
    gn = gy * (1.0 - z)
    gz = gy * (h - n)
    gh = gy * z
    gan = gn * (1.0 - n * n)
    P["Wn"].grad += x.T @ gan
    P["bn"].grad += gan.sum(0)
    gx = gan @ P["Wn"].values.T
    gr = gan * hU
    ghU = gan * r
    P["Un"].grad += h.T @ ghU
    gh = gh + ghU @ P["Un"].values.T
    gar = gr * r * (1.0 - r)
    P["Wr"].grad += x.T @ gar
    P["Ur"].grad += h.T @ gar
    P["br"].grad += gar.sum(0)
    gx += gar @ P["Wr"].values.T
    gh += gar @ P["Ur"].values.T
    gaz = gz * z * (1.0 - z)
    P["Wz"].grad += x.T @ gaz
    P["Uz"].grad += h.T @ gaz
    P["bz"].grad += gaz.sum(0)
    gx += gaz @ P["Wz"].values.T
    gh += gaz @ P["Uz"].values.T
    return gx, gh


# --- single-head attention over a token axis ---
# scores = (X Wk + bk) @ q / sqrt(d_k); w = softmax(scores); y = sum_t w_t (X Wv + bv)_t

def _attn_fwd(x, P):
    if x.ndim != 3:
        raise ContractError(f"attention_1h expects (B, T, D), got {x.shape}")
    kmat = x @ P["Wk"].values + P["bk"].values
    v = x @ P["Wv"].values + P["bv"].values
    scale = 1.0 / np.sqrt(P["q"].values.shape[0])
    s = (kmat @ P["q"].values) * scale
    s = s - s.max(axis=1, keepdims=True)
    e = np.exp(s)
    w = e / e.sum(axis=1, keepdims=True)
    y = np.einsum("bt,btd->bd", w, v, optimize=True)
    return y, (x, kmat, v, w, scale)


def _attn_bwd(gy, rec, P):
    x, kmat, v, w, scale = rec
    gw = np.einsum("bd,btd->bt", gy, v, optimize=True)
    gv = w[:, :, None] * gy[:, None, :]
    gs = w * (gw - (w * gw).sum(axis=1, keepdims=True))
    P["q"].grad += np.einsum("bt,btk->k", gs, kmat, optimize=True) * scale
    gk = gs[:, :, None] * (P["q"].values[None, None, :] * scale)
    P["Wk"].grad += np.einsum("btd,btk->dk", x, gk, optimize=True)
    P["bk"].grad += gk.sum((0, 1))
    P["Wv"].grad += np.einsum("btd,btk->dk", x, gv, optimize=True)
    P["bv"].grad += gv.sum((0, 1))
    return gk @ P["Wk"].values.T + gv @ P["Wv"].values.T


def attention_weights(rec: Any) -> np.ndarray:
    """Softmax weights recorded by an attention forward (one row per query)."""
    return rec[3]
