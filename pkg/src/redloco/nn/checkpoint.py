"""Versioned checkpoint container.

Layout: 4-byte magic, 8-byte little-endian manifest length, JSON manifest
(layer descriptors, shapes, dtype, format version, free-form meta), then the
flat little-endian parameter arrays in declaration order. Round-trips are
bit-exact.
"""

from __future__ import annotations

import dataclasses
import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from . import layers as L
from .stack import LayerStack, TensorParam

MAGIC = b"RLCK"
FORMAT_VERSION = 1

_KINDS = {
    "linear": L.Linear, "elu": L.Elu, "tanh": L.Tanh, "sigmoid": L.Sigmoid,
    "conv2d": L.Conv2d, "deconv2d": L.Deconv2d, "gru_cell": L.GruCell,
    "attention_1h": L.Attention1h, "flatten": L.Flatten, "reshape": L.Reshape,
}
_TUPLE_FIELDS = {"out_pad", "shape"}


def _desc_to_dict(d: L.LayerDesc) -> dict:
    out = {"kind": d.kind}
    for f in dataclasses.fields(d):
        if f.name == "kind":
            continue
        v = getattr(d, f.name)
        out[f.name] = list(v) if isinstance(v, tuple) else v
    return out


def _desc_from_dict(d: dict) -> L.LayerDesc:
    d = dict(d)
    kind = d.pop("kind")
    if kind not in _KINDS:
        raise CheckpointError(f"unknown layer kind {kind!r} in checkpoint")
    kwargs = {k: tuple(v) if k in _TUPLE_FIELDS else v for k, v in d.items()}
    return _KINDS[kind](**kwargs)


def _wire_dtype(name: str) -> str:
    return "<f8" if name == "f64" else "<f4"


def save_checkpoint(path: str | Path, entries: dict[str, LayerStack | TensorParam],
                    meta: dict | None = None) -> None:
    manifest_entries = []
    blobs: list[bytes] = []
    for name, obj in entries.items():
        if isinstance(obj, LayerStack):
            manifest_entries.append({
                "name": name, "type": "stack", "dtype": obj.dtype_name,
                "input_shape": list(obj.input_shape),
                "layers": [_desc_to_dict(d) for d in obj.descs],
                "params": [{"name": p.name, "shape": list(p.shape)} for p in obj.params()],
            })
            wire = _wire_dtype(obj.dtype_name)
            blobs.extend(np.ascontiguousarray(p.values, dtype=wire).tobytes()
                         for p in obj.params())
        elif isinstance(obj, TensorParam):
            dtype_name = "f64" if obj.values.dtype == np.float64 else "f32"
            manifest_entries.append({
                "name": name, "type": "param", "dtype": dtype_name,
                "shape": list(obj.shape),
            })
            blobs.append(np.ascontiguousarray(obj.values, dtype=_wire_dtype(dtype_name)).tobytes())
        else:
            raise CheckpointError(f"cannot checkpoint object of type {type(obj)!r}")
    manifest = {"format": "redloco-checkpoint", "version": FORMAT_VERSION,
                "meta": meta or {}, "entries": manifest_entries}
    mbytes = json.dumps(manifest, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<Q", len(mbytes)))
        f.write(mbytes)
        for b in blobs:
            f.write(b)


def load_checkpoint(path: str | Path) -> tuple[dict[str, LayerStack | TensorParam], dict]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint container")
    (mlen,) = struct.unpack("<Q", raw[4:12])
    manifest = json.loads(raw[12:12 + mlen].decode())
    if manifest.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {manifest.get('version')}")
    offset = 12 + mlen
    entries: dict[str, LayerStack | TensorParam] = {}
    throwaway = np.random.default_rng(0)
    for e in manifest["entries"]:
        wire = _wire_dtype(e["dtype"])
        itemsize = 8 if e["dtype"] == "f64" else 4
        if e["type"] == "stack":
            stack = LayerStack([_desc_from_dict(d) for d in e["layers"]],
                               tuple(e["input_shape"]), throwaway, dtype=e["dtype"])
            for p, pinfo in zip(stack.params(), e["params"]):
                shape = tuple(pinfo["shape"])
                n = int(np.prod(shape)) if shape else 1
                arr = np.frombuffer(raw, dtype=wire, count=n, offset=offset).reshape(shape)
                offset += n * itemsize
                p.values = arr.astype(p.values.dtype)
                p.__post_init__()
            entries[e["name"]] = stack
        else:
            shape = tuple(e["shape"])
            n = int(np.prod(shape)) if shape else 1
            arr = np.frombuffer(raw, dtype=wire, count=n, offset=offset).reshape(shape)
            offset += n * itemsize
            entries[e["name"]] = TensorParam(e["name"], arr.astype(
                np.float64 if e["dtype"] == "f64" else np.float32))
    if offset != len(raw):
        raise CheckpointError(f"{path}: trailing bytes ({len(raw) - offset})")
    return entries, manifest["meta"]
