"""Optimizer update rules and checkpoint container round-trips."""

import numpy as np
import pytest

from redloco.errors import CheckpointError
from redloco.nn import (Adam, Conv2d, Elu, GruCell, LayerStack, Linear, TensorParam,
                        adam_update, load_checkpoint, save_checkpoint)


class TestAdam:
    def test_zero_grad_leaves_values_unchanged(self):
        p = TensorParam("w", np.array([1.0, -2.0, 3.0]))
        assert adam_update(p, lr=0.01)
        np.testing.assert_array_equal(p.values, [1.0, -2.0, 3.0])

    def test_first_step_moves_by_lr_times_sign(self):
        # bias-corrected first step: delta = -lr * g / (|g| + eps)
        for g in (0.5, -0.25, 3.0):
            p = TensorParam("w", np.array([1.0]))
            p.grad[...] = g
            adam_update(p, lr=1e-3)
            assert p.values[0] == pytest.approx(1.0 - 1e-3 * np.sign(g), abs=1e-9)

    def test_constant_grad_moves_monotonically_against_its_sign(self):
        p = TensorParam("w", np.array([0.0]))
        vals = [0.0]
        for _ in range(5):
            p.grad[...] = 2.0
            adam_update(p, lr=1e-2)
            vals.append(float(p.values[0]))
        assert all(b < a for a, b in zip(vals, vals[1:]))

    def test_non_finite_grad_rejected_and_flagged(self):
        p = TensorParam("w", np.array([1.0]))
        p.grad[...] = np.nan
        assert not adam_update(p, lr=1e-3)
        assert p.values[0] == 1.0
        assert p.step_count == 0
        np.testing.assert_array_equal(p.grad, [0.0])
        opt = Adam([p], lr=1e-3)
        p.grad[...] = np.inf
        assert opt.step() == 1
        assert opt.rejected == 1

    def test_grads_zeroed_and_step_counted_after_update(self):
        p = TensorParam("w", np.array([1.0, 2.0]))
        p.grad[...] = [0.1, -0.1]
        adam_update(p, lr=1e-3)
        np.testing.assert_array_equal(p.grad, [0.0, 0.0])
        assert p.step_count == 1
        assert np.isfinite(p.values).all()


class TestCheckpoint:
    def _stack(self, seed=0):
        return LayerStack([Linear(6, 8), Elu(), GruCell(8, 5), Linear(5, 3)],
                          (6,), np.random.default_rng(seed))

    def test_round_trip_is_bit_exact(self, tmp_path):
        s = self._stack(3)
        conv = LayerStack([Conv2d(2, 4, 3, 2, 1)], (2, 8, 8), np.random.default_rng(4))
        extra = TensorParam("log_std", np.array([-0.7, -0.3]))
        path = tmp_path / "net.ckpt"
        save_checkpoint(path, {"main": s, "conv": conv, "log_std": extra},
                        meta={"iteration": 7})
        entries, meta = load_checkpoint(path)
        assert meta["iteration"] == 7
        for a, b in zip(s.params(), entries["main"].params()):
            assert a.values.tobytes() == b.values.tobytes()
        for a, b in zip(conv.params(), entries["conv"].params()):
            assert a.values.tobytes() == b.values.tobytes()
        assert entries["log_std"].values.tobytes() == extra.values.tobytes()

    def test_saved_file_is_byte_stable(self, tmp_path):
        s = self._stack(5)
        save_checkpoint(tmp_path / "a.ckpt", {"s": s}, meta={"k": 1})
        save_checkpoint(tmp_path / "b.ckpt", {"s": s}, meta={"k": 1})
        assert (tmp_path / "a.ckpt").read_bytes() == (tmp_path / "b.ckpt").read_bytes()

    def test_restored_stack_reproduces_outputs_exactly(self, tmp_path):
        s = self._stack(6)
        save_checkpoint(tmp_path / "s.ckpt", {"s": s})
        entries, _ = load_checkpoint(tmp_path / "s.ckpt")
        x = np.random.default_rng(7).standard_normal((4, 6))
        h = np.random.default_rng(8).standard_normal((4, 5))
        y1, h1, _ = s.forward(x, h)
        y2, h2, _ = entries["s"].forward(x, h)
        assert y1.tobytes() == y2.tobytes()
        assert h1.tobytes() == h2.tobytes()

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "junk.ckpt"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(CheckpointError):
            load_checkpoint(path)

    def test_f32_stack_round_trips(self, tmp_path):
        s = LayerStack([Linear(3, 3)], (3,), np.random.default_rng(9), dtype="f32")
        save_checkpoint(tmp_path / "f32.ckpt", {"s": s})
        entries, _ = load_checkpoint(tmp_path / "f32.ckpt")
        loaded = entries["s"]
        assert loaded.dtype == np.float32
        for a, b in zip(s.params(), loaded.params()):
            assert a.values.tobytes() == b.values.tobytes()
