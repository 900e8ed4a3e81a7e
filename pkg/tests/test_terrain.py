"""Terrain generation: determinism, difficulty schedules, dump format."""

import numpy as np
import pytest

from redloco.config import WorldConfig
from redloco.errors import ContractError
from redloco.world import (N_LEVELS, TERRAIN_KINDS, Heightfield, difficulty_value,
                           generate_terrain)


def test_flat_is_all_zero_with_no_voids():
    hf = generate_terrain("flat", 4, 123)
    np.testing.assert_array_equal(hf.heights, 0.0)
    assert not hf.void.any()


def test_generation_is_deterministic_per_kind_level_seed():
    for kind in TERRAIN_KINDS:
        a = generate_terrain(kind, 3, 77)
        b = generate_terrain(kind, 3, 77)
        assert a.heights.tobytes() == b.heights.tobytes()
        assert (a.void == b.void).all()


def test_gap_width_strictly_larger_at_top_level():
    cfg = WorldConfig()

    def first_gap_cells(level):
        hf = generate_terrain("gap", level, 5, cfg)
        runs, count = [], 0
        for v in hf.void:
            if v:
                count += 1
            elif count:
                runs.append(count)
                count = 0
        return max(runs)

    assert first_gap_cells(9) > first_gap_cells(0)


def test_stair_step_heights_follow_the_schedule():
    cfg = WorldConfig()
    hf = generate_terrain("stairs_up", 3, 11, cfg)
    expected = difficulty_value("stairs_up", 3, cfg)
    rises = np.diff(hf.heights)
    rises = rises[rises > 1e-9]
    np.testing.assert_allclose(rises, expected, atol=1e-12)
    assert hf.difficulty["step_height"] == pytest.approx(expected)


def test_difficulty_nondecreasing_in_level_for_every_kind():
    for kind in TERRAIN_KINDS:
        vals = [difficulty_value(kind, lv) for lv in range(N_LEVELS)]
        assert all(b >= a for a, b in zip(vals, vals[1:])), kind
        if kind != "flat":
            assert vals[-1] > vals[0]


def test_void_cells_only_on_gap_terrain():
    for kind in TERRAIN_KINDS:
        hf = generate_terrain(kind, 9, 1)
        assert hf.void.any() == (kind == "gap")


def test_height_at_returns_minus_inf_over_void():
    hf = generate_terrain("gap", 9, 2)
    i = int(np.argmax(hf.void))
    x = (i + 0.5) * hf.cell_size
    assert hf.height_at(x) == -np.inf
    assert hf.is_void_at(x)


def test_level_out_of_range_rejected():
    with pytest.raises(ContractError):
        generate_terrain("flat", 10, 0)
    with pytest.raises(ContractError):
        generate_terrain("volcano", 0, 0)


class TestDumpFormat:
    def test_round_trip_preserves_everything(self):
        hf = generate_terrain("gap", 6, 99)
        text = hf.dump_text()
        back = Heightfield.parse_text(text)
        assert back.kind == hf.kind
        assert back.level == hf.level
        assert back.cell_size == hf.cell_size
        np.testing.assert_array_equal(back.heights, hf.heights)
        np.testing.assert_array_equal(back.void, hf.void)
        assert back.difficulty == pytest.approx(hf.difficulty)

    def test_dump_carries_schema_field(self):
        assert generate_terrain("flat", 0, 0).dump_text().startswith("schema: terrain/v1")

    def test_stairs_golden_dump_is_stable(self):
        a = generate_terrain("stairs_down", 2, 42).dump_text()
        b = generate_terrain("stairs_down", 2, 42).dump_text()
        assert a == b
