import numpy as np
import pytest

from shuttersim import DimensionError, ParameterError, SceneKind, SceneSpec, gen_scene
from shuttersim.scenes import splitmix64, unit_floats


def spec(kind, **kwargs):
    defaults = dict(height=32, width=32, subframe_dt_s=0.01, count=4, seed=42)
    defaults.update(kwargs)
    return SceneSpec(kind, **defaults)


def _splitmix64_reference(counter: int, seed: int) -> int:
    """Independent pure-int implementation of the documented generator."""
    mask = (1 << 64) - 1
    z = (seed + (counter + 1) * 0x9E3779B97F4A7C15) & mask
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & mask
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & mask
    return z ^ (z >> 31)


class TestGenerator:
    def test_splitmix64_matches_reference(self):
        counters = np.array([0, 1, 2, 1000, 2**40], dtype=np.uint64)
        for seed in (0, 1, 12345, 2**63):
            got = splitmix64(counters, seed)
            expected = [_splitmix64_reference(int(c), seed) for c in counters]
            assert [int(g) for g in got] == expected

    def test_unit_floats_in_range(self):
        u = unit_floats(np.arange(10000), 7)
        assert u.min() >= 0.0 and u.max() < 1.0
        assert abs(u.mean() - 0.5) < 0.02


class TestStatic:
    def test_constant_value(self):
        seq = gen_scene(spec(SceneKind.STATIC, value=0.5))
        assert np.all(seq.data == 0.5)

    def test_count_one(self):
        assert len(gen_scene(spec(SceneKind.STATIC, count=1))) == 1


class TestTranslatingSine:
    def test_full_period_returns_to_start(self):
        # one horizontal period per second, sampled 64 times per second
        s = spec(
            SceneKind.TRANSLATING_SINE,
            width=128,
            period_px=(64.0, 64.0),
            velocity=(64.0, 0.0),
            subframe_dt_s=1 / 64,
            count=65,
        )
        seq = gen_scene(s)
        assert np.array_equal(seq.data[64], seq.data[0])

    def test_matches_closed_form(self):
        s = spec(
            SceneKind.TRANSLATING_SINE,
            height=8,
            width=16,
            period_px=(64.0, 32.0),
            velocity=(64.0, 0.0),
            subframe_dt_s=1 / 64,
            count=65,
            amplitude=0.9,
        )
        seq = gen_scene(s)
        x = np.arange(16)
        y = np.arange(8)
        for i in (0, 64):
            t = i * (64.0 * (1 / 64))
            expected = 0.5 + 0.5 * 0.9 * np.outer(
                np.cos(2 * np.pi * np.mod(y, 32.0) / 32.0),
                np.sin(2 * np.pi * np.mod(x - t, 64.0) / 64.0),
            )
            assert np.allclose(seq.data[i, :, :, 0], expected, atol=1e-15)


class TestTranslatingChecker:
    def test_integer_shift_is_exact_roll(self):
        # 2 px per subframe: frame t+1 is frame t rolled by 2 along x
        s = spec(
            SceneKind.TRANSLATING_CHECKER,
            velocity=(200.0, 0.0),
            subframe_dt_s=0.01,
            count=5,
            cell_px=4.0,
        )
        seq = gen_scene(s)
        for t in range(4):
            assert np.array_equal(seq.data[t + 1], np.roll(seq.data[t], 2, axis=1))

    def test_fractional_shift_stays_in_value_range(self):
        s = spec(SceneKind.TRANSLATING_CHECKER, velocity=(31.7, 12.3), count=8)
        seq = gen_scene(s)
        assert seq.data.min() >= 0.25 - 1e-12
        assert seq.data.max() <= 0.75 + 1e-12


class TestAffineTexture:
    def test_same_seed_bit_identical(self):
        s = spec(SceneKind.AFFINE_TEXTURE, affine_rate=((0.01, 0.0, 1.0), (0.0, -0.01, 0.5)))
        a = gen_scene(s)
        b = gen_scene(s)
        assert np.array_equal(a.data, b.data)

    def test_different_seed_differs(self):
        s1 = spec(SceneKind.AFFINE_TEXTURE)
        s2 = spec(SceneKind.AFFINE_TEXTURE, seed=43)
        assert not np.array_equal(gen_scene(s1).data, gen_scene(s2).data)

    def test_warp_moves_texture(self):
        s = spec(SceneKind.AFFINE_TEXTURE, affine_rate=((0.0, 0.0, 50.0), (0.0, 0.0, 0.0)))
        seq = gen_scene(s)
        assert not np.array_equal(seq.data[0], seq.data[1])


@pytest.mark.parametrize(
    "kind", [SceneKind.STATIC, SceneKind.TRANSLATING_SINE, SceneKind.TRANSLATING_CHECKER, SceneKind.AFFINE_TEXTURE]
)
def test_radiance_range(kind):
    seq = gen_scene(spec(kind, velocity=(17.0, -5.0), count=6, channels=3))
    assert seq.data.min() >= 0.0
    assert seq.data.max() <= 1.0


class TestValidation:
    def test_zero_dims(self):
        with pytest.raises(DimensionError):
            spec(SceneKind.STATIC, height=0)
        with pytest.raises(DimensionError):
            spec(SceneKind.STATIC, width=0)

    def test_nonfinite_velocity(self):
        with pytest.raises(ParameterError):
            spec(SceneKind.TRANSLATING_SINE, velocity=(float("nan"), 0.0))

    def test_bad_count_and_dt(self):
        with pytest.raises(ParameterError):
            spec(SceneKind.STATIC, count=0)
        with pytest.raises(ParameterError):
            spec(SceneKind.STATIC, subframe_dt_s=0.0)

    def test_float32_output(self):
        seq = gen_scene(spec(SceneKind.STATIC, dtype="float32"))
        assert seq.data.dtype == np.float32
