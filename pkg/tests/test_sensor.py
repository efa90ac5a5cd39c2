import numpy as np
import pytest

from shuttersim import (
    DimensionError,
    EncodingError,
    ExposureSchedule,
    PairingError,
    ParameterError,
    ScanDirection,
    SceneKind,
    SceneSpec,
    Sequence,
    ShutterMode,
    TemporalRangeError,
    gen_scene,
    integrate_exposure,
    row_timing,
    synth_pair,
    synth_sequence,
)
from shuttersim import _kernels

MS = 1e-3


def static_source(value=0.4, rows=16, width=8, n_sub=64, dt=0.1 * MS, channels=1):
    data = np.full((n_sub, rows, width, channels), value, dtype=np.float64)
    return Sequence(data, frame_period_s=dt)


def rsgr(rows, xi=1.0, e0=1 * MS, direction=ScanDirection.FIRST_ROW_TOP):
    return ExposureSchedule(ShutterMode.RSGR, rows, e0, xi, direction)


def gs(rows, e0=1 * MS):
    return ExposureSchedule(ShutterMode.GS, rows, e0)


def brute_force_integration(source, schedule, trigger_s, refine=10):
    """Independent oracle: Riemann sum over a refined time grid.

    Fine step k covers [k*dtf, (k+1)*dtf) and carries the enclosing subframe's
    value; each step contributes its overlap with the row window.
    """
    dt = source.frame_period_s
    dtf = dt / refine
    starts, durs = row_timing(schedule)
    out = np.zeros(source.data.shape[1:], dtype=np.float64)
    n_fine = len(source) * refine
    for r in range(source.height):
        t0 = trigger_s + starts[r]
        t1 = t0 + durs[r]
        acc = np.zeros(source.data.shape[2:], dtype=np.float64)
        k0 = max(int(np.floor(t0 / dtf)) - 1, 0)
        k1 = min(int(np.ceil(t1 / dtf)) + 1, n_fine)
        for k in range(k0, k1):
            lo = max(k * dtf, t0)
            hi = min((k + 1) * dtf, t1)
            if hi > lo:
                acc += (hi - lo) * source.data[k // refine, r]
        out[r] = acc / schedule.base_exposure_s
    return np.clip(out, 0.0, 1.0)


class TestIntegrateExposure:
    def test_static_rsgr_brightness_ramp(self):
        src = static_source(0.4, rows=16)
        frame = integrate_exposure(src, rsgr(16, xi=1.0), trigger_s=0.0)
        assert frame.data[0].mean() == pytest.approx(0.4, abs=1e-12)
        assert frame.data[-1].mean() == pytest.approx(0.8, abs=1e-12)

    def test_xi_zero_bit_identical_to_gs(self):
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_CHECKER,
                height=24,
                width=24,
                subframe_dt_s=0.1 * MS,
                count=48,
                velocity=(900.0, 0.0),
                seed=3,
            )
        )
        a = integrate_exposure(src, rsgr(24, xi=0.0), 0.5 * MS)
        b = integrate_exposure(src, gs(24), 0.5 * MS)
        assert np.array_equal(a.data, b.data)

    def test_matches_brute_force_oracle_on_moving_edges(self):
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_CHECKER,
                height=20,
                width=16,
                subframe_dt_s=0.05 * MS,
                count=80,
                velocity=(4000.0, 1000.0),
                seed=11,
                cell_px=5.0,
            )
        )
        for schedule in (rsgr(20, xi=1.0), rsgr(20, xi=1.0, direction=ScanDirection.FIRST_ROW_BOTTOM)):
            got = integrate_exposure(src, schedule, trigger_s=0.37 * MS)
            expected = brute_force_integration(src, schedule, 0.37 * MS)
            assert np.max(np.abs(got.data - expected)) < 1e-6

    def test_gs_equals_plain_temporal_mean(self):
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_SINE,
                height=12,
                width=12,
                subframe_dt_s=0.1 * MS,
                count=30,
                velocity=(500.0, 0.0),
                seed=5,
            )
        )
        # E0 spans exactly 10 subframes starting at trigger 0
        frame = integrate_exposure(src, gs(12, e0=1 * MS), 0.0)
        assert np.allclose(frame.data, src.data[:10].mean(axis=0), atol=1e-12)

    def test_linearity_without_clamping(self):
        rng = np.random.default_rng(0)
        base = rng.uniform(0.05, 0.3, size=(40, 8, 6, 1))
        s1 = Sequence(base, frame_period_s=0.1 * MS)
        s2 = Sequence(base[::-1].copy(), frame_period_s=0.1 * MS)
        mix = Sequence(0.5 * base + 0.25 * base[::-1], frame_period_s=0.1 * MS)
        sched = rsgr(8, xi=1.0)
        out = integrate_exposure(mix, sched, 0.0).data
        o1 = integrate_exposure(s1, sched, 0.0).data
        o2 = integrate_exposure(s2, sched, 0.0).data
        assert np.allclose(out, 0.5 * o1 + 0.25 * o2, atol=1e-12)

    def test_trigger_shift_equivariance(self):
        # 3 px/subframe horizontal roll: advancing the trigger one subframe
        # rolls the output by the same amount
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_CHECKER,
                height=16,
                width=24,
                subframe_dt_s=0.1 * MS,
                count=60,
                velocity=(30000.0, 0.0),
                seed=9,
                cell_px=6.0,
            )
        )
        sched = rsgr(16, xi=0.5)
        a = integrate_exposure(src, sched, 0.0)
        b = integrate_exposure(src, sched, 0.1 * MS)
        assert np.allclose(b.data, np.roll(a.data, 3, axis=1), atol=1e-9)

    def test_saturation_clamps_at_one(self):
        src = static_source(0.9, rows=8)
        frame = integrate_exposure(src, rsgr(8, xi=1.0), 0.0)
        assert frame.data.max() == 1.0
        assert frame.data[-1].mean() == 1.0

    def test_encoding_mismatch(self):
        src = static_source()
        gamma_src = Sequence(src.data, frame_period_s=src.frame_period_s, gamma=2.2)
        with pytest.raises(EncodingError):
            integrate_exposure(gamma_src, rsgr(16), 0.0)

    def test_rows_must_match_height(self):
        with pytest.raises(DimensionError):
            integrate_exposure(static_source(rows=16), rsgr(8), 0.0)

    def test_coverage_shortfall(self):
        src = static_source(n_sub=8, dt=0.1 * MS)  # spans 0.8 ms < 2 ms window
        with pytest.raises(TemporalRangeError):
            integrate_exposure(src, rsgr(16, xi=1.0), 0.0)
        with pytest.raises(TemporalRangeError):
            integrate_exposure(src, gs(16, e0=0.5 * MS), -0.2 * MS)


class TestSynthSequence:
    def test_count_one_reduces_to_single_integration(self):
        src = static_source()
        seq = synth_sequence(src, rsgr(16), frame_period_s=1 * MS, count=1)
        single = integrate_exposure(src, rsgr(16), 0.0)
        assert np.array_equal(seq.data[0], single.data)

    def test_first_rank_row_mode_independent(self):
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_CHECKER,
                height=16,
                width=16,
                subframe_dt_s=0.1 * MS,
                count=50,
                velocity=(1500.0, 0.0),
                seed=2,
            )
        )
        a = synth_sequence(src, rsgr(16, xi=1.0), 1 * MS, 3)
        b = synth_sequence(src, gs(16), 1 * MS, 3)
        assert np.allclose(a.data[:, 0], b.data[:, 0], atol=1e-9)

    def test_static_brightness_ratio_law(self):
        src = static_source(0.2, rows=32, n_sub=80)
        for xi in (0.25, 0.5, 1.0, 2.0):
            seq = synth_sequence(src, rsgr(32, xi=xi), 1 * MS, 1)
            rows = seq.data[0, :, 0, 0]
            ranks = np.arange(32)
            expected = 1.0 + ranks * xi / 31
            assert np.max(np.abs(rows / rows[0] - expected)) < 1e-9

    def test_gamma_output(self):
        src = static_source(0.25)
        seq = synth_sequence(src, gs(16), 1 * MS, 2, gamma_out=2.0)
        assert seq.gamma == 2.0
        assert np.allclose(seq.data, 0.5, atol=1e-12)  # 0.25 ** (1/2)

    def test_bad_params(self):
        src = static_source()
        with pytest.raises(ParameterError):
            synth_sequence(src, gs(16), 1 * MS, 0)
        with pytest.raises(ParameterError):
            synth_sequence(src, gs(16), 0.0, 1)

    def test_schedule_recorded_as_provenance(self):
        src = static_source()
        sched = rsgr(16, xi=0.5)
        assert synth_sequence(src, sched, 1 * MS, 1).schedule == sched


class TestSynthPair:
    def test_matching_exposures_accepted(self):
        src = static_source()
        d, g = synth_pair(src, rsgr(16, e0=1 * MS), gs(16, e0=1 * MS), 1 * MS, 2)
        assert len(d) == len(g) == 2

    def test_exposure_mismatch_rejected(self):
        src = static_source()
        with pytest.raises(PairingError):
            synth_pair(src, rsgr(16, e0=1 * MS), gs(16, e0=2 * MS), 1 * MS, 1)

    def test_gs_member_must_be_gs(self):
        src = static_source()
        with pytest.raises(PairingError):
            synth_pair(src, rsgr(16), rsgr(16), 1 * MS, 1)


class TestBackends:
    def test_numpy_fallback_matches_active_backend(self):
        src = gen_scene(
            SceneSpec(
                SceneKind.TRANSLATING_CHECKER,
                height=16,
                width=12,
                subframe_dt_s=0.1 * MS,
                count=40,
                velocity=(2000.0, 700.0),
                seed=21,
            )
        )
        starts, durs = row_timing(rsgr(16, xi=1.3))
        dt = src.frame_period_s
        a = (0.2 * MS + starts) / dt
        b = (0.2 * MS + starts + durs) / dt
        via_dispatch = _kernels.integrate_window_sums(src.data, a, b)
        out = np.zeros(src.data.shape[1:], dtype=np.float64)
        _kernels._integrate_numpy(src.data, a, b, out)
        assert np.allclose(via_dispatch, out, atol=1e-12)

    def test_uniform_window_fast_path(self):
        src = static_source(0.3, rows=8, n_sub=32)
        starts, durs = row_timing(gs(8))
        a = starts / src.frame_period_s
        b = (starts + durs) / src.frame_period_s
        out = np.zeros(src.data.shape[1:], dtype=np.float64)
        _kernels._integrate_numpy(src.data, a, b, out)
        assert np.allclose(out * src.frame_period_s / (1 * MS), 0.3, atol=1e-12)
