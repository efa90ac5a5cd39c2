"""Exposure synthesis: per-row temporal integration of high-FPS sources.

This is the software stand-in for a paired-capture rig. Each output row
integrates the linear source over its exposure window (piecewise-constant in
time: a subframe holds for one period, partial overlaps weighted by their
fraction), then normalizes by the *base* exposure. Normalizing by the base
rather than by each row's own duration is what makes late RSGR scanlines
brighter and lets them saturate, which is the distortion under study; the
clamp at 1.0 models a full well.
"""

from __future__ import annotations

import math

import numpy as np

from . import _kernels
from .errors import (
    DimensionError,
    EncodingError,
    PairingError,
    ParameterError,
    TemporalRangeError,
)
from .exposure import ExposureSchedule, ShutterMode, row_timing
from .frames import Frame, Sequence


def _window_bounds(
    source: Sequence, schedule: ExposureSchedule, trigger_s: float
) -> tuple[np.ndarray, np.ndarray]:
    """Row windows in subframe units, checked against source coverage."""
    dt = source.frame_period_s
    n_sub = len(source)
    starts, durs = row_timing(schedule)
    a = (trigger_s + starts) / dt
    b = (trigger_s + starts + durs) / dt
    eps = 1e-9 * max(1.0, float(b.max()))
    if a.min() < -eps or b.max() > n_sub + eps:
        raise TemporalRangeError(
            f"window [{trigger_s + float(starts.min()):g}, "
            f"{trigger_s + float((starts + durs).max()):g}] s exceeds source span "
            f"[0, {n_sub * dt:g}] s"
        )
    return np.clip(a, 0.0, n_sub), np.clip(b, 0.0, n_sub)


def integrate_exposure(
    source: Sequence, schedule: ExposureSchedule, trigger_s: float
) -> Frame:
    """Expose one frame: row ``r`` integrates over its window from the trigger.

    The result is ``clamp(integral / E0, 0, 1)`` in float64, linear encoding.
    Requires a linear source whose height equals ``schedule.rows`` and whose
    time span covers every window.
    """
    if source.gamma is not None:
        raise EncodingError("integration requires a linear-encoded source")
    if schedule.rows != source.height:
        raise DimensionError(
            f"schedule rows ({schedule.rows}) must equal source height ({source.height})"
        )
    a, b = _window_bounds(source, schedule, trigger_s)
    sums = _kernels.integrate_window_sums(source.data, a, b)
    scale = source.frame_period_s / schedule.base_exposure_s
    return Frame(np.clip(sums * scale, 0.0, 1.0), gamma=None)


def synth_sequence(
    source: Sequence,
    schedule: ExposureSchedule,
    frame_period_s: float,
    count: int,
    gamma_out: float | None = None,
    trigger0_s: float = 0.0,
) -> Sequence:
    """Synthesize ``count`` frames at triggers ``trigger0 + i * frame_period``.

    Optional ``gamma_out`` applies ``p ** (1/gamma)`` after clamping. The
    schedule is recorded on the result as provenance.
    """
    if count < 1:
        raise ParameterError(f"count must be >= 1, got {count}")
    if not math.isfinite(frame_period_s) or frame_period_s <= 0:
        raise ParameterError(f"frame_period_s must be > 0, got {frame_period_s}")
    frames = np.empty((count, source.height, source.width, source.channels), dtype=np.float64)
    for i in range(count):
        frames[i] = integrate_exposure(source, schedule, trigger0_s + i * frame_period_s).data
    if gamma_out is not None:
        if not math.isfinite(gamma_out) or gamma_out <= 0:
            raise EncodingError(f"gamma must be finite and > 0, got {gamma_out}")
        frames **= 1.0 / gamma_out
    return Sequence(
        frames, frame_period_s=frame_period_s, gamma=gamma_out, schedule=schedule
    )


def synth_pair(
    source: Sequence,
    schedule_rsgr: ExposureSchedule,
    schedule_gs: ExposureSchedule,
    frame_period_s: float,
    count: int,
    gamma_out: float | None = None,
    trigger0_s: float = 0.0,
) -> tuple[Sequence, Sequence]:
    """Synthesize a distorted/GS pair with shared triggers.

    The pairing contract mirrors the capture convention: the GS exposure
    equals the first scanline's exposure of the distorted member.
    """
    if schedule_gs.mode is not ShutterMode.GS:
        raise PairingError(f"GS member must use GS mode, got {schedule_gs.mode.value}")
    if schedule_rsgr.mode is ShutterMode.GS:
        raise PairingError("distorted member must use RS or RSGR mode")
    if schedule_rsgr.base_exposure_s != schedule_gs.base_exposure_s:
        raise PairingError(
            f"first-scanline exposures differ: {schedule_rsgr.base_exposure_s} s "
            f"vs {schedule_gs.base_exposure_s} s"
        )
    if schedule_rsgr.rows != schedule_gs.rows:
        raise PairingError(
            f"row counts differ: {schedule_rsgr.rows} vs {schedule_gs.rows}"
        )
    seq_d = synth_sequence(source, schedule_rsgr, frame_period_s, count, gamma_out, trigger0_s)
    seq_g = synth_sequence(source, schedule_gs, frame_period_s, count, gamma_out, trigger0_s)
    return seq_d, seq_g
