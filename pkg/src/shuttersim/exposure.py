"""Shutter timing models: per-row exposure windows and the exposure-encoding channel.

Three electronic shutter modes are covered:

* ``GS``   -- every row starts and ends exposure together.
* ``RS``   -- rows start with a constant per-row delay and expose equally long.
* ``RSGR`` -- all rows start together but end readout row by row, so the
  exposure duration grows linearly with scan rank.

A schedule is a pure value; every function here is deterministic and
thread-safe.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError


class ShutterMode(enum.Enum):
    GS = "gs"
    RS = "rs"
    RSGR = "rsgr"


class ScanDirection(enum.Enum):
    """Which image row is read out first (scan rank 0)."""

    FIRST_ROW_TOP = "top"
    FIRST_ROW_BOTTOM = "bottom"


@dataclass(frozen=True)
class RowWindow:
    """Exposure window of one row, as offsets from the frame trigger."""

    start_s: float
    duration_s: float


@dataclass(frozen=True)
class ExposureSchedule:
    """Timing of one shutter configuration.

    ``base_exposure_s`` is the exposure of the first scanline; ``readout_ratio``
    is the total readout span divided by that base exposure, so the last
    scanline of an RSGR schedule exposes for ``(1 + readout_ratio) * base``.
    """

    mode: ShutterMode
    rows: int
    base_exposure_s: float
    readout_ratio: float = 0.0
    scan_direction: ScanDirection = ScanDirection.FIRST_ROW_TOP

    def __post_init__(self):
        if self.rows < 1:
            raise ParameterError(f"rows must be >= 1, got {self.rows}")
        if not math.isfinite(self.base_exposure_s) or self.base_exposure_s <= 0:
            raise ParameterError(
                f"base_exposure_s must be finite and > 0, got {self.base_exposure_s}"
            )
        if not math.isfinite(self.readout_ratio) or self.readout_ratio < 0:
            raise ParameterError(
                f"readout_ratio must be finite and >= 0, got {self.readout_ratio}"
            )

    def scan_rank(self, row: int) -> int:
        """Readout position of an image row (rank 0 is read out first)."""
        if self.scan_direction is ScanDirection.FIRST_ROW_TOP:
            return row
        return self.rows - 1 - row

    def max_window_end_s(self) -> float:
        """Latest end offset of any row window, relative to the trigger."""
        starts, durs = row_timing(self)
        return float(np.max(starts + durs))


def row_window(schedule: ExposureSchedule, row: int) -> RowWindow:
    """Exposure window of ``row`` under ``schedule``.

    GS rows all share ``(0, E0)``. RS rows keep duration ``E0`` but start at
    ``k * xi * E0 / (N - 1)`` for scan rank ``k``. RSGR rows all start at 0
    and stretch to ``E0 * (1 + k * xi / (N - 1))``.
    """
    if not 0 <= row < schedule.rows:
        raise IndexError(f"row {row} out of range for {schedule.rows} rows")
    e0 = schedule.base_exposure_s
    if schedule.mode is ShutterMode.GS:
        return RowWindow(0.0, e0)
    k = schedule.scan_rank(row)
    step = schedule.readout_ratio * e0 / (schedule.rows - 1) if schedule.rows > 1 else 0.0
    if schedule.mode is ShutterMode.RS:
        return RowWindow(k * step, e0)
    return RowWindow(0.0, e0 + k * step)


def row_timing(schedule: ExposureSchedule) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized ``(starts, durations)`` for all rows, float64 seconds."""
    n = schedule.rows
    e0 = schedule.base_exposure_s
    ranks = np.arange(n, dtype=np.float64)
    if schedule.scan_direction is ScanDirection.FIRST_ROW_BOTTOM:
        ranks = ranks[::-1].copy()
    step = schedule.readout_ratio * e0 / (n - 1) if n > 1 else 0.0
    if schedule.mode is ShutterMode.GS:
        return np.zeros(n), np.full(n, e0)
    if schedule.mode is ShutterMode.RS:
        return ranks * step, np.full(n, e0)
    return np.zeros(n), e0 + ranks * step


def map_image_rows(schedule: ExposureSchedule, height: int) -> np.ndarray:
    """Schedule row index for each image row: ``floor(r * N / height)``.

    Exact when ``height == rows``; otherwise nearest-row mapping so a single
    schedule can serve resized frames.
    """
    if height < 1:
        raise DimensionError(f"height must be >= 1, got {height}")
    idx = (np.arange(height, dtype=np.int64) * schedule.rows) // height
    return np.minimum(idx, schedule.rows - 1)


def image_row_durations(schedule: ExposureSchedule, height: int) -> np.ndarray:
    """Per-image-row exposure duration in seconds, after row mapping."""
    _, durs = row_timing(schedule)
    return durs[map_image_rows(schedule, height)]


def ee_channel(schedule: ExposureSchedule, height: int, width: int) -> np.ndarray:
    """Exposure-encoding channel: min-max normalized row durations.

    Returns an ``(height, width, 1)`` float64 array, constant along each row,
    0 everywhere when all durations are equal (GS, RS, or RSGR with xi = 0).
    Normalization is over the schedule's own duration range, so the channel
    is invariant to the absolute exposure scale.
    """
    if height < 1 or width < 1:
        raise DimensionError(f"ee_channel needs positive dims, got {height}x{width}")
    _, durs = row_timing(schedule)
    lo, hi = float(durs.min()), float(durs.max())
    mapped = image_row_durations(schedule, height)
    if hi == lo:
        col = np.zeros(height, dtype=np.float64)
    else:
        col = (mapped - lo) / (hi - lo)
    return np.broadcast_to(col[:, None, None], (height, width, 1)).copy()
