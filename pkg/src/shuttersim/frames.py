"""Frame and Sequence value types.

A frame is an ``(H, W, C)`` float array with intensities in [0, 1] and an
encoding tag: ``gamma=None`` means linear radiance, ``gamma=g`` means the
stored values are ``linear ** (1/g)``. A sequence stacks frames that share
dimensions and encoding into one ``(T, H, W, C)`` array with a uniform
trigger spacing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, EncodingError, ParameterError
from .exposure import ExposureSchedule

_FLOAT_DTYPES = (np.float32, np.float64)


def _check_image_block(data: np.ndarray, what: str) -> None:
    if data.dtype.type not in _FLOAT_DTYPES:
        raise ParameterError(f"{what} must be float32 or float64, got {data.dtype}")
    h, w, c = data.shape[-3:]
    if h < 1 or w < 1:
        raise DimensionError(f"{what} has empty spatial dims {h}x{w}")
    if c not in (1, 3):
        raise DimensionError(f"{what} must have 1 or 3 channels, got {c}")
    if not np.isfinite(data).all():
        raise ParameterError(f"{what} contains non-finite values")
    lo, hi = float(data.min()), float(data.max())
    if lo < 0.0 or hi > 1.0:
        raise ParameterError(f"{what} values outside [0, 1]: min {lo}, max {hi}")


def _check_gamma(gamma: float | None) -> None:
    if gamma is not None and (not math.isfinite(gamma) or gamma <= 0):
        raise EncodingError(f"gamma must be finite and > 0, got {gamma}")


@dataclass
class Frame:
    """One image: ``data`` is ``(H, W, C)`` in [0, 1]; ``gamma=None`` is linear."""

    data: np.ndarray
    gamma: float | None = None

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 3:
            raise DimensionError(f"frame data must be (H, W, C), got shape {self.data.shape}")
        _check_image_block(self.data, "frame")
        _check_gamma(self.gamma)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


@dataclass
class Sequence:
    """Frames at uniform trigger spacing, stored as one ``(T, H, W, C)`` array.

    ``schedule`` is optional provenance: the exposure timing that produced the
    sequence, if it came out of the simulator.
    """

    data: np.ndarray
    frame_period_s: float
    gamma: float | None = None
    schedule: ExposureSchedule | None = field(default=None)

    def __post_init__(self):
        self.data = np.asarray(self.data)
        if self.data.ndim != 4:
            raise DimensionError(
                f"sequence data must be (T, H, W, C), got shape {self.data.shape}"
            )
        if self.data.shape[0] < 1:
            raise DimensionError("sequence must contain at least one frame")
        _check_image_block(self.data, "sequence")
        _check_gamma(self.gamma)
        if not math.isfinite(self.frame_period_s) or self.frame_period_s <= 0:
            raise ParameterError(f"frame_period_s must be > 0, got {self.frame_period_s}")

    def __len__(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    @property
    def channels(self) -> int:
        return self.data.shape[3]

    def frame(self, i: int) -> Frame:
        return Frame(self.data[i], gamma=self.gamma)


def from_frames(
    frames: list[Frame],
    frame_period_s: float,
    schedule: ExposureSchedule | None = None,
) -> Sequence:
    """Stack frames (same dims and encoding) into a Sequence."""
    if not frames:
        raise DimensionError("cannot build a sequence from zero frames")
    gamma = frames[0].gamma
    for f in frames[1:]:
        if f.data.shape != frames[0].data.shape:
            raise DimensionError("all frames in a sequence must share dimensions")
        if f.gamma != gamma:
            raise EncodingError("all frames in a sequence must share the encoding tag")
    data = np.stack([f.data for f in frames], axis=0)
    return Sequence(data, frame_period_s=frame_period_s, gamma=gamma, schedule=schedule)
