"""Handcrafted photometric baseline: invert the per-row exposure gain.

Removes the spatially varying brightness of RSGR frames but, by construction,
not the spatially varying blur. Saturated pixels clipped at the full well
cannot be recovered by a gain and are reported in a mask instead of inpainted.
"""

from __future__ import annotations

import numpy as np

from .errors import EncodingError
from .exposure import ExposureSchedule, image_row_durations
from .frames import Frame


def row_gains(schedule: ExposureSchedule, height: int) -> np.ndarray:
    """Per-image-row compensation gain ``E0 / duration`` (<= 1 everywhere)."""
    return schedule.base_exposure_s / image_row_durations(schedule, height)


def compensate(
    frame: Frame, schedule: ExposureSchedule, gamma: float | None = None
) -> tuple[Frame, np.ndarray]:
    """Scale each row by the inverse of its relative exposure.

    The correction is defined in linear radiance: gamma-encoded input is
    linearized with ``gamma`` (which must match the frame's tag), scaled,
    and re-encoded. Returns the corrected frame and a boolean ``(H, W)``
    saturation mask marking pixels at 1.0 before compensation.
    """
    if gamma != frame.gamma:
        raise EncodingError(
            f"gamma argument ({gamma}) does not match frame encoding ({frame.gamma})"
        )
    mask = np.any(frame.data >= 1.0, axis=-1)
    linear = frame.data.astype(np.float64)
    if gamma is not None:
        linear **= gamma
    gains = row_gains(schedule, frame.height)
    out = np.clip(linear * gains[:, None, None], 0.0, 1.0)
    if gamma is not None:
        out **= 1.0 / gamma
    return Frame(out, gamma=frame.gamma), mask
