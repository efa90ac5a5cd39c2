"""Restoration quality metrics and the band-based evaluation protocol.

PSNR uses peak 1.0 with a 100 dB cap for identical inputs. SSIM follows the
original reference formulation: 11x11 Gaussian window (sigma 1.5), K1=0.01,
K2=0.03, L=1, computed on luma for color frames, boundary handled by valid
cropping (no padding). Band evaluation scores the full frame plus fixed-height
Upper/Middle/Lower row bands; the neighboring-frame metric scores consecutive
ground-truth frames as a proxy for motion magnitude.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DimensionError, EncodingError, PairingError
from .frames import Frame, Sequence

PSNR_CAP_DB = 100.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03

# ITU-R 601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])

REGIONS = ("F", "U", "M", "L")


class Score(NamedTuple):
    psnr_db: float
    ssim: float


def _image(x) -> np.ndarray:
    arr = x.data if isinstance(x, Frame) else np.asarray(x)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3:
        raise DimensionError(f"expected (H, W, C) image, got shape {arr.shape}")
    return arr.astype(np.float64)


def psnr(pred, gt) -> float:
    """Peak signal-to-noise ratio in dB over all pixels and channels."""
    p, g = _image(pred), _image(gt)
    if p.shape != g.shape:
        raise DimensionError(f"shape mismatch: {p.shape} vs {g.shape}")
    mse = float(np.mean((p - g) ** 2))
    if mse == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * np.log10(1.0 / mse), PSNR_CAP_DB)


def _gaussian_kernel(size: int, sigma: float) -> np.ndarray:
    x = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """Separable 2-D correlation, valid region only."""
    from numpy.lib.stride_tricks import sliding_window_view

    t = sliding_window_view(img, kernel.size, axis=0) @ kernel
    return sliding_window_view(t, kernel.size, axis=1) @ kernel


def _to_luma(img: np.ndarray) -> np.ndarray:
    if img.shape[2] == 1:
        return img[:, :, 0]
    return img @ _LUMA


def ssim(pred, gt) -> float:
    """Mean structural similarity with the reference constants."""
    p, g = _image(pred), _image(gt)
    if p.shape != g.shape:
        raise DimensionError(f"shape mismatch: {p.shape} vs {g.shape}")
    if p.shape[0] < _SSIM_WINDOW or p.shape[1] < _SSIM_WINDOW:
        raise DimensionError(
            f"frame {p.shape[0]}x{p.shape[1]} smaller than the {_SSIM_WINDOW}x{_SSIM_WINDOW} window"
        )
    x = _to_luma(p)
    y = _to_luma(g)
    c1 = _SSIM_K1**2
    c2 = _SSIM_K2**2
    kernel = _gaussian_kernel(_SSIM_WINDOW, _SSIM_SIGMA)

    mu_x = _filter_valid(x, kernel)
    mu_y = _filter_valid(y, kernel)
    var_x = _filter_valid(x * x, kernel) - mu_x * mu_x
    var_y = _filter_valid(y * y, kernel) - mu_y * mu_y
    cov = _filter_valid(x * y, kernel) - mu_x * mu_y

    num = (2.0 * mu_x * mu_y + c1) * (2.0 * cov + c2)
    den = (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    return float(np.mean(num / den))


def score_frame(pred, gt) -> Score:
    return Score(psnr(pred, gt), ssim(pred, gt))


def default_band_height(height: int) -> int:
    """200 rows at 640-row frames, scaled proportionally otherwise."""
    return max(1, round(200 * height / 640))


def _band_slices(height: int, band: int) -> dict[str, slice]:
    return {
        "F": slice(0, height),
        "U": slice(0, band),
        "M": slice((height - band) // 2, (height - band) // 2 + band),
        "L": slice(height - band, height),
    }


@dataclass
class EvalReport:
    """Per-frame and aggregate PSNR/SSIM for the full frame and U/M/L bands."""

    band_height: int
    scan_direction: str | None
    per_frame: list[dict[str, Score]]
    aggregate: dict[str, Score]

    def to_dict(self) -> dict:
        return {
            "band_height": self.band_height,
            "scan_direction": self.scan_direction,
            "per_frame": [
                {r: {"psnr_db": s.psnr_db, "ssim": s.ssim} for r, s in fr.items()}
                for fr in self.per_frame
            ],
            "aggregate": {
                r: {"psnr_db": s.psnr_db, "ssim": s.ssim} for r, s in self.aggregate.items()
            },
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        lines = [
            f"band_height: {self.band_height}"
            + (f"   scan_direction: {self.scan_direction}" if self.scan_direction else ""),
            "frame   " + "   ".join(f"{r}: PSNR/SSIM      " for r in REGIONS),
        ]
        for i, fr in enumerate(self.per_frame):
            cells = "   ".join(f"{fr[r].psnr_db:9.4f}/{fr[r].ssim:.4f}" for r in REGIONS)
            lines.append(f"{i:5d}   {cells}")
        cells = "   ".join(
            f"{self.aggregate[r].psnr_db:9.4f}/{self.aggregate[r].ssim:.4f}" for r in REGIONS
        )
        lines.append(f" mean   {cells}")
        return "\n".join(lines) + "\n"


def region_eval(pred: Sequence, gt: Sequence, band_height: int | None = None) -> EvalReport:
    """Score a prediction against ground truth frame by frame and band by band."""
    if len(pred) != len(gt):
        raise PairingError(f"sequence lengths differ: {len(pred)} vs {len(gt)}")
    if pred.data.shape != gt.data.shape:
        raise DimensionError(
            f"sequence shapes differ: {pred.data.shape} vs {gt.data.shape}"
        )
    if pred.gamma != gt.gamma:
        raise EncodingError(
            f"encoding tags differ: gamma {pred.gamma} vs {gt.gamma}"
        )
    height = pred.height
    band = default_band_height(height) if band_height is None else band_height
    if band < 1 or band > height:
        raise DimensionError(f"band height {band} out of range for {height}-row frames")
    slices = _band_slices(height, band)

    per_frame: list[dict[str, Score]] = []
    for i in range(len(pred)):
        p = pred.data[i]
        g = gt.data[i]
        per_frame.append({r: score_frame(p[s], g[s]) for r, s in slices.items()})
    aggregate = {
        r: Score(
            float(np.mean([fr[r].psnr_db for fr in per_frame])),
            float(np.mean([fr[r].ssim for fr in per_frame])),
        )
        for r in REGIONS
    }
    schedule = pred.schedule or gt.schedule
    direction = schedule.scan_direction.value if schedule is not None else None
    return EvalReport(band, direction, per_frame, aggregate)


@dataclass
class NeighborMotionReport:
    """Consecutive-frame metrics; lower values mean larger motion."""

    pairs: list[Score]
    mean_psnr_db: float
    mean_ssim: float

    def to_dict(self) -> dict:
        return {
            "pairs": [{"psnr_db": s.psnr_db, "ssim": s.ssim} for s in self.pairs],
            "mean_psnr_db": self.mean_psnr_db,
            "mean_ssim": self.mean_ssim,
        }


def neighbor_motion(gt: Sequence) -> NeighborMotionReport:
    """Metric between each pair of consecutive frames, plus means."""
    if len(gt) < 2:
        raise DimensionError("neighbor metrics need at least two frames")
    pairs = [score_frame(gt.data[t], gt.data[t + 1]) for t in range(len(gt) - 1)]
    return NeighborMotionReport(
        pairs,
        float(np.mean([s.psnr_db for s in pairs])),
        float(np.mean([s.ssim for s in pairs])),
    )
