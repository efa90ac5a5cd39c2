"""Procedural high-frame-rate source scenes.

These stand in for real captured footage: deterministic, linear-radiance,
periodic in space (moving content wraps around instead of leaving darkness at
the border), and cheap enough to generate thousands of subframes.

Randomness is counter-based so fixtures reproduce bit-exactly across runs,
machines, and reimplementations. The generator is **splitmix64**: the i-th
draw for a 64-bit seed ``s`` is

    z = (s + (i + 1) * 0x9E3779B97F4A7C15) mod 2**64
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9   (mod 2**64)
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB   (mod 2**64)
    z = z ^ (z >> 31)

with uniform doubles taken as ``(z >> 11) * 2.0**-53``. No generator state is
carried between draws, so any lattice point can be evaluated independently.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .frames import Sequence

_MASK64 = (1 << 64) - 1
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)

# checker contrast leaves headroom for the exposure ramp before saturation
_CHECKER_LO = 0.25
_CHECKER_HI = 0.75


def splitmix64(counter: np.ndarray, seed: int) -> np.ndarray:
    """i-th output of the splitmix64 stream for ``seed`` (see module docstring)."""
    c = np.asarray(counter, dtype=np.uint64)
    z = np.uint64(seed & _MASK64) + (c + np.uint64(1)) * _GOLDEN
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def unit_floats(counter: np.ndarray, seed: int) -> np.ndarray:
    """Uniform doubles in [0, 1) indexed by counter, bit-exact by construction."""
    return (splitmix64(counter, seed) >> np.uint64(11)).astype(np.float64) * 2.0**-53


class SceneKind(enum.Enum):
    STATIC = "static"
    TRANSLATING_SINE = "sine"
    TRANSLATING_CHECKER = "checker"
    AFFINE_TEXTURE = "affine"


@dataclass(frozen=True)
class SceneSpec:
    """Parameters of one procedural scene.

    ``velocity`` is in pixels/second (applies to the translating kinds);
    ``affine_rate`` is the per-second delta added to the identity 2x3 warp
    (AffineTexture only). ``value`` is the constant level of Static scenes,
    ``period_px`` the sine periods, ``cell_px`` the checker cell edge and the
    noise lattice spacing of AffineTexture.
    """

    kind: SceneKind
    height: int
    width: int
    subframe_dt_s: float
    count: int
    velocity: tuple[float, float] = (0.0, 0.0)
    affine_rate: tuple[tuple[float, float, float], tuple[float, float, float]] = (
        (0.0, 0.0, 0.0),
        (0.0, 0.0, 0.0),
    )
    seed: int = 0
    channels: int = 1
    value: float = 0.5
    period_px: tuple[float, float] = (64.0, 64.0)
    cell_px: float = 8.0
    amplitude: float = 0.9
    dtype: str = "float64"

    def __post_init__(self):
        if self.height < 1 or self.width < 1:
            raise DimensionError(f"scene dims must be positive, got {self.height}x{self.width}")
        if not math.isfinite(self.subframe_dt_s) or self.subframe_dt_s <= 0:
            raise ParameterError(f"subframe_dt_s must be > 0, got {self.subframe_dt_s}")
        if self.count < 1:
            raise ParameterError(f"count must be >= 1, got {self.count}")
        if not all(math.isfinite(v) for v in self.velocity):
            raise ParameterError(f"velocity must be finite, got {self.velocity}")
        if self.channels not in (1, 3):
            raise DimensionError(f"channels must be 1 or 3, got {self.channels}")
        if not 0.0 <= self.value <= 1.0:
            raise ParameterError(f"static value must lie in [0, 1], got {self.value}")
        if not 0.0 <= self.amplitude <= 1.0:
            raise ParameterError(f"amplitude must lie in [0, 1], got {self.amplitude}")
        if min(self.period_px) <= 0 or self.cell_px <= 0:
            raise ParameterError("period_px and cell_px must be positive")
        if self.dtype not in ("float32", "float64"):
            raise ParameterError(f"dtype must be float32 or float64, got {self.dtype}")


def _checker_parity(idx: np.ndarray, cell: float) -> np.ndarray:
    """0/1 parity of the checker cell containing integer pixel index ``idx``."""
    return (np.floor(idx / cell).astype(np.int64) % 2).astype(np.float64)


def _lerp_shifted_parity(n: int, shift: float, cell: float, wrap: int) -> np.ndarray:
    """1-D bilinear interpolation of cell parity sampled at ``i - shift`` (periodic)."""
    u = np.mod(np.arange(n, dtype=np.float64) - shift, wrap)
    i0 = np.floor(u)
    f = u - i0
    p0 = _checker_parity(np.mod(i0, wrap), cell)
    p1 = _checker_parity(np.mod(i0 + 1.0, wrap), cell)
    return (1.0 - f) * p0 + f * p1


def _sine_axis(n: int, shift: float, period: float, fn) -> np.ndarray:
    u = np.mod(np.arange(n, dtype=np.float64) - shift, period)
    return fn(2.0 * np.pi * u / period)


def _value_noise(
    u: np.ndarray, v: np.ndarray, spec: SceneSpec, channel: int
) -> np.ndarray:
    """Smooth periodic noise: bilinear interpolation of hashed lattice values.

    The lattice tiles the image exactly (period ``width`` x ``height`` px), so
    warped sampling wraps seamlessly.
    """
    gw = max(1, round(spec.width / spec.cell_px))
    gh = max(1, round(spec.height / spec.cell_px))
    cx = spec.width / gw
    cy = spec.height / gh

    gx = np.mod(u, spec.width) / cx
    gy = np.mod(v, spec.height) / cy
    x0 = np.floor(gx)
    y0 = np.floor(gy)
    fx = gx - x0
    fy = gy - y0

    def node(ix, iy):
        idx = (np.int64(channel) * gh + np.mod(iy, gh).astype(np.int64)) * gw
        idx = idx + np.mod(ix, gw).astype(np.int64)
        return unit_floats(idx, spec.seed)

    v00 = node(x0, y0)
    v10 = node(x0 + 1, y0)
    v01 = node(x0, y0 + 1)
    v11 = node(x0 + 1, y0 + 1)
    top = (1.0 - fx) * v00 + fx * v10
    bot = (1.0 - fx) * v01 + fx * v11
    return (1.0 - fy) * top + fy * bot


def gen_scene(spec: SceneSpec) -> Sequence:
    """Render all subframes of ``spec`` as a linear-radiance Sequence.

    Frame ``i`` is the pattern at continuous time ``i * subframe_dt_s``.
    Per-frame shifts are accumulated as ``i * (velocity * dt)`` so that integer
    per-subframe motion produces exact circular shifts.
    """
    h, w, c = spec.height, spec.width, spec.channels
    dtype = np.float32 if spec.dtype == "float32" else np.float64
    out = np.empty((spec.count, h, w, c), dtype=dtype)

    sx_per = spec.velocity[0] * spec.subframe_dt_s
    sy_per = spec.velocity[1] * spec.subframe_dt_s

    for i in range(spec.count):
        sx = i * sx_per
        sy = i * sy_per
        for ch in range(c):
            if spec.kind is SceneKind.STATIC:
                out[i, :, :, ch] = spec.value
                continue
            if spec.kind is SceneKind.TRANSLATING_SINE:
                px, py = spec.period_px
                # per-channel quarter-period phase offset decorrelates channels
                row = _sine_axis(w, sx - ch * px / 4.0, px, np.sin)
                col = _sine_axis(h, sy, py, np.cos)
                out[i, :, :, ch] = 0.5 + 0.5 * spec.amplitude * np.outer(col, row)
            elif spec.kind is SceneKind.TRANSLATING_CHECKER:
                row_p = _lerp_shifted_parity(w, sx - ch * spec.cell_px / 2.0, spec.cell_px, w)
                col_p = _lerp_shifted_parity(h, sy, spec.cell_px, h)
                # parity XOR is separable: a + b - 2ab for a, b in [0, 1]
                xor = col_p[:, None] + row_p[None, :] - 2.0 * np.outer(col_p, row_p)
                out[i, :, :, ch] = _CHECKER_LO + (_CHECKER_HI - _CHECKER_LO) * xor
            else:  # AFFINE_TEXTURE
                t = i * spec.subframe_dt_s
                a = np.asarray(spec.affine_rate, dtype=np.float64)
                xs = np.arange(w, dtype=np.float64)[None, :]
                ys = np.arange(h, dtype=np.float64)[:, None]
                u = (1.0 + t * a[0, 0]) * xs + t * a[0, 1] * ys + t * a[0, 2]
                v = t * a[1, 0] * xs + (1.0 + t * a[1, 1]) * ys + t * a[1, 2]
                u, v = np.broadcast_arrays(u, v)
                out[i, :, :, ch] = _value_noise(u, v, spec, ch)

    return Sequence(out, frame_period_s=spec.subframe_dt_s, gamma=None)
