"""Temporal row-integration kernels.

The inner loop of the simulator sums overlap-weighted subframes per sensor
row. Two interchangeable backends exist:

* ``numba`` (default): an ``@njit`` kernel, parallel over rows. Each row
  accumulates sequentially in float64, so results are independent of the
  thread count.
* ``numpy``: vectorized einsum fallback, used when numba is unavailable or
  when ``SHUTTERSIM_BACKEND=numpy`` is set.

Both backends compute the same integral; they may differ in the last ulp
because summation order differs.

Window coordinates are in subframe units: row ``r`` integrates the source
over ``[a[r], b[r]]`` where subframe ``j`` occupies ``[j, j+1)``.
"""

from __future__ import annotations

import math
import os

import numpy as np

_env = os.environ.get("SHUTTERSIM_BACKEND", "numba").strip().lower()
if _env not in ("numba", "numpy"):
    raise RuntimeError(f"SHUTTERSIM_BACKEND must be 'numba' or 'numpy', got {_env!r}")

if _env == "numba":
    try:
        import numba
        from numba import njit, prange

        BACKEND = "numba"
    except ImportError:
        BACKEND = "numpy"
else:
    BACKEND = "numpy"


if BACKEND == "numba":

    @njit(cache=True, parallel=True)
    def _integrate_numba(src, a, b, out):
        n_sub = src.shape[0]
        height = src.shape[1]
        width = src.shape[2]
        chans = src.shape[3]
        for r in prange(height):
            ar = a[r]
            br = b[r]
            j0 = max(int(math.floor(ar)), 0)
            j1 = min(int(math.ceil(br)), n_sub)
            for j in range(j0, j1):
                lo = ar if ar > j else float(j)
                hi = br if br < j + 1 else float(j + 1)
                wgt = hi - lo
                if wgt <= 0.0:
                    continue
                for y in range(width):
                    for c in range(chans):
                        out[r, y, c] += wgt * src[j, r, y, c]

    def set_threads(n: int) -> None:
        numba.set_num_threads(max(1, min(n, numba.config.NUMBA_NUM_THREADS)))

else:

    def set_threads(n: int) -> None:
        # numpy backend is single-threaded by construction
        pass


def _window_weights(a: float, b: float, n_sub: int) -> tuple[int, int, np.ndarray]:
    j0 = max(int(math.floor(a)), 0)
    j1 = min(int(math.ceil(b)), n_sub)
    j = np.arange(j0, j1, dtype=np.float64)
    w = np.minimum(j + 1.0, b) - np.maximum(j, a)
    return j0, j1, np.maximum(w, 0.0)


def _integrate_numpy(src, a, b, out):
    n_sub = src.shape[0]
    if a.size and np.all(a == a[0]) and np.all(b == b[0]):
        # uniform windows (GS, or RSGR with xi = 0): one weighted sum for all rows
        j0, j1, w = _window_weights(float(a[0]), float(b[0]), n_sub)
        out += np.einsum("s,shwc->hwc", w, src[j0:j1], optimize=False)
        return
    for r in range(a.shape[0]):
        j0, j1, w = _window_weights(float(a[r]), float(b[r]), n_sub)
        out[r] += np.einsum("s,swc->wc", w, src[j0:j1, r], optimize=False)


def integrate_window_sums(src: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-row overlap-weighted subframe sums, float64, in subframe units.

    ``src`` is ``(T, H, W, C)``; ``a``/``b`` give each row's window. The caller
    scales by ``dt / E0`` to turn sums into normalized exposure values.
    """
    out = np.zeros(src.shape[1:], dtype=np.float64)
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    if BACKEND == "numba":
        _integrate_numba(src, a, b, out)
    else:
        _integrate_numpy(src, a, b, out)
    return out
