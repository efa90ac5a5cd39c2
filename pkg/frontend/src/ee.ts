/**
 * Exposure-encoding channel, reconstructed from a manifest schedule.
 *
 * Row duration: E0 for gs/rs rows; E0 * (1 + rank * xi / (N - 1)) under rsgr,
 * where rank is the readout order of the row. The channel is the min-max
 * normalized duration of the schedule row each image row maps to
 * (floor(r * N / height)), constant along rows, zero when durations are flat.
 */

import type { Schedule } from "./rawio.js";

export function rowDurations(schedule: Schedule): Float64Array {
  const n = schedule.rows;
  const e0 = schedule.base_exposure_s;
  const durs = new Float64Array(n);
  for (let row = 0; row < n; row++) {
    const rank = schedule.scan_direction === "top" ? row : n - 1 - row;
    durs[row] =
      schedule.mode === "rsgr" && n > 1
        ? e0 * (1 + (rank * schedule.readout_ratio) / (n - 1))
        : e0;
  }
  return durs;
}

/** Per-image-row EE values in [0, 1] for a frame of `height` rows. */
export function eeColumn(schedule: Schedule, height: number): Float64Array {
  const durs = rowDurations(schedule);
  let lo = Infinity;
  let hi = -Infinity;
  for (const d of durs) {
    lo = Math.min(lo, d);
    hi = Math.max(hi, d);
  }
  const col = new Float64Array(height);
  if (hi === lo) return col;
  for (let r = 0; r < height; r++) {
    const idx = Math.min(Math.floor((r * schedule.rows) / height), schedule.rows - 1);
    col[r] = (durs[idx] - lo) / (hi - lo);
  }
  return col;
}
