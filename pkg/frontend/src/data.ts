/**
 * Dataset loading: turns manifest-paired rsgr/gs sequences into training
 * segments with the exposure-encoding channel appended to each input frame.
 */

import * as path from "node:path";

import { eeColumn } from "./ee.js";
import type { Manifest, ManifestEntry, RawFrame } from "./rawio.js";
import { readManifest, readSequence } from "./rawio.js";
import { Tensor } from "./tensor.js";

export interface SegmentBatch {
  /** [C+1, H, W] inputs: image channels plus the EE channel */
  inputs: Tensor[];
  /** [C, H, W] clean targets */
  targets: Tensor[];
}

export interface PairedSequences {
  entry: ManifestEntry;
  inputFrames: RawFrame[];
  targetFrames: RawFrame[];
  ee: Float64Array;
}

/** HWC RawFrame -> CHW Tensor, optionally appending the EE column. */
export function frameToTensor(frame: RawFrame, ee: Float64Array | null): Tensor {
  const { height: h, width: w, channels: c } = frame;
  const cout = ee === null ? c : c + 1;
  const t = Tensor.zeros([cout, h, w]);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      const src = (y * w + x) * c;
      for (let ch = 0; ch < c; ch++) {
        t.data[(ch * h + y) * w + x] = frame.data[src + ch];
      }
      if (ee !== null) t.data[(c * h + y) * w + x] = ee[y];
    }
  }
  return t;
}

export function tensorToFrame(t: Tensor, gamma: number | null): RawFrame {
  const [c, h, w] = t.shape;
  const data = new Float64Array(h * w * c);
  for (let y = 0; y < h; y++) {
    for (let x = 0; x < w; x++) {
      for (let ch = 0; ch < c; ch++) {
        data[(y * w + x) * c + ch] = t.data[(ch * h + y) * w + x];
      }
    }
  }
  return { height: h, width: w, channels: c, gamma, data };
}

export function loadPaired(manifestPath: string, inputId?: string): PairedSequences {
  const manifest: Manifest = readManifest(manifestPath);
  const root = path.dirname(manifestPath);
  const distorted = manifest.sequences.filter((e) => e.role === "rsgr" || e.role === "rs");
  const entry = inputId === undefined ? distorted[0] : distorted.find((e) => e.id === inputId);
  if (entry === undefined) throw new Error("no distorted (rsgr/rs) entry in manifest");
  if (entry.schedule === null) throw new Error(`entry '${entry.id}' has no schedule`);
  const partner = manifest.sequences.find(
    (e) => e.role === "gs" && e.pairing_id === entry.pairing_id,
  );
  if (partner === undefined) throw new Error(`entry '${entry.id}' has no gs partner`);
  return {
    entry,
    inputFrames: readSequence(path.join(root, entry.path)),
    targetFrames: readSequence(path.join(root, partner.path)),
    ee: eeColumn(entry.schedule, entry.height),
  };
}

/** Consecutive-frame segments of the given length (stride = length). */
export function toSegments(pair: PairedSequences, segmentLength: number): SegmentBatch[] {
  const total = pair.inputFrames.length;
  if (total < 1) throw new Error("empty sequence");
  const s = Math.min(segmentLength, total);
  const batches: SegmentBatch[] = [];
  for (let start = 0; start + s <= total; start += s) {
    batches.push({
      inputs: pair.inputFrames
        .slice(start, start + s)
        .map((f) => frameToTensor(f, pair.ee)),
      targets: pair.targetFrames
        .slice(start, start + s)
        .map((f) => frameToTensor(f, null)),
    });
  }
  return batches;
}
