/** Inference: restore a distorted sequence and write it in the raw format. */

import * as path from "node:path";

import { frameToTensor, loadPaired, tensorToFrame } from "./data.js";
import type { RestorerModel } from "./model.js";
import {
  findEntry,
  readManifest,
  writeManifest,
  writeSequence,
  type Manifest,
  type RawFrame,
} from "./rawio.js";
import { eeColumn } from "./ee.js";
import { readSequence } from "./rawio.js";
import type { Tensor } from "./tensor.js";

function clamp01(t: Tensor): Tensor {
  for (let i = 0; i < t.size; i++) t.data[i] = Math.min(1, Math.max(0, t.data[i]));
  return t;
}

/**
 * Run the model over an arbitrary-length sequence in segment chunks. Every
 * frame receives exactly one prediction: a short tail is processed as the
 * last `segmentLength` frames with only the unseen suffix kept.
 */
export function restoreSequence(model: RestorerModel, inputs: Tensor[]): Tensor[] {
  const s = model.config.segmentLength;
  const out: Tensor[] = new Array(inputs.length);
  let start = 0;
  while (start < inputs.length) {
    const from = Math.min(start, Math.max(0, inputs.length - s));
    const chunk = inputs.slice(from, from + s);
    const preds = chunk.map((): Tensor | null => null);
    model.forward(chunk).forEach((p, i) => (preds[i] = p));
    for (let i = 0; i < chunk.length; i++) {
      const idx = from + i;
      if (idx >= start) out[idx] = clamp01(preds[i]!);
    }
    start = from + chunk.length;
  }
  return out;
}

export interface InferResult {
  outDir: string;
  predictionId: string;
}

export function infer(
  manifestPath: string,
  model: RestorerModel,
  outDir: string,
  inputId?: string,
): InferResult {
  const manifest: Manifest = readManifest(manifestPath);
  const root = path.dirname(manifestPath);
  const distorted = manifest.sequences.filter((e) => e.role === "rsgr" || e.role === "rs");
  const entry = inputId === undefined ? distorted[0] : findEntry(manifest, inputId);
  if (entry === undefined || entry.schedule === null) {
    throw new Error("no distorted entry with a schedule to restore");
  }

  const frames = readSequence(path.join(root, entry.path));
  const ee = eeColumn(entry.schedule, entry.height);
  const inputs = frames.map((f) => frameToTensor(f, ee));
  const preds = restoreSequence(model, inputs);

  const predictionId = `${entry.id}_restored`;
  const outFrames: RawFrame[] = preds.map((p) => tensorToFrame(p, entry.encoding.gamma));
  writeSequence(path.join(outDir, predictionId), outFrames);

  const outManifest: Manifest = {
    format_version: 1,
    name: "restored",
    sequences: [
      {
        id: predictionId,
        role: "prediction",
        path: predictionId,
        frame_count: outFrames.length,
        height: entry.height,
        width: entry.width,
        channels: entry.channels,
        frame_period_s: entry.frame_period_s,
        encoding: entry.encoding,
        schedule: null,
        pairing_id: entry.pairing_id,
      },
    ],
    splits: {},
    provenance: { command: "infer", flags: { manifest: manifestPath, input: entry.id } },
  };
  writeManifest(path.join(outDir, "manifest.json"), outManifest);
  return { outDir, predictionId };
}
