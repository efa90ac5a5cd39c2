/**
 * Reader/writer for the dataset toolkit's raw frame format and manifest.
 * This file format is the only channel between the restorer and the
 * simulator.
 *
 * Frame layout (little-endian): "RSGR" magic, u32 version (1), u32 height,
 * u32 width, u32 channels, u32 encoding (0 = linear, else gamma*1e6), then
 * height*width*channels float32 values, row-major, channel-interleaved.
 */

import * as fs from "node:fs";
import * as path from "node:path";

const MAGIC = 0x52475352; // "RSGR" read as LE u32
const VERSION = 1;
const HEADER_BYTES = 24;
export const FRAME_SUFFIX = ".rsgr";

export interface RawFrame {
  height: number;
  width: number;
  channels: number;
  gamma: number | null;
  /** HWC order, float64 in memory (file stores float32). */
  data: Float64Array;
}

export function readFrame(file: string): RawFrame {
  const buf = fs.readFileSync(file);
  if (buf.length < HEADER_BYTES) throw new Error(`${file}: shorter than header`);
  if (buf.readUInt32LE(0) !== MAGIC) throw new Error(`${file}: bad magic`);
  if (buf.readUInt32LE(4) !== VERSION) throw new Error(`${file}: unsupported version`);
  const height = buf.readUInt32LE(8);
  const width = buf.readUInt32LE(12);
  const channels = buf.readUInt32LE(16);
  const enc = buf.readUInt32LE(20);
  const count = height * width * channels;
  if (buf.length !== HEADER_BYTES + count * 4) {
    throw new Error(`${file}: payload size mismatch`);
  }
  const data = new Float64Array(count);
  for (let i = 0; i < count; i++) data[i] = buf.readFloatLE(HEADER_BYTES + i * 4);
  return { height, width, channels, gamma: enc === 0 ? null : enc / 1e6, data };
}

export function writeFrame(file: string, frame: RawFrame): void {
  const count = frame.height * frame.width * frame.channels;
  if (frame.data.length !== count) throw new Error("frame data length mismatch");
  const buf = Buffer.alloc(HEADER_BYTES + count * 4);
  buf.writeUInt32LE(MAGIC, 0);
  buf.writeUInt32LE(VERSION, 4);
  buf.writeUInt32LE(frame.height, 8);
  buf.writeUInt32LE(frame.width, 12);
  buf.writeUInt32LE(frame.channels, 16);
  buf.writeUInt32LE(frame.gamma === null ? 0 : Math.round(frame.gamma * 1e6), 20);
  for (let i = 0; i < count; i++) {
    buf.writeFloatLE(Math.fround(Math.min(1, Math.max(0, frame.data[i]))), HEADER_BYTES + i * 4);
  }
  fs.writeFileSync(file, buf);
}

export function frameFilename(index: number): string {
  return `${String(index).padStart(6, "0")}${FRAME_SUFFIX}`;
}

export function readSequence(dir: string): RawFrame[] {
  const files = fs
    .readdirSync(dir)
    .filter((f) => f.endsWith(FRAME_SUFFIX))
    .sort();
  if (files.length === 0) throw new Error(`no ${FRAME_SUFFIX} frames in ${dir}`);
  return files.map((f) => readFrame(path.join(dir, f)));
}

export function writeSequence(dir: string, frames: RawFrame[]): void {
  fs.mkdirSync(dir, { recursive: true });
  frames.forEach((frame, i) => writeFrame(path.join(dir, frameFilename(i)), frame));
}

// ---- manifest ----

export interface Schedule {
  mode: "gs" | "rs" | "rsgr";
  rows: number;
  base_exposure_s: number;
  readout_ratio: number;
  scan_direction: "top" | "bottom";
}

export interface ManifestEntry {
  id: string;
  role: "source" | "rsgr" | "gs" | "rs" | "prediction";
  path: string;
  frame_count: number;
  height: number;
  width: number;
  channels: number;
  frame_period_s: number;
  encoding: { gamma: number | null };
  schedule: Schedule | null;
  pairing_id: string | null;
}

export interface Manifest {
  format_version: number;
  name: string;
  sequences: ManifestEntry[];
  splits: Record<string, string[]>;
  provenance: unknown;
}

export function readManifest(file: string): Manifest {
  const m = JSON.parse(fs.readFileSync(file, "utf-8")) as Manifest;
  if (!Array.isArray(m.sequences)) throw new Error(`${file}: missing sequences`);
  return m;
}

export function writeManifest(file: string, manifest: Manifest): void {
  // sorted keys, trailing newline: byte-compatible with the toolkit's writer
  const sorted = (value: unknown): unknown => {
    if (Array.isArray(value)) return value.map(sorted);
    if (value !== null && typeof value === "object") {
      const obj = value as Record<string, unknown>;
      return Object.fromEntries(
        Object.keys(obj)
          .sort()
          .map((k) => [k, sorted(obj[k])]),
      );
    }
    return value;
  };
  fs.writeFileSync(file, JSON.stringify(sorted(manifest), null, 2) + "\n", "utf-8");
}

export function findEntry(manifest: Manifest, id: string): ManifestEntry {
  const entry = manifest.sequences.find((e) => e.id === id);
  if (entry === undefined) throw new Error(`no sequence entry with id '${id}'`);
  return entry;
}
