import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { execFileSync } from "node:child_process";
import { fileURLToPath } from "node:url";

import { describe, expect, it } from "vitest";

import { infer } from "../src/infer.js";
import { defaultConfig } from "../src/model.js";
import {
  defaultTrainOptions,
  lambdaAt,
  loadCheckpoint,
  saveCheckpoint,
  train,
  type TrainOptions,
} from "../src/train.js";
import { randomImage } from "./helpers.js";

const FIXTURES = path.join(path.dirname(fileURLToPath(import.meta.url)), "fixtures");
const MANIFEST = path.join(FIXTURES, "pairdata", "manifest.json");

const tinyOpts: TrainOptions = {
  ...defaultTrainOptions,
  iterations: 3,
  lr: 1e-3,
  config: { ...defaultConfig, baseWidth: 6, segmentLength: 4, seed: 3 },
};

describe("lambda schedule", () => {
  it("ramps from 1.0 to 0.5 over the first half, then holds", () => {
    expect(lambdaAt(0, 100)).toBe(1.0);
    expect(lambdaAt(25, 100)).toBeCloseTo(0.75, 12);
    expect(lambdaAt(50, 100)).toBe(0.5);
    expect(lambdaAt(99, 100)).toBe(0.5);
  });
});

describe("training", () => {
  it("same seed reproduces the loss curve exactly", () => {
    const a = train(MANIFEST, tinyOpts);
    const b = train(MANIFEST, tinyOpts);
    expect(a.losses).toEqual(b.losses);
  });

  it("different seeds diverge", () => {
    const a = train(MANIFEST, tinyOpts);
    const b = train(MANIFEST, { ...tinyOpts, config: { ...tinyOpts.config, seed: 4 } });
    expect(a.losses).not.toEqual(b.losses);
  });

  it("loss decreases over a short run", () => {
    const r = train(MANIFEST, { ...tinyOpts, iterations: 8 });
    expect(r.losses[r.losses.length - 1]).toBeLessThan(r.losses[0]);
  });
});

describe("checkpoints", () => {
  it("round-trip restores identical parameters and outputs", () => {
    const r = train(MANIFEST, tinyOpts);
    const file = path.join(fs.mkdtempSync(path.join(os.tmpdir(), "ckpt-")), "model.json");
    saveCheckpoint(r.model, file);
    const restored = loadCheckpoint(file);
    const frames = [0, 1, 2, 3].map((t) => randomImage([4, 16, 16], 80 + t));
    const a = r.model.forward(frames);
    const b = restored.forward(frames);
    for (let t = 0; t < frames.length; t++) {
      expect(Array.from(b[t].data)).toEqual(Array.from(a[t].data));
    }
  });
});

describe("inference output contract", () => {
  it("writes predictions the dataset toolkit validates as role=prediction", () => {
    const r = train(MANIFEST, tinyOpts);
    const out = fs.mkdtempSync(path.join(os.tmpdir(), "restored-"));
    const result = infer(MANIFEST, r.model, out);
    expect(result.predictionId).toBe("rsgr_restored");
    const frames = fs.readdirSync(path.join(out, "rsgr_restored"));
    expect(frames).toHaveLength(4);

    const check = execFileSync(
      "python3",
      [
        "-c",
        [
          "import sys",
          "from shuttersim import load_manifest, validate_manifest",
          "m = load_manifest(sys.argv[1])",
          "violations = validate_manifest(m)",
          "entry = m.entry('rsgr_restored')",
          "print(entry.role, len(violations))",
        ].join("\n"),
        path.join(out, "manifest.json"),
      ],
      { encoding: "utf-8" },
    ).trim();
    expect(check).toBe("prediction 0");
  });
});
