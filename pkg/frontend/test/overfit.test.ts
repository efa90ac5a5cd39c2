/**
 * Overfit acceptance run: train on one synthesized sequence until full-frame
 * PSNR beats the distorted input by 6 dB, scored end-to-end by the dataset
 * toolkit's own `eval` CLI. Slow (minutes); run with RUN_OVERFIT=1, e.g.
 * `npm run test:overfit`.
 */

import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";
import { execFileSync } from "node:child_process";

import { describe, expect, it } from "vitest";

import { infer } from "../src/infer.js";
import { defaultConfig } from "../src/model.js";
import { defaultTrainOptions, saveCheckpoint, train } from "../src/train.js";

const run = process.env.RUN_OVERFIT === "1" ? it : it.skip;

function sh(cmd: string, args: string[]): string {
  return execFileSync(cmd, args, { encoding: "utf-8" });
}

function fullFramePsnr(predDir: string, gtDir: string, reportFile: string): number {
  sh("shuttersim", [
    "eval", "--pred", predDir, "--gt", gtDir, "--band-height", "20", "--report", reportFile,
  ]);
  const report = JSON.parse(fs.readFileSync(reportFile, "utf-8"));
  return report.aggregate.F.psnr_db;
}

describe("overfit sanity", () => {
  run(
    "training on one synthesized sequence gains >= 6 dB full-frame PSNR",
    () => {
      const work = fs.mkdtempSync(path.join(os.tmpdir(), "overfit-"));
      sh("shuttersim", [
        "gen-scenes", "--kind", "checker", "--height", "64", "--width", "64",
        "--channels", "3", "--subframe-dt", "5e-5", "--count", "200",
        "--velocity", "2000,500", "--seed", "17", "--out", path.join(work, "src"),
      ]);
      sh("shuttersim", [
        "pair-synth", "--source", path.join(work, "src"), "--e0", "1e-3",
        "--xi", "1", "--frame-period", "1e-3", "--count", "8",
        "--out", path.join(work, "pair"),
      ]);
      const manifest = path.join(work, "pair", "manifest.json");

      const started = Date.now();
      const result = train(manifest, {
        ...defaultTrainOptions,
        iterations: 300,
        lr: 1e-3,
        targetGainDb: 6.5, // early stop just past the bar
        logEvery: 5,
        config: { ...defaultConfig, seed: 7 },
      });
      const minutes = (Date.now() - started) / 60000;
      saveCheckpoint(result.model, path.join(work, "model.json"));

      const out = path.join(work, "restored");
      infer(manifest, result.model, out);

      const inputPsnr = fullFramePsnr(
        path.join(work, "pair", "rsgr"),
        path.join(work, "pair", "gs"),
        path.join(work, "input_report.json"),
      );
      const restoredPsnr = fullFramePsnr(
        path.join(out, "rsgr_restored"),
        path.join(work, "pair", "gs"),
        path.join(work, "restored_report.json"),
      );
      console.log(
        `overfit: input ${inputPsnr.toFixed(2)} dB -> restored ${restoredPsnr.toFixed(2)} dB ` +
          `after ${result.losses.length} iterations (${minutes.toFixed(1)} min)`,
      );
      expect(minutes).toBeLessThan(30);
      expect(restoredPsnr - inputPsnr).toBeGreaterThanOrEqual(6.0);
    },
    1_800_000,
  );
});
