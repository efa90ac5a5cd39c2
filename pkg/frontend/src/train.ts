/** Training loop: supervised restoration of GS targets from RSGR segments. */

import * as fs from "node:fs";

import { Adam } from "./adam.js";
import { loadPaired, toSegments, type SegmentBatch } from "./data.js";
import { RestorationLoss } from "./loss.js";
import { defaultConfig, RestorerModel, type ModelConfig } from "./model.js";
import { Tensor } from "./tensor.js";

export interface TrainOptions {
  iterations: number;
  lr: number;
  config: ModelConfig;
  /** stop early once train PSNR beats the input by this many dB (0 = never) */
  targetGainDb: number;
  logEvery: number;
}

export const defaultTrainOptions: TrainOptions = {
  iterations: 200,
  lr: 2e-3,
  config: defaultConfig,
  targetGainDb: 0,
  logEvery: 10,
};

/**
 * Loss mixing schedule: lambda ramps linearly from 1.0 (pure perceptual) to
 * 0.5 over the first half of training, then stays constant.
 */
export function lambdaAt(iteration: number, totalIterations: number): number {
  const half = Math.max(1, Math.floor(totalIterations / 2));
  return iteration >= half ? 0.5 : 1.0 - 0.5 * (iteration / half);
}

export function psnrDb(pred: Tensor, target: Tensor): number {
  let se = 0;
  for (let i = 0; i < pred.size; i++) {
    const d = Math.min(1, Math.max(0, pred.data[i])) - target.data[i];
    se += d * d;
  }
  const mse = se / pred.size;
  return mse === 0 ? 100 : Math.min(10 * Math.log10(1 / mse), 100);
}

function segmentPsnr(model: RestorerModel, batch: SegmentBatch): number {
  const preds = model.forward(batch.inputs);
  let total = 0;
  for (let t = 0; t < preds.length; t++) total += psnrDb(preds[t], batch.targets[t]);
  return total / preds.length;
}

export interface TrainResult {
  model: RestorerModel;
  losses: number[];
  inputPsnrDb: number;
  finalPsnrDb: number;
}

export function train(manifestPath: string, opts: TrainOptions = defaultTrainOptions): TrainResult {
  const pair = loadPaired(manifestPath);
  const batches = toSegments(pair, opts.config.segmentLength);
  if (batches.length === 0) throw new Error("dataset yields no segments");

  const model = new RestorerModel(opts.config);
  const criterion = new RestorationLoss(opts.config.imageChannels, opts.config.seed + 1);
  const optimizer = new Adam(model.parameters(), opts.lr);

  let inputPsnr = 0;
  for (const b of batches) {
    for (let t = 0; t < b.inputs.length; t++) {
      const c = opts.config.imageChannels;
      const plane = b.inputs[t].shape[1] * b.inputs[t].shape[2];
      const rgb = new Tensor(b.inputs[t].data.slice(0, c * plane), [c, b.inputs[t].shape[1], b.inputs[t].shape[2]]);
      inputPsnr += psnrDb(rgb, b.targets[t]);
    }
  }
  inputPsnr /= batches.length * batches[0].inputs.length;

  const losses: number[] = [];
  for (let it = 0; it < opts.iterations; it++) {
    const batch = batches[it % batches.length];
    const lambda = lambdaAt(it, opts.iterations);
    const preds = model.forward(batch.inputs);
    const loss = criterion.segment(preds, batch.targets, lambda);
    model.zeroGrad();
    loss.backward();
    optimizer.step();
    losses.push(loss.item());

    if (opts.targetGainDb > 0 && (it + 1) % opts.logEvery === 0) {
      const current = segmentPsnr(model, batches[0]);
      if (current - inputPsnr >= opts.targetGainDb) break;
    }
  }

  return {
    model,
    losses,
    inputPsnrDb: inputPsnr,
    finalPsnrDb: segmentPsnr(model, batches[0]),
  };
}

// ---- checkpoints ----

interface Checkpoint {
  version: number;
  config: ModelConfig;
  params: Record<string, number[]>;
}

export function saveCheckpoint(model: RestorerModel, file: string): void {
  const params: Record<string, number[]> = {};
  for (const [name, t] of model.params) params[name] = Array.from(t.data);
  const ckpt: Checkpoint = { version: 1, config: model.config, params };
  fs.writeFileSync(file, JSON.stringify(ckpt), "utf-8");
}

export function loadCheckpoint(file: string): RestorerModel {
  const ckpt = JSON.parse(fs.readFileSync(file, "utf-8")) as Checkpoint;
  if (ckpt.version !== 1) throw new Error(`unsupported checkpoint version ${ckpt.version}`);
  const model = new RestorerModel(ckpt.config);
  for (const [name, t] of model.params) {
    const saved = ckpt.params[name];
    if (saved === undefined || saved.length !== t.size) {
      throw new Error(`checkpoint is missing or mismatched for parameter '${name}'`);
    }
    t.data.set(saved);
  }
  return model;
}
