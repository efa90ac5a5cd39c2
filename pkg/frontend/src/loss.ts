/**
 * Training objective: perceptual L1 on fixed features plus a differentiable
 * SSIM penalty, mixed by lambda:
 *
 *   L = lambda * sum_l mean|psi_l(target) - psi_l(pred)|
 *     + (1 - lambda) * (1 - SSIM(pred, target))
 *
 * psi is a small frozen conv pyramid with seeded random weights, so the
 * objective is self-contained and deterministic. The SSIM term uses a 7x7
 * Gaussian window (sigma 1.5, valid region) so it stays defined on small
 * training crops and test fixtures; evaluation-side SSIM is the scorer's
 * concern, not this loss's.
 */

import { Rng } from "./rng.js";
import {
  Tensor,
  abs,
  add,
  addScalar,
  conv2d,
  div,
  leakyRelu,
  mean,
  mul,
  scale,
  sub,
} from "./tensor.js";

const SSIM_WINDOW = 7;
const SSIM_SIGMA = 1.5;
const C1 = 0.01 ** 2;
const C2 = 0.03 ** 2;
const LUMA = [0.299, 0.587, 0.114];

function fixedConv(rng: Rng, cout: number, cin: number, k: number): Tensor {
  const w = Tensor.zeros([cout, cin, k, k]);
  const std = Math.sqrt(2 / (cin * k * k));
  for (let i = 0; i < w.size; i++) w.data[i] = rng.normal() * std;
  return w; // requiresGrad stays false: psi is never trained
}

export class PerceptualFeatures {
  private readonly levels: { w: Tensor; stride: number }[];

  constructor(imageChannels: number, seed = 101) {
    const rng = new Rng(seed);
    this.levels = [
      { w: fixedConv(rng, 8, imageChannels, 3), stride: 1 },
      { w: fixedConv(rng, 16, 8, 3), stride: 2 },
      { w: fixedConv(rng, 16, 16, 3), stride: 2 },
    ];
  }

  extract(x: Tensor): Tensor[] {
    const feats: Tensor[] = [];
    let f = x;
    for (const level of this.levels) {
      f = leakyRelu(conv2d(f, level.w, null, { stride: level.stride, pad: 1 }));
      feats.push(f);
    }
    return feats;
  }
}

function gaussianWindow(): Tensor {
  const w = Tensor.zeros([1, 1, SSIM_WINDOW, SSIM_WINDOW]);
  const c = (SSIM_WINDOW - 1) / 2;
  let sum = 0;
  for (let y = 0; y < SSIM_WINDOW; y++) {
    for (let x = 0; x < SSIM_WINDOW; x++) {
      const v = Math.exp(-((y - c) ** 2 + (x - c) ** 2) / (2 * SSIM_SIGMA ** 2));
      w.data[y * SSIM_WINDOW + x] = v;
      sum += v;
    }
  }
  for (let i = 0; i < w.size; i++) w.data[i] /= sum;
  return w;
}

const GAUSS = gaussianWindow();

function toLuma(x: Tensor): Tensor {
  if (x.shape[0] === 1) return x;
  if (x.shape[0] !== 3) throw new Error("ssim expects 1 or 3 channels");
  const w = Tensor.zeros([1, 3, 1, 1]);
  w.data.set(LUMA);
  return conv2d(x, w, null, { pad: 0 });
}

function blur(x: Tensor): Tensor {
  return conv2d(x, GAUSS, null, { pad: 0 });
}

/** Differentiable mean SSIM over the valid window region. */
export function ssimDiff(pred: Tensor, target: Tensor): Tensor {
  if (pred.shape.some((d, i) => d !== target.shape[i])) {
    throw new Error("ssim: shape mismatch");
  }
  if (pred.shape[1] < SSIM_WINDOW || pred.shape[2] < SSIM_WINDOW) {
    throw new Error(`ssim: frame smaller than the ${SSIM_WINDOW}x${SSIM_WINDOW} window`);
  }
  const x = toLuma(pred);
  const y = toLuma(target);
  const mx = blur(x);
  const my = blur(y);
  const vx = sub(blur(mul(x, x)), mul(mx, mx));
  const vy = sub(blur(mul(y, y)), mul(my, my));
  const cov = sub(blur(mul(x, y)), mul(mx, my));
  const num = mul(addScalar(scale(mul(mx, my), 2), C1), addScalar(scale(cov, 2), C2));
  const den = mul(addScalar(add(mul(mx, mx), mul(my, my)), C1), addScalar(add(vx, vy), C2));
  return mean(div(num, den));
}

export class RestorationLoss {
  private readonly psi: PerceptualFeatures;

  constructor(imageChannels: number, seed = 101) {
    this.psi = new PerceptualFeatures(imageChannels, seed);
  }

  perceptual(pred: Tensor, target: Tensor): Tensor {
    const fp = this.psi.extract(pred);
    const ft = this.psi.extract(target);
    let total = mean(abs(sub(ft[0], fp[0])));
    for (let l = 1; l < fp.length; l++) {
      total = add(total, mean(abs(sub(ft[l], fp[l]))));
    }
    return total;
  }

  /** One frame of the objective; lambda in [0, 1]. */
  frame(pred: Tensor, target: Tensor, lambda: number): Tensor {
    if (!(lambda >= 0 && lambda <= 1)) {
      throw new Error(`lambda must lie in [0, 1], got ${lambda}`);
    }
    const dssim = addScalar(scale(ssimDiff(pred, target), -1), 1);
    return add(scale(this.perceptual(pred, target), lambda), scale(dssim, 1 - lambda));
  }

  /** Segment objective: frame errors summed together. */
  segment(preds: Tensor[], targets: Tensor[], lambda: number): Tensor {
    if (preds.length !== targets.length) throw new Error("segment length mismatch");
    let total = this.frame(preds[0], targets[0], lambda);
    for (let t = 1; t < preds.length; t++) {
      total = add(total, this.frame(preds[t], targets[t], lambda));
    }
    return total;
  }
}
