import { Rng } from "../src/rng.js";
import { Tensor } from "../src/tensor.js";

export function randomTensor(shape: number[], seed: number, scaleBy = 1, requiresGrad = false): Tensor {
  const t = Tensor.zeros(shape, requiresGrad);
  const rng = new Rng(seed);
  for (let i = 0; i < t.size; i++) t.data[i] = (rng.uniform() * 2 - 1) * scaleBy;
  return t;
}

export function randomImage(shape: number[], seed: number): Tensor {
  const t = Tensor.zeros(shape);
  const rng = new Rng(seed);
  for (let i = 0; i < t.size; i++) t.data[i] = rng.uniform();
  return t;
}

/**
 * Central finite differences of a scalar-valued rebuildable computation with
 * respect to `param`, at the given flat indices.
 */
export function numericGradient(
  forward: () => Tensor,
  param: Tensor,
  indices: number[],
  eps = 1e-5,
): number[] {
  return indices.map((i) => {
    const saved = param.data[i];
    param.data[i] = saved + eps;
    const plus = forward().item();
    param.data[i] = saved - eps;
    const minus = forward().item();
    param.data[i] = saved;
    return (plus - minus) / (2 * eps);
  });
}

export function analyticGradient(forward: () => Tensor, param: Tensor): Float64Array {
  param.grad = null;
  const loss = forward();
  loss.backward();
  if (param.grad === null) throw new Error("no gradient reached the parameter");
  return param.grad;
}

export function maxRelError(analytic: ArrayLike<number>, numeric: ArrayLike<number>): number {
  let worst = 0;
  for (let i = 0; i < numeric.length; i++) {
    const denom = Math.max(Math.abs(analytic[i]), Math.abs(numeric[i]), 1e-8);
    worst = Math.max(worst, Math.abs(analytic[i] - numeric[i]) / denom);
  }
  return worst;
}

export function spreadIndices(size: number, count: number): number[] {
  const n = Math.min(count, size);
  return Array.from({ length: n }, (_, i) => Math.floor((i * size) / n));
}
