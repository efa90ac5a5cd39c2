import { describe, expect, it } from "vitest";

import {
  Tensor,
  abs,
  add,
  addScalar,
  concatC,
  conv2d,
  deformConv2d,
  div,
  globalAvgPool,
  leakyRelu,
  mean,
  mul,
  mulChannel,
  mulSpatial,
  relu,
  scale,
  sigmoid,
  sliceC,
  sub,
  upsample2,
} from "../src/tensor.js";
import {
  analyticGradient,
  maxRelError,
  numericGradient,
  randomTensor,
  spreadIndices,
} from "./helpers.js";

const TOL = 1e-5;

function checkGrad(make: () => Tensor, param: Tensor, count = 12): void {
  const indices = spreadIndices(param.size, count);
  const analytic = analyticGradient(make, param);
  const numeric = numericGradient(make, param, indices);
  const picked = indices.map((i) => analytic[i]);
  expect(maxRelError(picked, numeric)).toBeLessThan(TOL);
}

describe("elementwise gradients", () => {
  const a = randomTensor([2, 4, 3], 1, 1, true);
  const b = randomTensor([2, 4, 3], 2, 1, true);
  for (let i = 0; i < b.size; i++) b.data[i] += b.data[i] >= 0 ? 0.5 : -0.5; // keep away from 0 for div

  it("add/sub/mul/div", () => {
    checkGrad(() => mean(add(a, b)), a);
    checkGrad(() => mean(sub(a, b)), b);
    checkGrad(() => mean(mul(a, b)), a);
    checkGrad(() => mean(div(a, b)), a);
    checkGrad(() => mean(div(a, b)), b);
  });

  it("scale/addScalar/abs/mean", () => {
    checkGrad(() => mean(scale(a, 2.5)), a);
    checkGrad(() => mean(addScalar(a, 0.7)), a);
    checkGrad(() => mean(abs(addScalar(a, 0.05))), a);
  });

  it("activations", () => {
    checkGrad(() => mean(relu(addScalar(a, 0.01))), a);
    checkGrad(() => mean(leakyRelu(addScalar(a, 0.01))), a);
    checkGrad(() => mean(sigmoid(a)), a);
  });
});

describe("shape op gradients", () => {
  const a = randomTensor([3, 4, 4], 3, 1, true);
  const b = randomTensor([2, 4, 4], 4, 1, true);

  it("concat and slice route gradients to the right places", () => {
    checkGrad(() => mean(mul(concatC([a, b]), concatC([a, b]))), a);
    checkGrad(() => mean(sliceC(a, 1, 2)), a);
  });

  it("pools and broadcasts", () => {
    const s = randomTensor([3, 1, 1], 5, 1, true);
    const m = randomTensor([1, 4, 4], 6, 1, true);
    checkGrad(() => mean(globalAvgPool(mul(a, a))), a);
    checkGrad(() => mean(mulChannel(a, s)), s);
    checkGrad(() => mean(mulChannel(a, s)), a);
    checkGrad(() => mean(mulSpatial(a, m)), m);
    checkGrad(() => mean(upsample2(a)), a);
  });
});

describe("conv2d", () => {
  const x = randomTensor([3, 6, 5], 7, 1, true);
  const w = randomTensor([4, 3, 3, 3], 8, 0.5, true);
  const b = randomTensor([4], 9, 0.1, true);

  it("matches a hand-computed 1x1 case", () => {
    const x1 = Tensor.zeros([2, 2, 2]);
    x1.data.set([1, 2, 3, 4, 5, 6, 7, 8]);
    const w1 = Tensor.zeros([1, 2, 1, 1]);
    w1.data.set([2, -1]);
    const out = conv2d(x1, w1, null, { pad: 0 });
    expect(Array.from(out.data)).toEqual([2 * 1 - 5, 2 * 2 - 6, 2 * 3 - 7, 2 * 4 - 8]);
  });

  it("gradients wrt input, weight, bias", () => {
    checkGrad(() => mean(mul(conv2d(x, w, b), conv2d(x, w, b))), x);
    checkGrad(() => mean(mul(conv2d(x, w, b), conv2d(x, w, b))), w);
    checkGrad(() => mean(conv2d(x, w, b)), b);
  });

  it("strided gradients", () => {
    checkGrad(() => mean(mul(conv2d(x, w, b, { stride: 2 }), conv2d(x, w, b, { stride: 2 }))), x);
    checkGrad(() => mean(conv2d(x, w, b, { stride: 2 })), w);
  });

  it("valid padding shrinks output", () => {
    expect(conv2d(x, w, b, { pad: 0 }).shape).toEqual([4, 4, 3]);
    expect(conv2d(x, w, b, { pad: 1 }).shape).toEqual([4, 6, 5]);
  });
});

describe("deformConv2d", () => {
  const x = randomTensor([2, 6, 6], 10, 1, true);
  const w = randomTensor([3, 2, 3, 3], 11, 0.5, true);
  const b = randomTensor([3], 12, 0.1, true);
  const zeroOff = () => Tensor.zeros([18, 6, 6]);

  it("zero offsets reduce exactly to conv2d", () => {
    const impulse = Tensor.zeros([1, 5, 5]);
    impulse.data[2 * 5 + 2] = 1;
    const wi = randomTensor([2, 1, 3, 3], 13, 1);
    const got = deformConv2d(impulse, Tensor.zeros([18, 5, 5]), wi, null);
    const expected = conv2d(impulse, wi, null, { pad: 1 });
    expect(Array.from(got.data)).toEqual(Array.from(expected.data));
  });

  it("gradients wrt input, weight, bias at zero offsets", () => {
    checkGrad(() => mean(mul(deformConv2d(x, zeroOff(), w, b), deformConv2d(x, zeroOff(), w, b))), x);
    checkGrad(() => mean(deformConv2d(x, zeroOff(), w, b)), w);
    checkGrad(() => mean(deformConv2d(x, zeroOff(), w, b)), b);
  });

  it("gradients wrt offsets at fractional positions", () => {
    // fractional offsets keep bilinear sampling away from integer kinks
    const off = randomTensor([18, 6, 6], 14, 0.3, true);
    for (let i = 0; i < off.size; i++) off.data[i] += off.data[i] >= 0 ? 0.15 : -0.15;
    checkGrad(() => mean(mul(deformConv2d(x, off, w, b), deformConv2d(x, off, w, b))), off, 16);
    checkGrad(() => mean(mul(deformConv2d(x, off, w, b), deformConv2d(x, off, w, b))), x, 16);
  });
});
