/** Acceptance criteria for the restorer (the overfit run lives in overfit.test.ts). */

import { describe, expect, it } from "vitest";

import { RestorationLoss } from "../src/loss.js";
import { RestorerModel, defaultConfig } from "../src/model.js";
import {
  maxRelError,
  numericGradient,
  randomImage,
  spreadIndices,
} from "./helpers.js";
import { Rng } from "../src/rng.js";
import { Tensor } from "../src/tensor.js";

describe("acceptance", () => {
  it("residual identity: zero-initialized final layer returns the input RGB exactly", () => {
    const model = new RestorerModel({ ...defaultConfig, baseWidth: 8, segmentLength: 4 });
    const frames = [0, 1, 2, 3].map((t) => randomImage([4, 16, 16], 90 + t));
    const preds = model.forward(frames);
    for (let t = 0; t < frames.length; t++) {
      expect(Array.from(preds[t].data)).toEqual(
        Array.from(frames[t].data.subarray(0, 3 * 16 * 16)),
      );
    }
  });

  it("loss gradient matches central finite differences (< 1e-3, 8x8 doubles)", () => {
    const criterion = new RestorationLoss(3);
    const target = randomImage([3, 8, 8], 200);
    const rng = new Rng(201);
    const pred = new Tensor(target.data.slice(), target.shape, true);
    for (let i = 0; i < pred.size; i++) {
      pred.data[i] = Math.min(1, Math.max(0, pred.data[i] + rng.normal() * 0.08));
    }
    const forward = () => criterion.frame(pred, target, 0.5);
    pred.grad = null;
    forward().backward();
    const analytic = pred.grad!;
    const indices = spreadIndices(pred.size, 32);
    const numeric = numericGradient(forward, pred, indices, 1e-6);
    expect(maxRelError(indices.map((i) => analytic[i]), numeric)).toBeLessThan(1e-3);
  });

  it("lambda-interpolation identity holds to 1e-9 on random inputs", () => {
    const criterion = new RestorationLoss(3);
    for (let seed = 0; seed < 3; seed++) {
      const a = randomImage([3, 12, 12], 300 + seed);
      const b = randomImage([3, 12, 12], 400 + seed);
      const l0 = criterion.frame(a, b, 0).item();
      const l1 = criterion.frame(a, b, 1).item();
      for (const lambda of [0.2, 0.5, 0.8]) {
        const mixed = criterion.frame(a, b, lambda).item();
        expect(Math.abs(mixed - (lambda * l1 + (1 - lambda) * l0))).toBeLessThan(1e-9);
      }
    }
  });
});
