/**
 * Toy video restorer for global-reset rolling-shutter input.
 *
 * Per frame: a spatially-aware encoder (exposure channel + spatial attention)
 * produces features at half resolution. A bidirectional recurrent pass
 * aggregates the whole segment (forward then backward, zero initial hidden
 * states), a sliding 3-frame window aligns neighbors with a deformable
 * convolution and fuses them under channel attention, and a decoder predicts
 * a residual added onto the input RGB.
 */

import { Rng } from "./rng.js";
import {
  Tensor,
  add,
  concatC,
  conv2d,
  deformConv2d,
  globalAvgPool,
  leakyRelu,
  mulChannel,
  mulSpatial,
  relu,
  scale,
  sigmoid,
  sliceC,
  upsample2,
} from "./tensor.js";

export interface ModelConfig {
  /** frames per training segment */
  segmentLength: number;
  /** sliding window of the short-term aggregator (K=1 neighbors per side) */
  windowLength: number;
  baseWidth: number;
  /** residual blocks per stage */
  resBlocks: number;
  /** image channels of the restored output (input adds one EE channel) */
  imageChannels: number;
  seed: number;
}

export const defaultConfig: ModelConfig = {
  segmentLength: 8,
  windowLength: 3,
  baseWidth: 16,
  resBlocks: 1,
  imageChannels: 3,
  seed: 7,
};

export function validateConfig(config: ModelConfig): void {
  if (config.windowLength !== 3) {
    throw new Error("windowLength must be 3 (one neighbor per side)");
  }
  if (config.segmentLength < config.windowLength) {
    throw new Error("segmentLength must be >= windowLength");
  }
  if (config.baseWidth < 1 || config.resBlocks < 1) {
    throw new Error("baseWidth and resBlocks must be positive");
  }
}

type Params = Map<string, Tensor>;

function heConv(
  params: Params,
  rng: Rng,
  name: string,
  cout: number,
  cin: number,
  k: number,
  zeroInit = false,
): { w: Tensor; b: Tensor } {
  const w = Tensor.zeros([cout, cin, k, k], true);
  if (!zeroInit) {
    const std = Math.sqrt(2 / (cin * k * k));
    for (let i = 0; i < w.size; i++) w.data[i] = rng.normal() * std;
  }
  const b = Tensor.zeros([cout], true);
  params.set(`${name}.w`, w);
  params.set(`${name}.b`, b);
  return { w, b };
}

interface Conv {
  w: Tensor;
  b: Tensor;
  stride: number;
}

function makeConv(
  params: Params,
  rng: Rng,
  name: string,
  cout: number,
  cin: number,
  k = 3,
  stride = 1,
  zeroInit = false,
): Conv {
  return { ...heConv(params, rng, name, cout, cin, k, zeroInit), stride };
}

function applyConv(c: Conv, x: Tensor): Tensor {
  return conv2d(x, c.w, c.b, { stride: c.stride });
}

export class RestorerModel {
  readonly config: ModelConfig;
  readonly params: Params = new Map();

  private encIn: Conv;
  private encDown: Conv;
  private encSa: Conv;
  private encRbs: [Conv, Conv][];

  private faIn: Conv;
  private faRdb: [Conv, Conv, Conv];
  private haRb: [Conv, Conv];
  private fbIn: Conv;
  private fbRdb: [Conv, Conv, Conv];
  private hbRb: [Conv, Conv];

  private offsetConv: Conv;
  private alignConv: Conv;
  private caDown: Conv;
  private caUp: Conv;
  private fuse: Conv;

  private decRbs: [Conv, Conv][];
  private decUp: Conv;
  private decOut: Conv;

  constructor(config: ModelConfig = defaultConfig) {
    validateConfig(config);
    this.config = config;
    const rng = new Rng(config.seed);
    const p = this.params;
    const w = config.baseWidth;
    const cin = config.imageChannels + 1;

    this.encIn = makeConv(p, rng, "enc.in", w, cin);
    this.encDown = makeConv(p, rng, "enc.down", w, w, 3, 2);
    this.encSa = makeConv(p, rng, "enc.sa", 1, w);
    this.encRbs = this.rbStack(p, rng, "enc.rb", w, config.resBlocks);

    this.faIn = makeConv(p, rng, "fa.in", w, 2 * w);
    this.faRdb = this.rdb(p, rng, "fa.rdb", w);
    this.haRb = this.rb(p, rng, "ha.rb", w);
    this.fbIn = makeConv(p, rng, "fb.in", w, 2 * w);
    this.fbRdb = this.rdb(p, rng, "fb.rdb", w);
    this.hbRb = this.rb(p, rng, "hb.rb", w);

    // zero-init offsets: deformable sampling starts as ordinary convolution
    this.offsetConv = makeConv(p, rng, "short.offsets", 18, 2 * w, 3, 1, true);
    this.alignConv = makeConv(p, rng, "short.align", w, w);
    const squeeze = Math.max(1, Math.floor((3 * w) / 4));
    this.caDown = makeConv(p, rng, "short.ca.down", squeeze, 3 * w, 1);
    this.caUp = makeConv(p, rng, "short.ca.up", 3 * w, squeeze, 1);
    this.fuse = makeConv(p, rng, "short.fuse", w, 3 * w);

    this.decRbs = this.rbStack(p, rng, "dec.rb", w, config.resBlocks);
    this.decUp = makeConv(p, rng, "dec.up", w, w);
    // zero-init output: the network is an exact identity at initialization
    this.decOut = makeConv(p, rng, "dec.out", config.imageChannels, w, 3, 1, true);
  }

  private rb(p: Params, rng: Rng, name: string, c: number): [Conv, Conv] {
    return [makeConv(p, rng, `${name}.c1`, c, c), makeConv(p, rng, `${name}.c2`, c, c)];
  }

  private rbStack(p: Params, rng: Rng, name: string, c: number, n: number): [Conv, Conv][] {
    return Array.from({ length: n }, (_, i) => this.rb(p, rng, `${name}${i}`, c));
  }

  private rdb(p: Params, rng: Rng, name: string, c: number): [Conv, Conv, Conv] {
    return [
      makeConv(p, rng, `${name}.d1`, c, c),
      makeConv(p, rng, `${name}.d2`, c, 2 * c),
      makeConv(p, rng, `${name}.out`, c, 3 * c, 1),
    ];
  }

  // residual branches are damped so magnitudes stay bounded through the
  // recurrent aggregation (16 residual adds deep at segment length 8)
  private static readonly RES_SCALE = 0.2;

  private applyRb(rb: [Conv, Conv], x: Tensor): Tensor {
    return add(x, scale(applyConv(rb[1], relu(applyConv(rb[0], x))), RestorerModel.RES_SCALE));
  }

  private applyRdb(rdb: [Conv, Conv, Conv], x: Tensor): Tensor {
    const d1 = leakyRelu(applyConv(rdb[0], x));
    const d2 = leakyRelu(applyConv(rdb[1], concatC([x, d1])));
    return add(x, scale(applyConv(rdb[2], concatC([x, d1, d2])), RestorerModel.RES_SCALE));
  }

  parameters(): Tensor[] {
    return [...this.params.values()];
  }

  zeroGrad(): void {
    for (const t of this.params.values()) t.zeroGrad();
  }

  /** Per-frame spatially-aware encoding of a [C+1, H, W] input. */
  encode(x: Tensor): Tensor {
    const cin = this.config.imageChannels + 1;
    if (x.shape.length !== 3 || x.shape[0] !== cin) {
      throw new Error(`encode expects [${cin},H,W] input, got [${x.shape}]`);
    }
    if (x.shape[1] % 2 !== 0 || x.shape[2] % 2 !== 0) {
      throw new Error("spatial dims must be divisible by the downsampling factor (2)");
    }
    let f = leakyRelu(applyConv(this.encIn, x));
    f = leakyRelu(applyConv(this.encDown, f));
    f = mulSpatial(f, sigmoid(applyConv(this.encSa, f)));
    for (const rb of this.encRbs) f = this.applyRb(rb, f);
    return f;
  }

  /** One forward recurrence step: fa_t = Fa([fi_t, ha_{t-1}]). */
  stepForward(fi: Tensor, hiddenPrev: Tensor): Tensor {
    return this.applyRdb(this.faRdb, applyConv(this.faIn, concatC([fi, hiddenPrev])));
  }

  hiddenForward(fa: Tensor): Tensor {
    return this.applyRb(this.haRb, fa);
  }

  /** One backward recurrence step: fb_t = Fb([fa_t, hb_{t+1}]). */
  stepBackward(fa: Tensor, hiddenNext: Tensor): Tensor {
    return this.applyRdb(this.fbRdb, applyConv(this.fbIn, concatC([fa, hiddenNext])));
  }

  hiddenBackward(fb: Tensor): Tensor {
    return this.applyRb(this.hbRb, fb);
  }

  /**
   * Bidirectional long-term aggregation over the whole segment: the forward
   * recurrence t = 1..S, then the backward one t = S..1. Both initial hidden
   * states are zero.
   */
  aggregateLong(fis: Tensor[]): Tensor[] {
    if (fis.length < 1) throw new Error("aggregateLong needs at least one frame");
    const fas: Tensor[] = [];
    let ha = Tensor.zeros(fis[0].shape);
    for (let t = 0; t < fis.length; t++) {
      const fa = this.stepForward(fis[t], ha);
      fas.push(fa);
      ha = this.hiddenForward(fa);
    }
    const fbs: Tensor[] = new Array(fis.length);
    let hb = Tensor.zeros(fis[0].shape);
    for (let t = fis.length - 1; t >= 0; t--) {
      const fb = this.stepBackward(fas[t], hb);
      fbs[t] = fb;
      hb = this.hiddenBackward(fb);
    }
    return fbs;
  }

  /** Align one neighbor onto the window center via learned-offset sampling. */
  private alignNeighbor(center: Tensor, neighbor: Tensor): Tensor {
    const offsets = applyConv(this.offsetConv, concatC([center, neighbor]));
    return deformConv2d(neighbor, offsets, this.alignConv.w, this.alignConv.b);
  }

  /** 3-frame window fusion with channel attention; edges replicate. */
  aggregateShort(prev: Tensor, center: Tensor, next: Tensor): Tensor {
    for (const n of [prev, next]) {
      if (n.shape.some((d, i) => d !== center.shape[i])) {
        throw new Error("aggregateShort: window features must share shape");
      }
    }
    const cat = concatC([this.alignNeighbor(center, prev), center, this.alignNeighbor(center, next)]);
    const att = sigmoid(applyConv(this.caUp, relu(applyConv(this.caDown, globalAvgPool(cat)))));
    return leakyRelu(applyConv(this.fuse, mulChannel(cat, att)));
  }

  /** Residual decode: y = x_rgb + delta (no clamping inside the graph). */
  decode(fo: Tensor, x: Tensor): Tensor {
    let f = fo;
    for (const rb of this.decRbs) f = this.applyRb(rb, f);
    f = leakyRelu(applyConv(this.decUp, upsample2(f)));
    const delta = applyConv(this.decOut, f);
    return add(sliceC(x, 0, this.config.imageChannels), delta);
  }

  /** Full segment pass: S inputs [C+1,H,W] in, S predictions [C,H,W] out. */
  forward(segment: Tensor[]): Tensor[] {
    const fis = segment.map((x) => this.encode(x));
    const fbs = this.aggregateLong(fis);
    const last = fbs.length - 1;
    return fbs.map((fb, t) => {
      const fo = this.aggregateShort(fbs[Math.max(t - 1, 0)], fb, fbs[Math.min(t + 1, last)]);
      return this.decode(fo, segment[t]);
    });
  }
}
