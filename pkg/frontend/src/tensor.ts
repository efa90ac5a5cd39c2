/**
 * Minimal reverse-mode autodiff over float64 tensors.
 *
 * Feature maps use CHW layout; scalars have shape []. JS numbers are IEEE-754
 * doubles, so every op here is double precision end to end, which is what the
 * finite-difference gradient checks rely on.
 */

export type BackwardFn = (gout: Float64Array) => void;

let nextId = 0;

export class Tensor {
  readonly id: number;
  readonly data: Float64Array;
  readonly shape: number[];
  grad: Float64Array | null = null;
  parents: Tensor[] = [];
  backwardFn: BackwardFn | null = null;
  requiresGrad: boolean;

  constructor(data: Float64Array, shape: number[], requiresGrad = false) {
    if (data.length !== shape.reduce((a, b) => a * b, 1)) {
      throw new Error(`data length ${data.length} does not match shape [${shape}]`);
    }
    this.id = nextId++;
    this.data = data;
    this.shape = shape;
    this.requiresGrad = requiresGrad;
  }

  static zeros(shape: number[], requiresGrad = false): Tensor {
    return new Tensor(new Float64Array(shape.reduce((a, b) => a * b, 1)), shape, requiresGrad);
  }

  static scalar(value: number): Tensor {
    return new Tensor(Float64Array.of(value), []);
  }

  get size(): number {
    return this.data.length;
  }

  item(): number {
    if (this.size !== 1) throw new Error("item() requires a single-element tensor");
    return this.data[0];
  }

  ensureGrad(): Float64Array {
    if (this.grad === null) this.grad = new Float64Array(this.size);
    return this.grad;
  }

  zeroGrad(): void {
    if (this.grad !== null) this.grad.fill(0);
  }

  /** Reverse-mode sweep from this (scalar) tensor. */
  backward(): void {
    if (this.size !== 1) throw new Error("backward() starts from a scalar loss");
    const order: Tensor[] = [];
    const seen = new Set<number>();
    const stack: Array<[Tensor, boolean]> = [[this, false]];
    while (stack.length > 0) {
      const [node, expanded] = stack.pop()!;
      if (expanded) {
        order.push(node);
        continue;
      }
      if (seen.has(node.id)) continue;
      seen.add(node.id);
      stack.push([node, true]);
      for (const p of node.parents) {
        if (p.requiresGrad && !seen.has(p.id)) stack.push([p, false]);
      }
    }
    this.ensureGrad()[0] = 1.0;
    for (let i = order.length - 1; i >= 0; i--) {
      const node = order[i];
      if (node.backwardFn !== null && node.grad !== null) {
        node.backwardFn(node.grad);
      }
    }
  }
}

function track(out: Tensor, parents: Tensor[], backwardFn: BackwardFn): Tensor {
  out.requiresGrad = parents.some((p) => p.requiresGrad);
  if (out.requiresGrad) {
    out.parents = parents;
    out.backwardFn = backwardFn;
  }
  return out;
}

function sameShape(a: Tensor, b: Tensor): void {
  if (a.shape.length !== b.shape.length || a.shape.some((d, i) => d !== b.shape[i])) {
    throw new Error(`shape mismatch: [${a.shape}] vs [${b.shape}]`);
  }
}

// ---- elementwise ----

export function add(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b);
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] + b.data[i];
  return track(out, [a, b], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] += g[i];
    }
  });
}

export function sub(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b);
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] - b.data[i];
  return track(out, [a, b], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] -= g[i];
    }
  });
}

export function mul(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b);
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] * b.data[i];
  return track(out, [a, b], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i] * b.data[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] += g[i] * a.data[i];
    }
  });
}

export function div(a: Tensor, b: Tensor): Tensor {
  sameShape(a, b);
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] / b.data[i];
  return track(out, [a, b], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let i = 0; i < g.length; i++) ga[i] += g[i] / b.data[i];
    }
    if (b.requiresGrad) {
      const gb = b.ensureGrad();
      for (let i = 0; i < g.length; i++) gb[i] -= (g[i] * a.data[i]) / (b.data[i] * b.data[i]);
    }
  });
}

export function scale(a: Tensor, s: number): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] * s;
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i] * s;
  });
}

export function addScalar(a: Tensor, s: number): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] + s;
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += g[i];
  });
}

export function relu(a: Tensor): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] > 0 ? a.data[i] : 0;
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) if (a.data[i] > 0) ga[i] += g[i];
  });
}

export function leakyRelu(a: Tensor, alpha = 0.1): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = a.data[i] > 0 ? a.data[i] : alpha * a.data[i];
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += a.data[i] > 0 ? g[i] : alpha * g[i];
  });
}

export function sigmoid(a: Tensor): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = 1 / (1 + Math.exp(-a.data[i]));
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) {
      const y = out.data[i];
      ga[i] += g[i] * y * (1 - y);
    }
  });
}

export function abs(a: Tensor): Tensor {
  const out = Tensor.zeros(a.shape);
  for (let i = 0; i < a.size; i++) out.data[i] = Math.abs(a.data[i]);
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let i = 0; i < g.length; i++) ga[i] += a.data[i] >= 0 ? g[i] : -g[i];
  });
}

export function mean(a: Tensor): Tensor {
  let s = 0;
  for (let i = 0; i < a.size; i++) s += a.data[i];
  const out = new Tensor(Float64Array.of(s / a.size), []);
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    const gs = g[0] / a.size;
    for (let i = 0; i < a.size; i++) ga[i] += gs;
  });
}

// ---- shape ops (CHW) ----

function chw(t: Tensor): [number, number, number] {
  if (t.shape.length !== 3) throw new Error(`expected CHW tensor, got shape [${t.shape}]`);
  return [t.shape[0], t.shape[1], t.shape[2]];
}

export function concatC(tensors: Tensor[]): Tensor {
  const [, h, w] = chw(tensors[0]);
  let cTotal = 0;
  for (const t of tensors) {
    const [c, th, tw] = chw(t);
    if (th !== h || tw !== w) throw new Error("concatC: spatial dims differ");
    cTotal += c;
  }
  const out = Tensor.zeros([cTotal, h, w]);
  let offset = 0;
  for (const t of tensors) {
    out.data.set(t.data, offset);
    offset += t.size;
  }
  return track(out, tensors, (g) => {
    let off = 0;
    for (const t of tensors) {
      if (t.requiresGrad) {
        const gt = t.ensureGrad();
        for (let i = 0; i < t.size; i++) gt[i] += g[off + i];
      }
      off += t.size;
    }
  });
}

export function sliceC(a: Tensor, start: number, count: number): Tensor {
  const [c, h, w] = chw(a);
  if (start < 0 || start + count > c) throw new Error("sliceC out of range");
  const plane = h * w;
  const out = Tensor.zeros([count, h, w]);
  out.data.set(a.data.subarray(start * plane, (start + count) * plane));
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    const off = start * plane;
    for (let i = 0; i < g.length; i++) ga[off + i] += g[i];
  });
}

export function globalAvgPool(a: Tensor): Tensor {
  const [c, h, w] = chw(a);
  const plane = h * w;
  const out = Tensor.zeros([c, 1, 1]);
  for (let ch = 0; ch < c; ch++) {
    let s = 0;
    const base = ch * plane;
    for (let i = 0; i < plane; i++) s += a.data[base + i];
    out.data[ch] = s / plane;
  }
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let ch = 0; ch < c; ch++) {
      const gs = g[ch] / plane;
      const base = ch * plane;
      for (let i = 0; i < plane; i++) ga[base + i] += gs;
    }
  });
}

/** Multiply each channel plane by a per-channel scalar ([C,1,1]). */
export function mulChannel(a: Tensor, s: Tensor): Tensor {
  const [c, h, w] = chw(a);
  if (s.shape[0] !== c || s.size !== c) throw new Error("mulChannel: scale must be [C,1,1]");
  const plane = h * w;
  const out = Tensor.zeros(a.shape);
  for (let ch = 0; ch < c; ch++) {
    const k = s.data[ch];
    const base = ch * plane;
    for (let i = 0; i < plane; i++) out.data[base + i] = a.data[base + i] * k;
  }
  return track(out, [a, s], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let ch = 0; ch < c; ch++) {
        const k = s.data[ch];
        const base = ch * plane;
        for (let i = 0; i < plane; i++) ga[base + i] += g[base + i] * k;
      }
    }
    if (s.requiresGrad) {
      const gs = s.ensureGrad();
      for (let ch = 0; ch < c; ch++) {
        let acc = 0;
        const base = ch * plane;
        for (let i = 0; i < plane; i++) acc += g[base + i] * a.data[base + i];
        gs[ch] += acc;
      }
    }
  });
}

/** Multiply every channel by a single spatial map ([1,H,W]). */
export function mulSpatial(a: Tensor, m: Tensor): Tensor {
  const [c, h, w] = chw(a);
  const [mc, mh, mw] = chw(m);
  if (mc !== 1 || mh !== h || mw !== w) throw new Error("mulSpatial: map must be [1,H,W]");
  const plane = h * w;
  const out = Tensor.zeros(a.shape);
  for (let ch = 0; ch < c; ch++) {
    const base = ch * plane;
    for (let i = 0; i < plane; i++) out.data[base + i] = a.data[base + i] * m.data[i];
  }
  return track(out, [a, m], (g) => {
    if (a.requiresGrad) {
      const ga = a.ensureGrad();
      for (let ch = 0; ch < c; ch++) {
        const base = ch * plane;
        for (let i = 0; i < plane; i++) ga[base + i] += g[base + i] * m.data[i];
      }
    }
    if (m.requiresGrad) {
      const gm = m.ensureGrad();
      for (let ch = 0; ch < c; ch++) {
        const base = ch * plane;
        for (let i = 0; i < plane; i++) gm[i] += g[base + i] * a.data[base + i];
      }
    }
  });
}

export function upsample2(a: Tensor): Tensor {
  const [c, h, w] = chw(a);
  const out = Tensor.zeros([c, h * 2, w * 2]);
  for (let ch = 0; ch < c; ch++) {
    for (let y = 0; y < h; y++) {
      for (let x = 0; x < w; x++) {
        const v = a.data[(ch * h + y) * w + x];
        const base = (ch * h * 2 + y * 2) * w * 2 + x * 2;
        out.data[base] = v;
        out.data[base + 1] = v;
        out.data[base + w * 2] = v;
        out.data[base + w * 2 + 1] = v;
      }
    }
  }
  return track(out, [a], (g) => {
    if (!a.requiresGrad) return;
    const ga = a.ensureGrad();
    for (let ch = 0; ch < c; ch++) {
      for (let y = 0; y < h; y++) {
        for (let x = 0; x < w; x++) {
          const base = (ch * h * 2 + y * 2) * w * 2 + x * 2;
          ga[(ch * h + y) * w + x] +=
            g[base] + g[base + 1] + g[base + w * 2] + g[base + w * 2 + 1];
        }
      }
    }
  });
}

// ---- convolution ----

export interface ConvOpts {
  stride?: number;
  pad?: number;
}

/**
 * 3x3/stride-1/pad-1 forward fast path: unchecked 9-tap accumulation over
 * interior pixels, checked loop only on the one-pixel border.
 */
function convForward3x3(
  xd: Float64Array,
  wd_: Float64Array,
  od: Float64Array,
  cin: number,
  cout: number,
  h: number,
  w: number,
): void {
  const plane = h * w;
  for (let oc = 0; oc < cout; oc++) {
    const oBase = oc * plane;
    for (let ic = 0; ic < cin; ic++) {
      const xBase = ic * plane;
      const wb = (oc * cin + ic) * 9;
      const w00 = wd_[wb], w01 = wd_[wb + 1], w02 = wd_[wb + 2];
      const w10 = wd_[wb + 3], w11 = wd_[wb + 4], w12 = wd_[wb + 5];
      const w20 = wd_[wb + 6], w21 = wd_[wb + 7], w22 = wd_[wb + 8];
      for (let y = 1; y < h - 1; y++) {
        const r0 = xBase + (y - 1) * w;
        const r1 = r0 + w;
        const r2 = r1 + w;
        const o = oBase + y * w;
        for (let x = 1; x < w - 1; x++) {
          od[o + x] +=
            w00 * xd[r0 + x - 1] + w01 * xd[r0 + x] + w02 * xd[r0 + x + 1] +
            w10 * xd[r1 + x - 1] + w11 * xd[r1 + x] + w12 * xd[r1 + x + 1] +
            w20 * xd[r2 + x - 1] + w21 * xd[r2 + x] + w22 * xd[r2 + x + 1];
        }
      }
      // border: checked taps
      for (let y = 0; y < h; y++) {
        const xStep = y === 0 || y === h - 1 ? 1 : Math.max(1, w - 1);
        for (let x = 0; x < w; x += xStep) {
          let acc = 0;
          for (let ky = 0; ky < 3; ky++) {
            const iy = y - 1 + ky;
            if (iy < 0 || iy >= h) continue;
            for (let kx = 0; kx < 3; kx++) {
              const ix = x - 1 + kx;
              if (ix < 0 || ix >= w) continue;
              acc += wd_[wb + ky * 3 + kx] * xd[xBase + iy * w + ix];
            }
          }
          od[oBase + y * w + x] += acc;
        }
      }
    }
  }
}

/** Matching backward fast path; accumulates gx and gw (either may be null). */
function convBackward3x3(
  xd: Float64Array,
  wd_: Float64Array,
  g: Float64Array,
  gx: Float64Array | null,
  gw: Float64Array | null,
  cin: number,
  cout: number,
  h: number,
  w: number,
): void {
  const plane = h * w;
  for (let oc = 0; oc < cout; oc++) {
    const gBase = oc * plane;
    for (let ic = 0; ic < cin; ic++) {
      const xBase = ic * plane;
      const wb = (oc * cin + ic) * 9;
      if (gx !== null) {
        const w00 = wd_[wb], w01 = wd_[wb + 1], w02 = wd_[wb + 2];
        const w10 = wd_[wb + 3], w11 = wd_[wb + 4], w12 = wd_[wb + 5];
        const w20 = wd_[wb + 6], w21 = wd_[wb + 7], w22 = wd_[wb + 8];
        // gx = full correlation of g with the rotated kernel; interior unchecked
        for (let y = 1; y < h - 1; y++) {
          const r0 = gBase + (y - 1) * w;
          const r1 = r0 + w;
          const r2 = r1 + w;
          const o = xBase + y * w;
          for (let x = 1; x < w - 1; x++) {
            gx[o + x] +=
              w22 * g[r0 + x - 1] + w21 * g[r0 + x] + w20 * g[r0 + x + 1] +
              w12 * g[r1 + x - 1] + w11 * g[r1 + x] + w10 * g[r1 + x + 1] +
              w02 * g[r2 + x - 1] + w01 * g[r2 + x] + w00 * g[r2 + x + 1];
          }
        }
        for (let y = 0; y < h; y++) {
          const xStep = y === 0 || y === h - 1 ? 1 : Math.max(1, w - 1);
          for (let x = 0; x < w; x += xStep) {
            let acc = 0;
            for (let ky = 0; ky < 3; ky++) {
              const oy = y + 1 - ky;
              if (oy < 0 || oy >= h) continue;
              for (let kx = 0; kx < 3; kx++) {
                const ox = x + 1 - kx;
                if (ox < 0 || ox >= w) continue;
                acc += wd_[wb + ky * 3 + kx] * g[gBase + oy * w + ox];
              }
            }
            gx[xBase + y * w + x] += acc;
          }
        }
      }
      if (gw !== null) {
        // nine independent dot products between g and shifted x
        for (let ky = 0; ky < 3; ky++) {
          for (let kx = 0; kx < 3; kx++) {
            const dy = ky - 1;
            const dx = kx - 1;
            let acc = 0;
            const y0 = Math.max(0, -dy);
            const y1 = Math.min(h, h - dy);
            const x0 = Math.max(0, -dx);
            const x1 = Math.min(w, w - dx);
            for (let y = y0; y < y1; y++) {
              const gRow = gBase + y * w;
              const xRow = xBase + (y + dy) * w + dx;
              for (let x = x0; x < x1; x++) {
                acc += g[gRow + x] * xd[xRow + x];
              }
            }
            gw[wb + ky * 3 + kx] += acc;
          }
        }
      }
    }
  }
}

/** 2-D convolution (cross-correlation), zero padding, CHW in/out. */
export function conv2d(x: Tensor, w: Tensor, b: Tensor | null, opts: ConvOpts = {}): Tensor {
  const stride = opts.stride ?? 1;
  const pad = opts.pad ?? Math.floor(w.shape[2] / 2);
  const [cin, h, wd] = chw(x);
  const [cout, wcin, kh, kw] = [w.shape[0], w.shape[1], w.shape[2], w.shape[3]];
  if (wcin !== cin) throw new Error(`conv2d: weight expects ${wcin} channels, input has ${cin}`);
  const oh = Math.floor((h + 2 * pad - kh) / stride) + 1;
  const ow = Math.floor((wd + 2 * pad - kw) / stride) + 1;
  if (oh < 1 || ow < 1) throw new Error("conv2d: output would be empty");
  const out = Tensor.zeros([cout, oh, ow]);
  const fast = kh === 3 && kw === 3 && stride === 1 && pad === 1;

  if (fast) {
    if (b !== null) {
      for (let oc = 0; oc < cout; oc++) out.data.fill(b.data[oc], oc * oh * ow, (oc + 1) * oh * ow);
    }
    convForward3x3(x.data, w.data, out.data, cin, cout, h, wd);
  } else {
    for (let oc = 0; oc < cout; oc++) {
      const bias = b === null ? 0 : b.data[oc];
      for (let oy = 0; oy < oh; oy++) {
        for (let ox = 0; ox < ow; ox++) {
          let acc = bias;
          const iy0 = oy * stride - pad;
          const ix0 = ox * stride - pad;
          for (let ic = 0; ic < cin; ic++) {
            const xBase = ic * h * wd;
            const wBase = ((oc * cin + ic) * kh) * kw;
            for (let ky = 0; ky < kh; ky++) {
              const iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              const rowBase = xBase + iy * wd;
              const wRow = wBase + ky * kw;
              for (let kx = 0; kx < kw; kx++) {
                const ix = ix0 + kx;
                if (ix < 0 || ix >= wd) continue;
                acc += w.data[wRow + kx] * x.data[rowBase + ix];
              }
            }
          }
          out.data[(oc * oh + oy) * ow + ox] = acc;
        }
      }
    }
  }

  const parents = b === null ? [x, w] : [x, w, b];
  return track(out, parents, (g) => {
    const gx = x.requiresGrad ? x.ensureGrad() : null;
    const gw = w.requiresGrad ? w.ensureGrad() : null;
    const gb = b !== null && b.requiresGrad ? b.ensureGrad() : null;
    if (gb !== null) {
      for (let oc = 0; oc < cout; oc++) {
        let acc = 0;
        const base = oc * oh * ow;
        for (let i = 0; i < oh * ow; i++) acc += g[base + i];
        gb[oc] += acc;
      }
    }
    if (gx === null && gw === null) return;
    if (fast) {
      convBackward3x3(x.data, w.data, g, gx, gw, cin, cout, h, wd);
      return;
    }
    for (let oc = 0; oc < cout; oc++) {
      for (let oy = 0; oy < oh; oy++) {
        for (let ox = 0; ox < ow; ox++) {
          const go = g[(oc * oh + oy) * ow + ox];
          if (go === 0) continue;
          const iy0 = oy * stride - pad;
          const ix0 = ox * stride - pad;
          for (let ic = 0; ic < cin; ic++) {
            const xBase = ic * h * wd;
            const wBase = ((oc * cin + ic) * kh) * kw;
            for (let ky = 0; ky < kh; ky++) {
              const iy = iy0 + ky;
              if (iy < 0 || iy >= h) continue;
              const rowBase = xBase + iy * wd;
              const wRow = wBase + ky * kw;
              for (let kx = 0; kx < kw; kx++) {
                const ix = ix0 + kx;
                if (ix < 0 || ix >= wd) continue;
                if (gw !== null) gw[wRow + kx] += go * x.data[rowBase + ix];
                if (gx !== null) gx[rowBase + ix] += go * w.data[wRow + kx];
              }
            }
          }
        }
      }
    }
  });
}

/**
 * Deformable 3x3-style convolution: each kernel tap samples the input at its
 * integer position plus a learned per-pixel offset, bilinearly, zeros outside.
 * `offsets` is [2*kh*kw, H, W]: channels (2k, 2k+1) hold (dy, dx) of tap k.
 * With all offsets zero this reduces exactly to conv2d (same pad, stride 1).
 */
export function deformConv2d(x: Tensor, offsets: Tensor, w: Tensor, b: Tensor | null): Tensor {
  const [cin, h, wd] = chw(x);
  const [cout, wcin, kh, kw] = [w.shape[0], w.shape[1], w.shape[2], w.shape[3]];
  if (wcin !== cin) throw new Error("deformConv2d: channel mismatch");
  const k = kh * kw;
  const [oc2, oh, ow] = chw(offsets);
  if (oc2 !== 2 * k || oh !== h || ow !== wd) {
    throw new Error(`deformConv2d: offsets must be [${2 * k},${h},${wd}], got [${offsets.shape}]`);
  }
  const pad = Math.floor(kh / 2);
  const plane = h * wd;
  const out = Tensor.zeros([cout, h, wd]);
  const xd = x.data;

  for (let oy = 0; oy < h; oy++) {
    for (let ox = 0; ox < wd; ox++) {
      const pix = oy * wd + ox;
      for (let tap = 0; tap < k; tap++) {
        const ky = Math.floor(tap / kw);
        const kx = tap % kw;
        const py = oy - pad + ky + offsets.data[2 * tap * plane + pix];
        const px = ox - pad + kx + offsets.data[(2 * tap + 1) * plane + pix];
        const y0 = Math.floor(py);
        const x0 = Math.floor(px);
        const fy = py - y0;
        const fx = px - x0;
        const inY0 = y0 >= 0 && y0 < h;
        const inY1 = y0 + 1 >= 0 && y0 + 1 < h;
        const inX0 = x0 >= 0 && x0 < wd;
        const inX1 = x0 + 1 >= 0 && x0 + 1 < wd;
        if (!inY0 && !inY1) continue;
        const w00 = (1 - fy) * (1 - fx);
        const w01 = (1 - fy) * fx;
        const w10 = fy * (1 - fx);
        const w11 = fy * fx;
        const r0 = y0 * wd + x0;
        for (let ic = 0; ic < cin; ic++) {
          const base = ic * plane + r0;
          let v = 0;
          if (inY0 && inX0) v += w00 * xd[base];
          if (inY0 && inX1) v += w01 * xd[base + 1];
          if (inY1 && inX0) v += w10 * xd[base + wd];
          if (inY1 && inX1) v += w11 * xd[base + wd + 1];
          if (v === 0) continue;
          for (let oc = 0; oc < cout; oc++) {
            out.data[oc * plane + pix] += w.data[((oc * cin + ic) * kh + ky) * kw + kx] * v;
          }
        }
      }
      if (b !== null) {
        for (let oc = 0; oc < cout; oc++) out.data[oc * plane + pix] += b.data[oc];
      }
    }
  }

  const parents = b === null ? [x, offsets, w] : [x, offsets, w, b];
  return track(out, parents, (g) => {
    const gx = x.requiresGrad ? x.ensureGrad() : null;
    const goff = offsets.requiresGrad ? offsets.ensureGrad() : null;
    const gw = w.requiresGrad ? w.ensureGrad() : null;
    const gb = b !== null && b.requiresGrad ? b.ensureGrad() : null;

    for (let oy = 0; oy < h; oy++) {
      for (let ox = 0; ox < wd; ox++) {
        const pix = oy * wd + ox;
        if (gb !== null) {
          for (let oc = 0; oc < cout; oc++) gb[oc] += g[oc * plane + pix];
        }
        for (let tap = 0; tap < k; tap++) {
          const ky = Math.floor(tap / kw);
          const kx = tap % kw;
          const py = oy - pad + ky + offsets.data[2 * tap * plane + pix];
          const px = ox - pad + kx + offsets.data[(2 * tap + 1) * plane + pix];
          const y0 = Math.floor(py);
          const x0 = Math.floor(px);
          const fy = py - y0;
          const fx = px - x0;
          for (let ic = 0; ic < cin; ic++) {
            // chain through every output channel using this tap/input channel
            let gv = 0;
            for (let oc = 0; oc < cout; oc++) {
              gv += g[oc * plane + pix] * w.data[((oc * cin + ic) * kh + ky) * kw + kx];
            }
            const base = ic * plane;
            // corner values (zero outside) for value + offset gradients
            const inY0 = y0 >= 0 && y0 < h;
            const inY1 = y0 + 1 >= 0 && y0 + 1 < h;
            const inX0 = x0 >= 0 && x0 < wd;
            const inX1 = x0 + 1 >= 0 && x0 + 1 < wd;
            const v00 = inY0 && inX0 ? x.data[base + y0 * wd + x0] : 0;
            const v01 = inY0 && inX1 ? x.data[base + y0 * wd + x0 + 1] : 0;
            const v10 = inY1 && inX0 ? x.data[base + (y0 + 1) * wd + x0] : 0;
            const v11 = inY1 && inX1 ? x.data[base + (y0 + 1) * wd + x0 + 1] : 0;
            const v = (1 - fy) * ((1 - fx) * v00 + fx * v01) + fy * ((1 - fx) * v10 + fx * v11);

            if (gw !== null) {
              for (let oc = 0; oc < cout; oc++) {
                gw[((oc * cin + ic) * kh + ky) * kw + kx] += g[oc * plane + pix] * v;
              }
            }
            if (gv !== 0 && gx !== null) {
              if (inY0 && inX0) gx[base + y0 * wd + x0] += gv * (1 - fy) * (1 - fx);
              if (inY0 && inX1) gx[base + y0 * wd + x0 + 1] += gv * (1 - fy) * fx;
              if (inY1 && inX0) gx[base + (y0 + 1) * wd + x0] += gv * fy * (1 - fx);
              if (inY1 && inX1) gx[base + (y0 + 1) * wd + x0 + 1] += gv * fy * fx;
            }
            if (gv !== 0 && goff !== null) {
              const dvdy = (1 - fx) * (v10 - v00) + fx * (v11 - v01);
              const dvdx = (1 - fy) * (v01 - v00) + fy * (v11 - v10);
              goff[2 * tap * plane + pix] += gv * dvdy;
              goff[(2 * tap + 1) * plane + pix] += gv * dvdx;
            }
          }
        }
      }
    }
  });
}
