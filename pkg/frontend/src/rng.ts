/**
 * Deterministic counter-based randomness (splitmix64), for reproducible
 * weight init and sampling. Mirrors the generator documented in the dataset
 * toolkit so fixtures agree bit-exactly across both packages:
 *
 *   z = (seed + (i + 1) * 0x9E3779B97F4A7C15) mod 2^64
 *   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
 *   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
 *   z = z ^ (z >> 31)
 *
 * Uniform doubles are (z >> 11) * 2^-53.
 */

const MASK = (1n << 64n) - 1n;
const GOLDEN = 0x9e3779b97f4a7c15n;
const MIX1 = 0xbf58476d1ce4e5b9n;
const MIX2 = 0x94d049bb133111ebn;

export function splitmix64(counter: bigint, seed: bigint): bigint {
  let z = (seed + (counter + 1n) * GOLDEN) & MASK;
  z = ((z ^ (z >> 30n)) * MIX1) & MASK;
  z = ((z ^ (z >> 27n)) * MIX2) & MASK;
  return z ^ (z >> 31n);
}

export function unitFloat(counter: bigint, seed: bigint): number {
  return Number(splitmix64(counter, seed) >> 11n) * 2 ** -53;
}

/** Sequential draw stream over the splitmix64 counter. */
export class Rng {
  private counter = 0n;
  private readonly seed: bigint;
  private spare: number | null = null;

  constructor(seed: number | bigint) {
    this.seed = BigInt(seed) & MASK;
  }

  uniform(): number {
    return unitFloat(this.counter++, this.seed);
  }

  /** Standard normal via Box-Muller. */
  normal(): number {
    if (this.spare !== null) {
      const v = this.spare;
      this.spare = null;
      return v;
    }
    let u1 = this.uniform();
    while (u1 === 0) u1 = this.uniform();
    const u2 = this.uniform();
    const r = Math.sqrt(-2 * Math.log(u1));
    this.spare = r * Math.sin(2 * Math.PI * u2);
    return r * Math.cos(2 * Math.PI * u2);
  }

  int(maxExclusive: number): number {
    return Math.floor(this.uniform() * maxExclusive);
  }
}
