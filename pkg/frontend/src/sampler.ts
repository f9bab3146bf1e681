/**
 * Per-trial pointer sample buffer. Raw frame timestamps are floats; the
 * wire wants integer milliseconds, so times are rounded on export with a
 * monotonicity guard (frame cadence >= ~12 ms keeps rounded stamps strictly
 * increasing; equal stamps collapse to the latest position).
 */

import type { WireSample } from "./schema.js";

export class RawSampleBuffer {
  private t: number[] = [];
  private x: number[] = [];
  private y: number[] = [];

  push(tMs: number, x: number, y: number): void {
    const n = this.t.length;
    if (n > 0 && tMs <= this.t[n - 1]) return; // duplicate frame timestamp
    this.t.push(tMs);
    this.x.push(x);
    this.y.push(y);
  }

  get length(): number {
    return this.t.length;
  }

  last(): { t: number; x: number; y: number } | null {
    const n = this.t.length;
    return n ? { t: this.t[n - 1], x: this.x[n - 1], y: this.y[n - 1] } : null;
  }

  clear(): void {
    this.t = [];
    this.x = [];
    this.y = [];
  }

  /** Median inter-sample interval in ms (timing-health diagnostic). */
  medianInterval(): number | null {
    if (this.t.length < 2) return null;
    const gaps = [];
    for (let i = 1; i < this.t.length; i++) gaps.push(this.t[i] - this.t[i - 1]);
    gaps.sort((a, b) => a - b);
    const mid = Math.floor(gaps.length / 2);
    return gaps.length % 2 ? gaps[mid] : (gaps[mid - 1] + gaps[mid]) / 2;
  }

  toWire(): WireSample[] {
    const out: WireSample[] = [];
    for (let i = 0; i < this.t.length; i++) {
      const t = Math.round(this.t[i]);
      if (out.length && t <= out[out.length - 1][0]) {
        out[out.length - 1] = [out[out.length - 1][0], this.x[i], this.y[i]];
      } else {
        out.push([t, this.x[i], this.y[i]]);
      }
    }
    return out;
  }
}
