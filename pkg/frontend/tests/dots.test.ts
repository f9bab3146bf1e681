import { describe, expect, it } from "vitest";

import { DotFieldParams, initDots, stepDots } from "../src/dots.js";
import { makeRng } from "../src/rng.js";

const params: DotFieldParams = {
  nDots: 100,
  coherencePct: 50,
  direction: "right",
  speed: 0.25,
  lifetimeFrames: 12,
  apertureRadius: 0.35,
};

describe("random-dot kinematogram", () => {
  it("spawns the configured coherent fraction", () => {
    const dots = initDots(makeRng(1), params);
    expect(dots).toHaveLength(100);
    expect(dots.filter((d) => d.coherent)).toHaveLength(50);
    expect(dots.every((d) => Math.hypot(d.x, d.y) <= params.apertureRadius)).toBe(true);
  });

  it("moves surviving coherent dots in the signal direction", () => {
    const rng = makeRng(2);
    const dots = initDots(rng, params);
    const next = stepDots(rng, params, dots, 16.7);
    for (let i = 0; i < dots.length; i++) {
      const moved = next[i];
      const was = dots[i];
      if (was.coherent && was.lifeLeft > 1 && moved.lifeLeft === was.lifeLeft - 1) {
        expect(moved.x).toBeGreaterThan(was.x);
        expect(moved.y).toBeCloseTo(was.y, 12);
      }
    }
  });

  it("respawns dots when their limited lifetime expires", () => {
    const rng = makeRng(3);
    let dots = initDots(rng, params);
    const maxLife = params.lifetimeFrames;
    for (let frame = 0; frame < maxLife + 2; frame++) {
      dots = stepDots(rng, params, dots, 16.7);
      expect(dots.every((d) => d.lifeLeft >= 1 && d.lifeLeft <= maxLife)).toBe(true);
    }
    expect(dots.filter((d) => d.coherent)).toHaveLength(50); // fraction preserved
  });

  it("keeps every dot inside the aperture", () => {
    const rng = makeRng(4);
    let dots = initDots(rng, params);
    for (let frame = 0; frame < 60; frame++) {
      dots = stepDots(rng, params, dots, 16.7);
    }
    expect(dots.every((d) => Math.hypot(d.x, d.y) <= params.apertureRadius + 1e-9))
      .toBe(true);
  });
});
