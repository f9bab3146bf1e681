/**
 * Random-dot kinematogram model with a limited-lifetime algorithm: a
 * coherent fraction translates left/right, the rest take random-direction
 * steps, and every dot respawns at a random location when its lifetime
 * expires (or when it exits the aperture). Pure state-transition functions
 * so the stimulus is testable without a canvas.
 */

import type { Rng } from "./rng.js";

export interface Dot {
  x: number;
  y: number;
  coherent: boolean;
  heading: number; // radians; coherent dots get 0 or pi
  lifeLeft: number;
}

export interface DotFieldParams {
  nDots: number;
  coherencePct: number;
  direction: "left" | "right";
  speed: number;          // units per second
  lifetimeFrames: number;
  apertureRadius: number;
}

function spawn(rng: Rng, p: DotFieldParams, coherent: boolean): Dot {
  const r = p.apertureRadius * Math.sqrt(rng());
  const theta = 2 * Math.PI * rng();
  return {
    x: r * Math.cos(theta),
    y: r * Math.sin(theta),
    coherent,
    heading: coherent ? (p.direction === "right" ? 0 : Math.PI) : 2 * Math.PI * rng(),
    lifeLeft: 1 + Math.floor(rng() * p.lifetimeFrames),
  };
}

export function initDots(rng: Rng, p: DotFieldParams): Dot[] {
  const nCoherent = Math.round((p.coherencePct / 100) * p.nDots);
  const dots: Dot[] = [];
  for (let i = 0; i < p.nDots; i++) dots.push(spawn(rng, p, i < nCoherent));
  return dots;
}

export function stepDots(rng: Rng, p: DotFieldParams, dots: Dot[],
                         dtMs: number): Dot[] {
  const step = p.speed * (dtMs / 1000);
  return dots.map((dot) => {
    if (dot.lifeLeft <= 1) return spawn(rng, p, dot.coherent);
    const x = dot.x + step * Math.cos(dot.heading);
    const y = dot.y + step * Math.sin(dot.heading);
    if (Math.hypot(x, y) > p.apertureRadius) return spawn(rng, p, dot.coherent);
    return { ...dot, x, y, lifeLeft: dot.lifeLeft - 1 };
  });
}
