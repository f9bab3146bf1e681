/**
 * Headless test double for the runner ports: a virtual 60 Hz display clock
 * with seeded frame jitter, a scripted participant that reaches for the
 * correct button along a minimum-jerk path (and freezes when a stop tone
 * lands before movement onset), and a sample-accurate virtual audio clock.
 */

import { BUTTONS, START_POSITION } from "../src/config.js";
import type {
  ClickEvent,
  PointerState,
  RunnerEnv,
  Scene,
  SliderResult,
  ToneHandle,
} from "../src/env.js";
import type { TrialPlan } from "../src/planner.js";
import { makeRng, Rng } from "../src/rng.js";

interface ScheduledTone {
  at: number;
  actual: number;
  canceled: boolean;
}

export interface ScriptedOptions {
  seed?: number;
  framePeriodMs?: number;
  frameJitterMs?: number;
  audioJitterMs?: number;
  audioAvailable?: boolean;
  rtRange?: [number, number];
  sliders?: SliderResult;
  /** Choose larger_later with this probability on DDT trials. */
  pLargerLater?: number;
}

export class ScriptedEnv implements RunnerEnv {
  private t = 5000; // arbitrary nonzero epoch
  private readonly rng: Rng;
  private readonly opt: Required<ScriptedOptions>;
  private pointerPos: PointerState = { x: 0, y: 0 };
  private clicks: ClickEvent[] = [];
  private tones: ScheduledTone[] = [];

  // current-trial participant state
  private plan: TrialPlan | null = null;
  private t0 = 0;
  private rt = 0;
  private onset = 0;
  private target: readonly [number, number] = BUTTONS.right;
  private clicked = false;
  private frozen = false;
  private startJitter: [number, number] = [0, 0];

  renderedScenes = 0;

  constructor(options: ScriptedOptions = {}) {
    this.opt = {
      seed: 77,
      framePeriodMs: 1000 / 60,
      frameJitterMs: 0.6,
      audioJitterMs: 2.0,
      audioAvailable: true,
      rtRange: [520, 1400],
      sliders: { valence: 0.5, arousal: 0.5, touched: false },
      pLargerLater: 0.6,
      ...options,
    };
    this.rng = makeRng(this.opt.seed);
  }

  /** Wire this to the engine's onTrialStart hook. */
  setPlan(plan: TrialPlan): void {
    this.plan = plan;
    this.clicked = false;
    this.frozen = false;
    const [lo, hi] = this.opt.rtRange;
    this.rt = lo + (hi - lo) * this.rng();
    this.onset = 0.25 * this.rt;
    if (plan.task === "sst") {
      this.target = BUTTONS[plan.direction];
    } else {
      const wantLl = this.rng() < this.opt.pLargerLater;
      this.target = BUTTONS[wantLl ? plan.llSide
                                   : (plan.llSide === "left" ? "right" : "left")];
    }
    this.startJitter = [
      (this.rng() - 0.5) * 0.008,
      (this.rng() - 0.5) * 0.008,
    ];
  }

  now(): number {
    return this.t;
  }

  async nextFrame(): Promise<number> {
    this.t += this.opt.framePeriodMs + (this.rng() - 0.5) * 2 * this.opt.frameJitterMs;
    this.tickParticipant();
    return this.t;
  }

  private toneHeardBy(timeMs: number): boolean {
    return this.tones.some((tone) => !tone.canceled && tone.actual <= timeMs);
  }

  private tickParticipant(): void {
    if (!this.plan || this.clicked || this.frozen) return;
    const t = this.t - this.t0;
    if (this.plan.task === "sst" && this.plan.kind === "stop"
        && this.toneHeardBy(this.t0 + this.onset)) {
      this.frozen = true; // signal arrived before the reach started
      return;
    }
    if (t < this.onset) return;
    const tau = Math.min(1, (t - this.onset) / (this.rt - this.onset));
    const s = tau * tau * tau * (10 - 15 * tau + 6 * tau * tau);
    const [sx, sy] = [START_POSITION[0] + this.startJitter[0],
                      START_POSITION[1] + this.startJitter[1]];
    const [ex, ey] = this.target;
    const chordX = ex - sx;
    const chordY = ey - sy;
    const len = Math.hypot(chordX, chordY);
    const bump = 0.08 * Math.sin(Math.PI * s);
    this.pointerPos = {
      x: sx + chordX * s + (-chordY / len) * bump,
      y: sy + chordY * s + (chordX / len) * bump,
    };
    if (tau >= 1 && !this.clicked) {
      this.clicked = true;
      this.pointerPos = { x: ex, y: ey };
      this.clicks.push({ x: ex, y: ey, tMs: this.t0 + this.rt });
    }
  }

  pointer(): PointerState {
    return { ...this.pointerPos };
  }

  takeClick(): ClickEvent | null {
    return this.clicks.shift() ?? null;
  }

  async awaitStartClick(): Promise<void> {
    this.t += 120; // inter-trial gap while the participant finds the button
    this.pointerPos = {
      x: START_POSITION[0] + this.startJitter[0],
      y: START_POSITION[1] + this.startJitter[1],
    };
    this.clicks = [];
    this.tones = [];
    this.t0 = this.t;
  }

  audioAvailable(): boolean {
    return this.opt.audioAvailable;
  }

  scheduleTone(atMs: number): ToneHandle {
    const tone: ScheduledTone = {
      at: atMs,
      actual: atMs + (this.rng() - 0.5) * 2 * this.opt.audioJitterMs,
      canceled: false,
    };
    this.tones.push(tone);
    return {
      actualStartMs: () => (tone.canceled ? null : tone.actual),
      cancel: () => {
        if (this.t < tone.actual) tone.canceled = true;
      },
    };
  }

  render(_scene: Scene): void {
    this.renderedScenes += 1;
  }

  async runSliders(): Promise<SliderResult> {
    return { ...this.opt.sliders };
  }
}
