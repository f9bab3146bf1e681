/**
 * Trial and session state machines.
 *
 * One SST trial: start-button gate, then frame loop sampling the pointer,
 * animating the dot field, and (on stop trials) scheduling the tone on the
 * audio clock at trial-onset + SSD. Recording ends at the response click or
 * the response window, whichever comes first. DDT trials render the two
 * offers on randomized sides and record the choice.
 *
 * The emitted log is validated against the shared wire schema before it is
 * handed to the caller; telemetry carries runner-health numbers (start-gate
 * distance, sampling cadence, tone delivery error) that never touch the wire.
 */

import { BUTTONS, START_POSITION, RunConfig } from "./config.js";
import { DotFieldParams, initDots, stepDots } from "./dots.js";
import {
  AudioUnavailableError,
  RunnerEnv,
  ToneHandle,
} from "./env.js";
import { DdtPlan, SstPlan, TrialPlan, buildSessionPlan } from "./planner.js";
import { makeRng, Rng } from "./rng.js";
import { RawSampleBuffer } from "./sampler.js";
import { WireSessionLog, WireTrial, validateSessionLog } from "./schema.js";

const BUTTON_HIT_RADIUS = 0.14;

export interface TrialTelemetry {
  index: number;
  task: "sst" | "ddt";
  startGateDistance: number;
  medianIntervalMs: number | null;
  toneScheduledMs?: number;
  toneActualMs?: number | null;
  toneErrorMs?: number | null;
}

export interface SessionResult {
  log: WireSessionLog;
  telemetry: TrialTelemetry[];
}

export interface EngineHooks {
  onTrialStart?(plan: TrialPlan): void;
  onTrialEnd?(trial: WireTrial): void;
}

function hitButton(x: number, y: number): "left" | "right" | null {
  for (const side of ["left", "right"] as const) {
    const [bx, by] = BUTTONS[side];
    if (Math.hypot(x - bx, y - by) <= BUTTON_HIT_RADIUS) return side;
  }
  return null;
}

export class SessionRunner {
  private readonly cfg: RunConfig;
  private readonly env: RunnerEnv;
  private readonly hooks: EngineHooks;
  private readonly dotRng: Rng;

  constructor(cfg: RunConfig, env: RunnerEnv, hooks: EngineHooks = {}) {
    this.cfg = cfg;
    this.env = env;
    this.hooks = hooks;
    this.dotRng = makeRng(cfg.seed ^ 0x5eed);
  }

  async run(): Promise<SessionResult> {
    const plans = buildSessionPlan(this.cfg);
    const trials: WireTrial[] = [];
    const telemetry: TrialTelemetry[] = [];

    let lastBlock = -1;
    for (const plan of plans) {
      if (plan.block !== lastBlock) {
        this.checkBlockPreconditions(plan);
        lastBlock = plan.block;
      }
      this.hooks.onTrialStart?.(plan);
      const { trial, tele } = plan.task === "sst"
        ? await this.runSstTrial(plan)
        : await this.runDdtTrial(plan);
      if (this.cfg.affectiveSliders) {
        const s = await this.env.runSliders();
        trial.valence = s.valence;
        trial.arousal = s.arousal;
        trial.slider_touched = s.touched;
      }
      this.hooks.onTrialEnd?.(trial);
      trials.push(trial);
      telemetry.push(tele);
    }

    const log: WireSessionLog = {
      schema_version: "1.0",
      subject_id: this.cfg.subjectId,
      session: this.cfg.session,
      device: this.cfg.device,
      created_at: new Date().toISOString().replace(/\.\d{3}Z$/, "Z"),
      trials,
      runner_config: {
        seed: this.cfg.seed,
        dot_speed: this.cfg.sst.dotSpeed,
        dot_lifetime_frames: this.cfg.sst.dotLifetimeFrames,
        n_dots: this.cfg.sst.nDots,
        tone_hz: this.cfg.sst.toneHz,
        tone_duration_ms: this.cfg.sst.toneDurationMs,
      },
    };
    const issues = validateSessionLog(log);
    if (issues.length) {
      throw new Error("emitted log failed schema validation: "
        + issues.map((i) => `${i.path}: ${i.message}`).join("; "));
    }
    return { log, telemetry };
  }

  /** A block with stop trials must not start without working audio. */
  private checkBlockPreconditions(plan: TrialPlan): void {
    if (plan.task === "sst" && this.cfg.sst.stopFraction > 0
        && !this.env.audioAvailable()) {
      throw new AudioUnavailableError();
    }
  }

  private async gateAndFirstSample(buffer: RawSampleBuffer):
      Promise<{ t0: number; gateDistance: number }> {
    await this.env.awaitStartClick();
    const t0 = this.env.now();
    const p = this.env.pointer();
    buffer.push(0, p.x, p.y);
    const gateDistance = Math.hypot(p.x - START_POSITION[0], p.y - START_POSITION[1]);
    return { t0, gateDistance };
  }

  private async runSstTrial(plan: SstPlan):
      Promise<{ trial: WireTrial; tele: TrialTelemetry }> {
    const cap = this.cfg.sst.responseWindowMs;
    const buffer = new RawSampleBuffer();
    const { t0, gateDistance } = await this.gateAndFirstSample(buffer);

    const dotParams: DotFieldParams = {
      nDots: this.cfg.sst.nDots,
      coherencePct: plan.coherence,
      direction: plan.direction,
      speed: this.cfg.sst.dotSpeed,
      lifetimeFrames: this.cfg.sst.dotLifetimeFrames,
      apertureRadius: this.cfg.sst.apertureRadius,
    };
    let dots = initDots(this.dotRng, dotParams);

    let tone: ToneHandle | null = null;
    if (plan.kind === "stop" && plan.ssdMs !== null) {
      tone = this.env.scheduleTone(t0 + plan.ssdMs, this.cfg.sst.toneHz,
                                   this.cfg.sst.toneDurationMs);
    }

    let responded = false;
    let rt: number | null = null;
    let clickedSide: "left" | "right" | null = null;
    let lastFrame = t0;

    for (;;) {
      const tFrame = await this.env.nextFrame();
      // clicks predate the frame that delivers them, so handle them first
      const click = this.env.takeClick();
      if (click) {
        const side = hitButton(click.x, click.y);
        if (side && click.tMs - t0 <= cap) {
          responded = true;
          rt = click.tMs - t0;
          clickedSide = side;
          buffer.push(rt, click.x, click.y);
          break;
        }
      }
      const t = tFrame - t0;
      if (t >= cap) break;
      const p = this.env.pointer();
      buffer.push(t, p.x, p.y);
      dots = stepDots(this.dotRng, dotParams, dots, tFrame - lastFrame);
      lastFrame = tFrame;
      this.env.render({ kind: "sst", dots, image: plan.image });
    }

    if (!responded && tone && this.env.now() < t0 + (plan.ssdMs ?? 0)) {
      tone.cancel(); // window closed before the scheduled signal
    }
    if (responded && tone && rt !== null && rt < (plan.ssdMs ?? 0)) {
      tone.cancel(); // answered before the stop signal existed
    }

    const actual = tone ? tone.actualStartMs() : null;
    const tele: TrialTelemetry = {
      index: plan.index,
      task: "sst",
      startGateDistance: gateDistance,
      medianIntervalMs: buffer.medianInterval(),
      ...(plan.kind === "stop" ? {
        toneScheduledMs: plan.ssdMs ?? undefined,
        toneActualMs: actual === null ? null : actual - t0,
        toneErrorMs: actual === null ? null : actual - t0 - (plan.ssdMs ?? 0),
      } : {}),
    };

    const trial: WireTrial = {
      trial_id: `t${String(plan.index).padStart(4, "0")}`,
      task: "sst",
      condition: plan.condition,
      kind: plan.kind,
      coherence: plan.coherence,
      ...(plan.kind === "stop" ? { ssd_ms: plan.ssdMs ?? undefined } : {}),
      responded,
      ...(responded && rt !== null ? { rt_ms: Math.round(rt) } : {}),
      ...(responded && clickedSide
        ? { correct: clickedSide === plan.direction } : {}),
      start: [START_POSITION[0], START_POSITION[1]],
      ...(responded && clickedSide
        ? { target: [BUTTONS[clickedSide][0], BUTTONS[clickedSide][1]] } : {}),
      samples: buffer.toWire(),
    };
    return { trial, tele };
  }

  private async runDdtTrial(plan: DdtPlan):
      Promise<{ trial: WireTrial; tele: TrialTelemetry }> {
    const cap = this.cfg.ddt.responseWindowMs;
    const buffer = new RawSampleBuffer();
    const { t0, gateDistance } = await this.gateAndFirstSample(buffer);

    const ssSide = plan.llSide === "left" ? "right" : "left";
    const labels = {
      [plan.llSide]: `$${plan.amountLl} in ${plan.delayLl} days`,
      [ssSide]: plan.delaySs === 0 ? `$${plan.amountSs} now`
                                   : `$${plan.amountSs} in ${plan.delaySs} days`,
    } as Partial<Record<"left" | "right", string>>;

    let responded = false;
    let rt: number | null = null;
    let clickedSide: "left" | "right" | null = null;

    for (;;) {
      const tFrame = await this.env.nextFrame();
      const click = this.env.takeClick();
      if (click) {
        const side = hitButton(click.x, click.y);
        if (side && (cap === null || click.tMs - t0 <= cap)) {
          responded = true;
          rt = click.tMs - t0;
          clickedSide = side;
          buffer.push(rt, click.x, click.y);
          break;
        }
      }
      const t = tFrame - t0;
      if (cap !== null && t >= cap) break;
      const p = this.env.pointer();
      buffer.push(t, p.x, p.y);
      this.env.render({ kind: "ddt", labels, image: plan.image });
    }

    const tele: TrialTelemetry = {
      index: plan.index,
      task: "ddt",
      startGateDistance: gateDistance,
      medianIntervalMs: buffer.medianInterval(),
    };
    const trial: WireTrial = {
      trial_id: `t${String(plan.index).padStart(4, "0")}`,
      task: "ddt",
      condition: plan.condition,
      responded,
      ...(responded && rt !== null ? { rt_ms: Math.round(rt) } : {}),
      ...(responded && clickedSide
        ? { choice: clickedSide === plan.llSide
            ? "larger_later" as const : "sooner_smaller" as const } : {}),
      amount_ss: plan.amountSs,
      delay_ss: plan.delaySs,
      amount_ll: plan.amountLl,
      delay_ll: plan.delayLl,
      is_control: plan.isControl,
      start: [START_POSITION[0], START_POSITION[1]],
      ...(responded && clickedSide
        ? { target: [BUTTONS[clickedSide][0], BUTTONS[clickedSide][1]] } : {}),
      samples: buffer.toWire(),
    };
    return { trial, tele };
  }
}
