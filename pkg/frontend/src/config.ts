/**
 * Run configuration: block schedule, task parameters, collection endpoint.
 *
 * Values the source protocol leaves unspecified (dot speed/lifetime/size,
 * tone frequency/duration, button geometry) are explicit config fields with
 * the defaults below, and are recorded into the emitted session log so
 * analyses can condition on them.
 */

export type Condition = "pleasant" | "unpleasant" | "neutral";
export type TaskKind = "sst" | "ddt";
export type SessionKind = "emotional" | "neutral" | "synthetic";

export interface BlockSpec {
  task: TaskKind;
  condition: Condition;
  nTrials: number;
}

export interface SstConfig {
  stopFraction: number;
  ssdSetMs: number[];
  coherenceSet: number[];
  nDots: number;
  responseWindowMs: number;
  dotSpeed: number;        // normalized units per second
  dotLifetimeFrames: number;
  dotRadius: number;       // drawing only
  apertureRadius: number;  // normalized units
  toneHz: number;
  toneDurationMs: number;
}

export interface DdtConfig {
  amountsSs: number[];
  delaysLlDays: number[];
  amountLl: number;
  nControl: number;
  responseWindowMs: number | null; // null = no cap (protocol default)
}

export interface RunConfig {
  subjectId: string;
  session: SessionKind;
  device: "mouse" | "trackpad" | "other";
  seed: number;
  blocks: BlockSpec[];
  sst: SstConfig;
  ddt: DdtConfig;
  affectiveSliders: boolean;                    // rate valence/arousal per trial
  images: Partial<Record<Condition, string[]>>; // operator-supplied manifest
  collectUrl: string | null;
}

export const START_POSITION: readonly [number, number] = [0, -0.8];
export const BUTTONS = {
  left: [-0.6, 0.6] as const,
  right: [0.6, 0.6] as const,
};
export const START_GATE_RADIUS = 0.02;

export const DEFAULT_SST: SstConfig = {
  stopFraction: 0.25,
  ssdSetMs: [100, 200, 300, 400, 500, 600],
  coherenceSet: [10, 50, 80],
  nDots: 100,
  responseWindowMs: 3000,
  dotSpeed: 0.25,
  dotLifetimeFrames: 12,
  dotRadius: 0.006,
  apertureRadius: 0.35,
  toneHz: 750,
  toneDurationMs: 150,
};

export const DEFAULT_DDT: DdtConfig = {
  amountsSs: [10, 20, 30, 40, 50, 60, 70, 80, 90, 99],
  delaysLlDays: [1, 7, 14, 30, 60, 90, 180, 365],
  amountLl: 100,
  nControl: 10,
  responseWindowMs: null,
};

export function defaultConfig(partial: Partial<RunConfig> = {}): RunConfig {
  return {
    subjectId: "anon",
    session: "neutral",
    device: "mouse",
    seed: 1,
    blocks: [
      { task: "sst", condition: "neutral", nTrials: 100 },
      { task: "sst", condition: "neutral", nTrials: 100 },
      { task: "ddt", condition: "neutral", nTrials: 45 },
      { task: "ddt", condition: "neutral", nTrials: 45 },
    ],
    sst: { ...DEFAULT_SST },
    ddt: { ...DEFAULT_DDT },
    affectiveSliders: false,
    images: {},
    collectUrl: null,
    ...partial,
  };
}
