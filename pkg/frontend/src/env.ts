/**
 * Runtime ports the engine runs against. The browser adapter implements
 * them with rAF/pointer events/WebAudio; tests drive a scripted fake with a
 * virtual 60 Hz clock. Keeping the engine pure over these ports is what
 * makes a full session runnable headlessly.
 */

export interface PointerState {
  x: number;
  y: number;
}

export interface ClickEvent extends PointerState {
  tMs: number;
}

export interface ToneHandle {
  /** Realized audio-clock start time (ms, same clock as now()); null until
   * started, stays null if canceled first. */
  actualStartMs(): number | null;
  cancel(): void;
}

export interface SliderResult {
  valence: number;
  arousal: number;
  touched: boolean;
}

export interface Scene {
  kind: "sst" | "ddt";
  dots?: unknown[];
  labels?: Partial<Record<"left" | "right", string>>;
  image?: string | null;
}

export interface RunnerEnv {
  now(): number;
  /** Resolves at the next display frame with its timestamp. */
  nextFrame(): Promise<number>;
  pointer(): PointerState;
  /** Click since the last call, if any (consumed). */
  takeClick(): ClickEvent | null;
  /** Shows the start button and resolves once clicked; the pointer is then
   * at the trial start position by construction. */
  awaitStartClick(): Promise<void>;
  audioAvailable(): boolean;
  /** Schedule a tone on the audio clock (sample-accurate, not frame-bound). */
  scheduleTone(atMs: number, freqHz: number, durationMs: number): ToneHandle;
  render(scene: Scene): void;
  /** Affective-slider screen; resolves with values in [0, 1]. */
  runSliders(): Promise<SliderResult>;
}

export class AudioUnavailableError extends Error {
  constructor() {
    super("audio output unavailable: refusing to start a stop-signal block "
      + "(a silent stop signal would corrupt the data)");
    this.name = "AudioUnavailableError";
  }
}
