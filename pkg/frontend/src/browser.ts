/**
 * Browser implementation of the runner ports: rAF frames, pointer events in
 * the normalized screen frame ((0,0) center, (1,1) top-right, y up),
 * WebAudio tones scheduled on the audio clock (sample-accurate rather than
 * frame-bound), and DOM overlays for the start gate and affective sliders.
 */

import { START_POSITION } from "./config.js";
import {
  ClickEvent,
  PointerState,
  RunnerEnv,
  Scene,
  SliderResult,
  ToneHandle,
} from "./env.js";

export class BrowserEnv implements RunnerEnv {
  private readonly stage: HTMLElement;
  private readonly canvas: HTMLCanvasElement;
  private readonly ctx: CanvasRenderingContext2D;
  private audio: AudioContext | null = null;
  private pointerPos: PointerState = { x: 0, y: 0 };
  private clickQueue: ClickEvent[] = [];

  constructor(stage: HTMLElement, canvas: HTMLCanvasElement) {
    this.stage = stage;
    this.canvas = canvas;
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("no 2d canvas context");
    this.ctx = ctx;
    stage.addEventListener("pointermove", (e) => {
      this.pointerPos = this.toNormalized(e.clientX, e.clientY);
    });
    stage.addEventListener("pointerdown", (e) => {
      const p = this.toNormalized(e.clientX, e.clientY);
      this.pointerPos = p;
      this.clickQueue.push({ ...p, tMs: performance.now() });
    });
  }

  private toNormalized(clientX: number, clientY: number): PointerState {
    const r = this.stage.getBoundingClientRect();
    return {
      x: (clientX - (r.left + r.width / 2)) / (r.width / 2),
      y: ((r.top + r.height / 2) - clientY) / (r.height / 2),
    };
  }

  private toPixels(x: number, y: number): [number, number] {
    const r = this.stage.getBoundingClientRect();
    return [r.width / 2 + (x * r.width) / 2, r.height / 2 - (y * r.height) / 2];
  }

  now(): number {
    return performance.now();
  }

  nextFrame(): Promise<number> {
    return new Promise((resolve) => requestAnimationFrame((ts) => resolve(ts)));
  }

  pointer(): PointerState {
    return { ...this.pointerPos };
  }

  takeClick(): ClickEvent | null {
    return this.clickQueue.shift() ?? null;
  }

  awaitStartClick(): Promise<void> {
    return new Promise((resolve) => {
      const btn = document.createElement("button");
      btn.textContent = "start";
      btn.className = "ik-start";
      const [px, py] = this.toPixels(START_POSITION[0], START_POSITION[1]);
      btn.style.position = "absolute";
      btn.style.left = `${px}px`;
      btn.style.top = `${py}px`;
      btn.style.transform = "translate(-50%, -50%)";
      btn.addEventListener("click", (e) => {
        this.pointerPos = this.toNormalized(e.clientX, e.clientY);
        this.clickQueue = [];
        btn.remove();
        resolve();
      });
      this.stage.appendChild(btn);
    });
  }

  audioAvailable(): boolean {
    try {
      if (!this.audio) this.audio = new AudioContext();
      return this.audio.state !== "closed";
    } catch {
      return false;
    }
  }

  scheduleTone(atMs: number, freqHz: number, durationMs: number): ToneHandle {
    if (!this.audio) this.audio = new AudioContext();
    const audio = this.audio;
    // map the performance.now() timebase onto the audio clock once, here
    const nowPerf = performance.now();
    const delaySec = Math.max(0, (atMs - nowPerf) / 1000);
    const startAt = audio.currentTime + delaySec;
    const osc = audio.createOscillator();
    const gain = audio.createGain();
    osc.frequency.value = freqHz;
    gain.gain.value = 0.4;
    osc.connect(gain).connect(audio.destination);
    osc.start(startAt);
    osc.stop(startAt + durationMs / 1000);
    const actual = Math.max(atMs, nowPerf); // late schedule starts immediately
    let canceled = false;
    let started = false;
    const untilStart = setTimeout(() => { started = true; }, delaySec * 1000);
    return {
      actualStartMs: () => (canceled && !started ? null : actual),
      cancel: () => {
        if (!started) {
          canceled = true;
          clearTimeout(untilStart);
          try { osc.stop(); } catch { /* already stopped */ }
        }
      },
    };
  }

  render(scene: Scene): void {
    const w = this.canvas.width;
    const h = this.canvas.height;
    this.ctx.clearRect(0, 0, w, h);
    const px = (x: number, y: number): [number, number] =>
      [w / 2 + (x * w) / 2, h / 2 - (y * h) / 2];

    if (scene.kind === "sst" && scene.dots) {
      this.ctx.fillStyle = "#222";
      for (const d of scene.dots as { x: number; y: number }[]) {
        const [cx, cy] = px(d.x, d.y);
        this.ctx.beginPath();
        this.ctx.arc(cx, cy, 3, 0, 2 * Math.PI);
        this.ctx.fill();
      }
      this.drawButton(px, -0.6, 0.6, "left");
      this.drawButton(px, 0.6, 0.6, "right");
    } else if (scene.kind === "ddt" && scene.labels) {
      this.drawButton(px, -0.6, 0.6, scene.labels.left ?? "");
      this.drawButton(px, 0.6, 0.6, scene.labels.right ?? "");
    }
  }

  private drawButton(px: (x: number, y: number) => [number, number],
                     x: number, y: number, label: string): void {
    const [cx, cy] = px(x, y);
    this.ctx.strokeStyle = "#444";
    this.ctx.strokeRect(cx - 90, cy - 28, 180, 56);
    this.ctx.fillStyle = "#111";
    this.ctx.font = "14px sans-serif";
    this.ctx.textAlign = "center";
    this.ctx.fillText(label, cx, cy + 5);
  }

  runSliders(): Promise<SliderResult> {
    return new Promise((resolve) => {
      const overlay = document.createElement("div");
      overlay.className = "ik-sliders";
      overlay.innerHTML = `
        <label>unhappy <input type="range" id="ik-valence" min="0" max="1000" value="500"> happy</label>
        <label>calm <input type="range" id="ik-arousal" min="0" max="1000" value="500"> excited</label>
        <button id="ik-continue">continue</button>`;
      this.stage.appendChild(overlay);
      let touched = false;
      overlay.querySelectorAll("input").forEach((el) =>
        el.addEventListener("input", () => { touched = true; }));
      overlay.querySelector("#ik-continue")!.addEventListener("click", () => {
        const v = Number((overlay.querySelector("#ik-valence") as HTMLInputElement).value);
        const a = Number((overlay.querySelector("#ik-arousal") as HTMLInputElement).value);
        overlay.remove();
        resolve({ valence: v / 1000, arousal: a / 1000, touched });
      });
    });
  }
}
