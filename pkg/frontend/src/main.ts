/**
 * Browser entry point: load the run config (?config=<url> or defaults),
 * run the session, upload it to the collector, and fall back to local
 * persistence when the collector is unreachable.
 */

import { BrowserEnv } from "./browser.js";
import { RunConfig, defaultConfig } from "./config.js";
import { SessionRunner } from "./engine.js";
import { FetchLike, LocalStore, retryPending, uploadSession } from "./upload.js";

class BrowserStore implements LocalStore {
  save(key: string, payload: string): void { localStorage.setItem(key, payload); }
  load(key: string): string | null { return localStorage.getItem(key); }
  keys(): string[] {
    return Array.from({ length: localStorage.length },
      (_, i) => localStorage.key(i)!).filter(Boolean);
  }
  remove(key: string): void { localStorage.removeItem(key); }
}

const fetchLike: FetchLike = async (url, init) => {
  const resp = await fetch(url, init);
  return { status: resp.status, json: () => resp.json() };
};

async function loadConfig(): Promise<RunConfig> {
  const params = new URLSearchParams(window.location.search);
  const url = params.get("config");
  let partial: Partial<RunConfig> = {};
  if (url) {
    partial = (await (await fetch(url)).json()) as Partial<RunConfig>;
  }
  const subject = params.get("subject");
  if (subject) partial.subjectId = subject;
  const seed = params.get("seed");
  if (seed) partial.seed = Number(seed);
  if (!partial.collectUrl) partial.collectUrl = window.location.origin;
  return defaultConfig(partial);
}

function say(msg: string): void {
  document.getElementById("ik-status")!.textContent = msg;
}

async function run(): Promise<void> {
  const cfg = await loadConfig();
  const stage = document.getElementById("ik-stage") as HTMLElement;
  const canvas = document.getElementById("ik-canvas") as HTMLCanvasElement;
  canvas.width = stage.clientWidth;
  canvas.height = stage.clientHeight;
  const env = new BrowserEnv(stage, canvas);
  const store = new BrowserStore();

  if (cfg.collectUrl) {
    const retried = await retryPending(cfg.collectUrl, fetchLike, store);
    if (retried.sent) say(`recovered ${retried.sent} pending session(s)`);
  }

  const runner = new SessionRunner(cfg, env);
  say(`subject ${cfg.subjectId}: click start to begin`);
  try {
    const { log } = await runner.run();
    if (!cfg.collectUrl) {
      say("session complete (no collector configured; log in console)");
      console.log(JSON.stringify(log));
      return;
    }
    const result = await uploadSession(log, cfg.collectUrl, fetchLike, store);
    if (result.ok) {
      say(`uploaded: ${result.trialCount} trials acknowledged for ${result.subjectId}`);
    } else if (result.reason === "network") {
      say(`collector unreachable; session saved locally as ${result.persistedAs} `
        + "and will retry on next load");
    } else if (result.reason === "rejected") {
      say(`collector rejected the session (HTTP ${result.status}): `
        + JSON.stringify(result.detail));
    } else {
      say("internal error: emitted log failed validation; not uploaded. "
        + JSON.stringify(result.issues.slice(0, 3)));
    }
  } catch (err) {
    say(String(err));
    throw err;
  }
}

window.addEventListener("DOMContentLoaded", () => { void run(); });
