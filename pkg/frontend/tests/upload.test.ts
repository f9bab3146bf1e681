import { describe, expect, it } from "vitest";

import { defaultConfig } from "../src/config.js";
import { SessionRunner } from "../src/engine.js";
import { MemoryStore, retryPending, uploadSession } from "../src/upload.js";
import { ScriptedEnv } from "./scripted.js";

async function makeLog() {
  const cfg = defaultConfig({
    subjectId: "up01", seed: 3,
    blocks: [{ task: "sst", condition: "neutral", nTrials: 4 }],
  });
  const env = new ScriptedEnv();
  const runner = new SessionRunner(cfg, env,
    { onTrialStart: (p) => env.setPlan(p) });
  return (await runner.run()).log;
}

describe("uploadSession", () => {
  it("acknowledged uploads clear the local copy", async () => {
    const log = await makeLog();
    const store = new MemoryStore();
    const result = await uploadSession(log, "http://collector", async (url, init) => {
      expect(url).toBe("http://collector/api/sessions");
      const body = JSON.parse(init.body) as { subject_id: string; trials: unknown[] };
      return {
        status: 201,
        json: async () => ({ subject_id: body.subject_id,
                             trial_count: body.trials.length }),
      };
    }, store);
    expect(result).toEqual({ ok: true, subjectId: "up01", trialCount: 4 });
    expect(store.keys()).toHaveLength(0);
  });

  it("network failure persists the session and retry recovers it", async () => {
    const log = await makeLog();
    const store = new MemoryStore();
    const down = async () => { throw new Error("ECONNREFUSED"); };
    const result = await uploadSession(log, "http://collector", down, store);
    expect(result.ok).toBe(false);
    if (result.ok === false && result.reason === "network") {
      expect(store.load(result.persistedAs)).not.toBeNull();
    } else {
      throw new Error("expected network failure");
    }

    const up = async () => ({
      status: 201,
      json: async () => ({ subject_id: "up01", trial_count: 4 }),
    });
    const retried = await retryPending("http://collector", up, store);
    expect(retried).toEqual({ sent: 1, remaining: 0 });
  });

  it("422 responses surface the validation report and keep the local copy", async () => {
    const log = await makeLog();
    const store = new MemoryStore();
    const reject = async () => ({
      status: 422,
      json: async () => ({ error: "trials[0].ssd_ms: missing" }),
    });
    const result = await uploadSession(log, "http://collector", reject, store);
    expect(result.ok).toBe(false);
    if (result.ok === false && result.reason === "rejected") {
      expect(result.status).toBe(422);
      expect(result.detail).toEqual({ error: "trials[0].ssd_ms: missing" });
      expect(store.load(result.persistedAs)).not.toBeNull();
    } else {
      throw new Error("expected rejection");
    }
  });

  it("refuses to send a log that fails local validation", async () => {
    const log = await makeLog();
    log.trials[0].samples = [[0, 0, -0.8], [0, 0, -0.8]]; // duplicate stamp
    const store = new MemoryStore();
    let called = false;
    const spy = async () => { called = true; return { status: 201, json: async () => ({}) }; };
    const result = await uploadSession(log, "http://collector", spy as never, store);
    expect(result.ok).toBe(false);
    if (result.ok === false) expect(result.reason).toBe("invalid_log");
    expect(called).toBe(false);
  });
});
