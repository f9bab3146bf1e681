import { describe, expect, it } from "vitest";

import { validateSessionLog, WireSessionLog } from "../src/schema.js";

function goodLog(): WireSessionLog {
  return {
    schema_version: "1.0",
    subject_id: "p1",
    session: "neutral",
    device: "mouse",
    trials: [{
      trial_id: "t1",
      task: "sst",
      condition: "neutral",
      kind: "go",
      coherence: 50,
      responded: true,
      rt_ms: 640,
      correct: true,
      start: [0, -0.8],
      target: [0.6, 0.6],
      samples: [[0, 0, -0.8], [16, 0.1, -0.6], [640, 0.6, 0.6]],
    }],
  };
}

describe("validateSessionLog", () => {
  it("accepts a well-formed log", () => {
    expect(validateSessionLog(goodLog())).toEqual([]);
  });

  it("rejects non-monotone timestamps", () => {
    const log = goodLog();
    log.trials[0].samples = [[0, 0, -0.8], [32, 0.1, -0.6], [16, 0.2, -0.5]];
    const issues = validateSessionLog(log);
    expect(issues.some((i) => i.message.includes("increasing"))).toBe(true);
  });

  it("rejects rt without responded and vice versa", () => {
    const a = goodLog();
    a.trials[0].responded = false;
    expect(validateSessionLog(a).some((i) => i.path.includes("rt_ms"))).toBe(true);
    const b = goodLog();
    delete b.trials[0].rt_ms;
    expect(validateSessionLog(b).some((i) => i.path.includes("rt_ms"))).toBe(true);
  });

  it("rejects stop trials without ssd and duplicated ids", () => {
    const log = goodLog();
    const stop = { ...log.trials[0], trial_id: "t1", kind: "stop" as const };
    delete (stop as Record<string, unknown>).rt_ms;
    stop.responded = false;
    delete (stop as Record<string, unknown>).correct;
    delete (stop as Record<string, unknown>).target;
    log.trials.push(stop);
    const issues = validateSessionLog(log);
    expect(issues.some((i) => i.message.includes("duplicate"))).toBe(true);
    expect(issues.some((i) => i.message.includes("without ssd"))).toBe(true);
  });

  it("rejects non-integer sample timestamps", () => {
    const log = goodLog();
    log.trials[0].samples = [[0, 0, -0.8], [16.7 as unknown as number, 0.1, -0.6]];
    expect(validateSessionLog(log).length).toBeGreaterThan(0);
  });

  it("rejects unknown enum values outright", () => {
    const log = goodLog() as Record<string, unknown>;
    log.session = "party";
    expect(validateSessionLog(log).length).toBeGreaterThan(0);
  });
});
