/**
 * Wire-format types and validation for session logs, mirroring the core
 * toolkit's schema. Every log is validated here before upload so a runner
 * bug surfaces at the operator's console, not as a 422 from the collector.
 */

import { z } from "zod";

const sample = z.tuple([
  z.number().int().nonnegative(), // t_ms, integer milliseconds
  z.number().finite(),
  z.number().finite(),
]);

const point = z.tuple([z.number().finite(), z.number().finite()]);

const trialBase = z.object({
  trial_id: z.string().min(1),
  condition: z.enum(["pleasant", "unpleasant", "neutral"]),
  responded: z.boolean(),
  rt_ms: z.number().nonnegative().optional(),
  correct: z.boolean().optional(),
  valence: z.number().min(0).max(1).optional(),
  arousal: z.number().min(0).max(1).optional(),
  slider_touched: z.boolean().optional(),
  start: point,
  target: point.optional(),
  samples: z.array(sample),
});

export const sstTrialSchema = trialBase.extend({
  task: z.literal("sst"),
  kind: z.enum(["go", "stop"]),
  coherence: z.number().optional(),
  ssd_ms: z.number().optional(),
});

export const ddtTrialSchema = trialBase.extend({
  task: z.literal("ddt"),
  choice: z.enum(["sooner_smaller", "larger_later"]).optional(),
  amount_ss: z.number(),
  delay_ss: z.number(),
  amount_ll: z.number(),
  delay_ll: z.number(),
  is_control: z.boolean(),
});

export const trialSchema = z.discriminatedUnion("task", [
  sstTrialSchema,
  ddtTrialSchema,
]);

export const sessionLogSchema = z.object({
  schema_version: z.literal("1.0"),
  subject_id: z.string().min(1),
  session: z.enum(["emotional", "neutral", "synthetic"]),
  device: z.enum(["mouse", "trackpad", "other"]),
  created_at: z.string().optional(),
  scale_scores: z.record(z.string(), z.number()).optional(),
  trials: z.array(trialSchema),
  runner_config: z.unknown().optional(), // forward-compatible extra field
});

export type WireSample = z.infer<typeof sample>;
export type WireTrial = z.infer<typeof trialSchema>;
export type WireSessionLog = z.infer<typeof sessionLogSchema>;

export interface ValidationIssue {
  path: string;
  message: string;
}

/** Structural checks zod cannot express: monotone timestamps, rt/responded
 * pairing, ssd presence, unique trial ids. Mirrors the collector's rules. */
export function validateSessionLog(log: unknown): ValidationIssue[] {
  const parsed = sessionLogSchema.safeParse(log);
  if (!parsed.success) {
    return parsed.error.issues.map((issue) => ({
      path: issue.path.join("."),
      message: issue.message,
    }));
  }
  const issues: ValidationIssue[] = [];
  const seen = new Set<string>();
  parsed.data.trials.forEach((trial, i) => {
    const at = `trials[${i}]`;
    if (seen.has(trial.trial_id)) {
      issues.push({ path: `${at}.trial_id`, message: "duplicate trial id" });
    }
    seen.add(trial.trial_id);
    if (trial.responded !== (trial.rt_ms !== undefined)) {
      issues.push({ path: `${at}.rt_ms`, message: "rt must be present iff responded" });
    }
    if (trial.task === "sst") {
      if (trial.kind === "stop" && trial.ssd_ms === undefined) {
        issues.push({ path: `${at}.ssd_ms`, message: "stop trial without ssd" });
      }
      if (trial.kind === "go" && trial.ssd_ms !== undefined) {
        issues.push({ path: `${at}.ssd_ms`, message: "go trial with ssd" });
      }
    }
    for (let j = 1; j < trial.samples.length; j++) {
      if (trial.samples[j][0] <= trial.samples[j - 1][0]) {
        issues.push({
          path: `${at}.samples[${j}]`,
          message: "timestamps not strictly increasing",
        });
        break;
      }
    }
  });
  return issues;
}
