/**
 * Seeded trial planning. Given (config, seed) the whole session is
 * derivable: block order is as configured; within each SST block the stop
 * positions, SSDs, coherences, and dot directions are drawn from the seeded
 * stream; the DDT offer grid (every amount x delay cell once, plus the
 * both-immediate controls) is split across DDT blocks and shuffled, with
 * option sides randomized per trial.
 */

import type { Condition, RunConfig } from "./config.js";
import { makeRng, pick, shuffle } from "./rng.js";

export interface SstPlan {
  task: "sst";
  index: number;
  block: number;
  condition: Condition;
  kind: "go" | "stop";
  ssdMs: number | null;
  coherence: number;
  direction: "left" | "right";
  image: string | null;
}

export interface DdtPlan {
  task: "ddt";
  index: number;
  block: number;
  condition: Condition;
  amountSs: number;
  delaySs: number;
  amountLl: number;
  delayLl: number;
  isControl: boolean;
  llSide: "left" | "right";
  image: string | null;
}

export type TrialPlan = SstPlan | DdtPlan;

function planSstBlock(cfg: RunConfig, rng: () => number, block: number,
                      condition: Condition, nTrials: number,
                      startIndex: number): SstPlan[] {
  const nStop = Math.round(cfg.sst.stopFraction * nTrials);
  const kinds: ("go" | "stop")[] = [];
  for (let i = 0; i < nTrials; i++) kinds.push(i < nStop ? "stop" : "go");
  shuffle(rng, kinds);
  const images = cfg.images[condition] ?? [];
  return kinds.map((kind, i) => ({
    task: "sst" as const,
    index: startIndex + i,
    block,
    condition,
    kind,
    ssdMs: kind === "stop" ? pick(rng, cfg.sst.ssdSetMs) : null,
    coherence: pick(rng, cfg.sst.coherenceSet),
    direction: rng() < 0.5 ? ("left" as const) : ("right" as const),
    image: images.length ? pick(rng, images) : null,
  }));
}

function ddtOfferPool(cfg: RunConfig, rng: () => number) {
  const offers: Omit<DdtPlan, "index" | "block" | "condition" | "llSide" | "image">[] = [];
  for (const a of cfg.ddt.amountsSs) {
    for (const d of cfg.ddt.delaysLlDays) {
      offers.push({ task: "ddt", amountSs: a, delaySs: 0,
                    amountLl: cfg.ddt.amountLl, delayLl: d, isControl: false });
    }
  }
  for (let i = 0; i < cfg.ddt.nControl; i++) {
    const a = cfg.ddt.amountsSs[i % cfg.ddt.amountsSs.length];
    offers.push({ task: "ddt", amountSs: a, delaySs: 0,
                  amountLl: cfg.ddt.amountLl, delayLl: 0, isControl: true });
  }
  return shuffle(rng, offers);
}

export function buildSessionPlan(cfg: RunConfig): TrialPlan[] {
  const rng = makeRng(cfg.seed);
  const plans: TrialPlan[] = [];
  const ddtBlocks = cfg.blocks.filter((b) => b.task === "ddt");
  const ddtTotal = ddtBlocks.reduce((s, b) => s + b.nTrials, 0);
  const pool = ddtTotal > 0 ? ddtOfferPool(cfg, rng) : [];
  if (ddtTotal > pool.length) {
    throw new Error(
      `ddt blocks ask for ${ddtTotal} trials but the offer design has ${pool.length}`);
  }
  let ddtAt = 0;
  let index = 0;
  cfg.blocks.forEach((block, b) => {
    if (block.task === "sst") {
      plans.push(...planSstBlock(cfg, rng, b, block.condition, block.nTrials, index));
      index += block.nTrials;
    } else {
      const images = cfg.images[block.condition] ?? [];
      for (let i = 0; i < block.nTrials; i++) {
        const offer = pool[ddtAt++];
        plans.push({
          ...offer,
          index: index++,
          block: b,
          condition: block.condition,
          llSide: rng() < 0.5 ? "left" : "right",
          image: images.length ? pick(rng, images) : null,
        });
      }
    }
  });
  return plans;
}
