/**
 * Session upload with validation-before-send, local persistence on network
 * failure, and operator-visible 422 reports. A completed session is never
 * silently lost: every non-201 outcome leaves the log in the local store.
 */

import { WireSessionLog, validateSessionLog } from "./schema.js";

export interface LocalStore {
  save(key: string, payload: string): void;
  load(key: string): string | null;
  keys(): string[];
  remove(key: string): void;
}

export type FetchLike = (url: string, init: {
  method: string;
  headers: Record<string, string>;
  body: string;
}) => Promise<{ status: number; json(): Promise<unknown> }>;

export type UploadResult =
  | { ok: true; subjectId: string; trialCount: number }
  | { ok: false; reason: "invalid_log"; issues: { path: string; message: string }[] }
  | { ok: false; reason: "rejected"; status: number; detail: unknown; persistedAs: string }
  | { ok: false; reason: "network"; error: string; persistedAs: string };

export function pendingKey(log: WireSessionLog): string {
  return `impulsekit-pending:${log.subject_id}:${log.created_at ?? "unknown"}`;
}

export async function uploadSession(
  log: WireSessionLog,
  collectUrl: string,
  fetchImpl: FetchLike,
  store: LocalStore,
): Promise<UploadResult> {
  const issues = validateSessionLog(log);
  if (issues.length) {
    return { ok: false, reason: "invalid_log", issues };
  }
  const key = pendingKey(log);
  const body = JSON.stringify(log);
  store.save(key, body); // persist first; removed only on acknowledgment
  let response;
  try {
    response = await fetchImpl(`${collectUrl.replace(/\/$/, "")}/api/sessions`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body,
    });
  } catch (err) {
    return { ok: false, reason: "network", error: String(err), persistedAs: key };
  }
  if (response.status === 201) {
    const ack = (await response.json()) as { subject_id: string; trial_count: number };
    store.remove(key);
    return { ok: true, subjectId: ack.subject_id, trialCount: ack.trial_count };
  }
  let detail: unknown = null;
  try {
    detail = await response.json();
  } catch {
    detail = null;
  }
  return { ok: false, reason: "rejected", status: response.status, detail,
           persistedAs: key };
}

/** Retry every session still sitting in the local store. */
export async function retryPending(
  collectUrl: string,
  fetchImpl: FetchLike,
  store: LocalStore,
): Promise<{ sent: number; remaining: number }> {
  let sent = 0;
  for (const key of store.keys().filter((k) => k.startsWith("impulsekit-pending:"))) {
    const payload = store.load(key);
    if (payload === null) continue;
    try {
      const resp = await fetchImpl(`${collectUrl.replace(/\/$/, "")}/api/sessions`, {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: payload,
      });
      if (resp.status === 201) {
        store.remove(key);
        sent += 1;
      }
    } catch {
      // still offline; keep it
    }
  }
  const remaining = store.keys()
    .filter((k) => k.startsWith("impulsekit-pending:")).length;
  return { sent, remaining };
}

export class MemoryStore implements LocalStore {
  private map = new Map<string, string>();
  save(key: string, payload: string): void { this.map.set(key, payload); }
  load(key: string): string | null { return this.map.get(key) ?? null; }
  keys(): string[] { return [...this.map.keys()]; }
  remove(key: string): void { this.map.delete(key); }
}
