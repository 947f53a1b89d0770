/** Wire types for the supervisor API; field names match the server verbatim. */

export type RunState = "running" | "paused" | "killed" | "finished";

export const RUN_STATES: readonly RunState[] = ["running", "paused", "killed", "finished"];

/** One telemetry snapshot exactly as streamed; no client-side reshaping. */
export interface TelemetrySnapshot {
  tick: number;
  storage_used_bits: number;
  storage_cap_bits: number;
  ops_granted_window: number;
  ops_window_cap: number;
  wm_occupancy: number;
  wm_capacity: number;
  task_id: string | null;
  recent_flags: Array<[string, string]>;
  head_hash: string;
  state: RunState;
}

export interface VerifyResponse {
  ok: boolean;
  first_bad_seq: number | null;
  head_hash: string;
  length: number;
}

/** Body of every command response; refusals carry the server's reason verbatim. */
export interface CommandResponse {
  ok: boolean;
  state?: RunState;
  reason?: string;
  budget?: Record<string, number>;
}

function expectNumber(raw: Record<string, unknown>, field: string): number {
  const value = raw[field];
  if (typeof value !== "number" || !Number.isFinite(value)) {
    throw new Error(`snapshot field ${field} is not a finite number`);
  }
  return value;
}

/** Validate one decoded snapshot object; throws on any schema drift. */
export function parseSnapshot(raw: unknown): TelemetrySnapshot {
  if (typeof raw !== "object" || raw === null) {
    throw new Error("snapshot is not an object");
  }
  const record = raw as Record<string, unknown>;
  const state = record["state"];
  if (typeof state !== "string" || !RUN_STATES.includes(state as RunState)) {
    throw new Error(`snapshot state ${String(state)} is not a run state`);
  }
  const taskId = record["task_id"];
  if (taskId !== null && typeof taskId !== "string") {
    throw new Error("snapshot task_id is neither string nor null");
  }
  const headHash = record["head_hash"];
  if (typeof headHash !== "string") {
    throw new Error("snapshot head_hash is not a string");
  }
  const flags = record["recent_flags"];
  if (!Array.isArray(flags)) {
    throw new Error("snapshot recent_flags is not an array");
  }
  const recentFlags: Array<[string, string]> = flags.map((entry) => {
    if (!Array.isArray(entry) || entry.length !== 2) {
      throw new Error("snapshot flag entry is not a [name, detail] pair");
    }
    const [name, detail] = entry;
    if (typeof name !== "string" || typeof detail !== "string") {
      throw new Error("snapshot flag entry is not a [name, detail] pair");
    }
    return [name, detail];
  });
  return {
    tick: expectNumber(record, "tick"),
    storage_used_bits: expectNumber(record, "storage_used_bits"),
    storage_cap_bits: expectNumber(record, "storage_cap_bits"),
    ops_granted_window: expectNumber(record, "ops_granted_window"),
    ops_window_cap: expectNumber(record, "ops_window_cap"),
    wm_occupancy: expectNumber(record, "wm_occupancy"),
    wm_capacity: expectNumber(record, "wm_capacity"),
    task_id: taskId,
    recent_flags: recentFlags,
    head_hash: headHash,
    state: state as RunState,
  };
}
