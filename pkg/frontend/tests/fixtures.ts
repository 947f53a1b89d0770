/** Scripted telemetry fixtures shared by the unit tests. */

import type { TelemetrySnapshot } from "../src/types.js";

export function snapshot(overrides: Partial<TelemetrySnapshot> = {}): TelemetrySnapshot {
  return {
    tick: 1200,
    storage_used_bits: 5_000_000,
    storage_cap_bits: 10_000_000,
    ops_granted_window: 150,
    ops_window_cap: 11_000,
    wm_occupancy: 3,
    wm_capacity: 7,
    task_id: "ep004",
    recent_flags: [],
    head_hash: "ab".repeat(32),
    state: "running",
    ...overrides,
  };
}
