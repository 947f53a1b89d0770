/** Gauge read models; the only client-side arithmetic is the ratio. */

import type { TelemetrySnapshot } from "./types.js";

export interface GaugeViewModel {
  metric: string;
  current: number;
  cap: number;
  /** current / cap clamped into [0, 1]. */
  fraction: number;
}

export function gauge(metric: string, current: number, cap: number): GaugeViewModel {
  if (!(cap > 0)) {
    throw new Error(`gauge ${metric}: cap must be positive, got ${cap}`);
  }
  const fraction = Math.min(1, Math.max(0, current / cap));
  return { metric, current, cap, fraction };
}

/** The three governed resources a snapshot exposes, in display order. */
export function gaugesFrom(snapshot: TelemetrySnapshot): GaugeViewModel[] {
  return [
    gauge("storage", snapshot.storage_used_bits, snapshot.storage_cap_bits),
    gauge("ops window", snapshot.ops_granted_window, snapshot.ops_window_cap),
    gauge("working memory", snapshot.wm_occupancy, snapshot.wm_capacity),
  ];
}
