/** Run-state chip and the control enablement matrix. */

import type { RunState } from "./types.js";

export type Control = "pause" | "resume" | "kill" | "budget";

export const ALL_CONTROLS: readonly Control[] = ["pause", "resume", "kill", "budget"];

/** Which controls a given run state leaves enabled. */
export function enabledControls(state: RunState): Control[] {
  switch (state) {
    case "running":
      return ["pause", "kill", "budget"];
    case "paused":
      // everything except resume and kill is disabled while paused
      return ["resume", "kill"];
    case "killed":
    case "finished":
      return [];
  }
}

export type ChipTone = "ok" | "warn" | "bad";

export interface StateChip {
  label: RunState;
  tone: ChipTone;
}

export function stateChip(state: RunState): StateChip {
  const tone: ChipTone = state === "running" || state === "finished" ? "ok" : state === "paused" ? "warn" : "bad";
  return { label: state, tone };
}
