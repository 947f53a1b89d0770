/** Pure HTML renderers; every view is a string so tests need no DOM. */

import type { Alert } from "./alerts.js";
import type { GaugeViewModel } from "./gauges.js";
import { enabledControls, stateChip, ALL_CONTROLS } from "./state.js";
import type { RunState, TelemetrySnapshot } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderGauge(model: GaugeViewModel): string {
  const percent = (model.fraction * 100).toFixed(1);
  return (
    `<div class="gauge" data-metric="${escapeHtml(model.metric)}">` +
    `<span class="gauge-label">${escapeHtml(model.metric)}</span>` +
    `<div class="gauge-track"><div class="gauge-fill" style="width:${percent}%"></div></div>` +
    `<span class="gauge-value">${model.current} / ${model.cap} (${percent}%)</span>` +
    `</div>`
  );
}

export function renderAlert(alert: Alert): string {
  const seq =
    alert.firstBadSeq === null
      ? ""
      : `<span class="alert-seq">first_bad_seq=${alert.firstBadSeq}</span>`;
  return (
    `<div class="alert alert-${alert.severity}" data-key="${escapeHtml(alert.key)}"` +
    (alert.firstBadSeq === null ? "" : ` data-first-bad-seq="${alert.firstBadSeq}"`) +
    `>` +
    `<strong>${escapeHtml(alert.name)}</strong> ` +
    `<span class="alert-detail">${escapeHtml(alert.detail)}</span>${seq}` +
    `<button class="alert-dismiss" data-dismiss="${escapeHtml(alert.key)}">dismiss</button>` +
    `</div>`
  );
}

export function renderStateChip(state: RunState): string {
  const chip = stateChip(state);
  return `<span class="chip chip-${chip.tone} chip-state">${chip.label}</span>`;
}

export function renderControls(state: RunState): string {
  const enabled = new Set(enabledControls(state));
  return ALL_CONTROLS.map((control) => {
    const disabled = enabled.has(control) ? "" : " disabled";
    return `<button class="control" data-command="${control}"${disabled}>${control}</button>`;
  }).join("");
}

export function renderChainStatus(ok: boolean, firstBadSeq: number | null): string {
  if (ok) {
    return `<span class="chain chain-ok">chain ok</span>`;
  }
  const where = firstBadSeq === null ? "unparseable" : `broken at seq ${firstBadSeq}`;
  return `<span class="chain chain-bad">chain ${where}</span>`;
}

export function renderStaleBanner(lastTick: number): string {
  return `<div class="stale-banner">connection lost; showing data as of tick ${lastTick}</div>`;
}

/** Refusals come back verbatim; the dashboard never rewrites the reason. */
export function renderRefusal(reason: string): string {
  return `<div class="refusal">${escapeHtml(reason)}</div>`;
}

export function renderHeader(snapshot: TelemetrySnapshot): string {
  const task = snapshot.task_id === null ? "-" : snapshot.task_id;
  return (
    `<div class="header">` +
    renderStateChip(snapshot.state) +
    `<span class="tick">tick ${snapshot.tick}</span>` +
    `<span class="task">task ${escapeHtml(task)}</span>` +
    `<span class="head" title="${escapeHtml(snapshot.head_hash)}">head ${escapeHtml(
      snapshot.head_hash.slice(0, 16),
    )}</span>` +
    `</div>`
  );
}
