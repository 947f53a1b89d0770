"""Telemetry snapshots derived by folding the audit log.

The supervisor never reads live counters directly: every snapshot is a pure
fold over the audit records up to a tick, so whatever the dashboard shows
is reproducible from the log alone and can be cross-checked after the fact.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Tuple

from .audit import GENESIS_HASH, AuditRecord
from .baselines import ResourceBudget

STATE_RUNNING = "running"
STATE_PAUSED = "paused"
STATE_KILLED = "killed"
STATE_FINISHED = "finished"

RECENT_FLAG_LIMIT = 10
DEFAULT_WINDOW_MS = 1000.0


@dataclass(frozen=True)
class TelemetrySnapshot:
    """One consistent view of the run at a tick."""

    tick: int
    storage_used_bits: int
    storage_cap_bits: int
    ops_granted_window: int
    ops_window_cap: int
    wm_occupancy: int
    wm_capacity: int
    task_id: Optional[str]
    recent_flags: Tuple[Tuple[str, str], ...]
    head_hash: str
    state: str

    def to_json(self) -> str:
        payload = asdict(self)
        payload["recent_flags"] = [list(pair) for pair in self.recent_flags]
        return json.dumps(payload, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "TelemetrySnapshot":
        payload = json.loads(text)
        payload["recent_flags"] = tuple(
            (name, detail) for name, detail in payload["recent_flags"]
        )
        return cls(**payload)


def _detail_fields(detail: str) -> Dict[str, str]:
    fields = {}
    for token in detail.split():
        if "=" in token:
            name, _, value = token.partition("=")
            fields[name] = value
    return fields


def fold_telemetry(
    records: Sequence[AuditRecord],
    budget: ResourceBudget,
    at_tick: Optional[int] = None,
    window_ms: float = DEFAULT_WINDOW_MS,
) -> TelemetrySnapshot:
    """Reduce audit records (up to at_tick when given) into one snapshot."""
    if at_tick is not None:
        records = [r for r in records if r.tick <= at_tick]

    storage_used = 0
    wm_resident: Dict[str, None] = {}
    current_task: Optional[str] = None
    state = STATE_RUNNING
    flags = []

    for record in records:
        if record.kind == "task-summary":
            if current_task == record.task_id:
                current_task = None
        elif record.task_id is not None:
            current_task = record.task_id

        if record.kind == "memory":
            fields = _detail_fields(record.detail)
            if record.detail.startswith("ltm-write "):
                storage_used += int(fields["bits"])
            elif record.detail.startswith("ltm-delete "):
                storage_used -= int(fields["bits"])
                if fields.get("wm") == "1":
                    wm_resident.pop(fields["key"], None)
            elif record.detail.startswith("ltm-read "):
                key = fields["key"]
                evicted = fields.get("evicted", "-")
                if evicted != "-":
                    wm_resident.pop(evicted, None)
                wm_resident[key] = None
        elif record.kind == "guard":
            if record.detail == "pause":
                state = STATE_PAUSED
            elif record.detail == "resume":
                state = STATE_RUNNING
            elif record.detail == "kill":
                state = STATE_KILLED
            elif record.detail == "run-complete":
                state = STATE_FINISHED
        elif record.kind == "anomaly":
            name, _, rest = record.detail.partition(" ")
            flags.append((name, rest))

    tick = at_tick if at_tick is not None else (records[-1].tick if records else 0)
    window_ticks = window_ms * budget.tick_rate / 1000.0
    ops_window = sum(
        r.ops_used for r in records if r.kind == "budget" and r.tick > tick - window_ticks
    )
    head = records[-1].hash if records else GENESIS_HASH

    return TelemetrySnapshot(
        tick=tick,
        storage_used_bits=storage_used,
        storage_cap_bits=budget.storage_bits,
        ops_granted_window=ops_window,
        ops_window_cap=int(budget.ops_burst + budget.ops_per_second * window_ms / 1000.0),
        wm_occupancy=len(wm_resident),
        wm_capacity=budget.wm_slots,
        task_id=current_task,
        recent_flags=tuple(flags[-RECENT_FLAG_LIMIT:]),
        head_hash=head.hex(),
        state=state,
    )
