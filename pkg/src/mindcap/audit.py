"""Tamper-evident audit trail plus treacherous-turn precursor detectors.

Every resource grant, bias application, and guard event becomes one record
in a hash chain: each record's digest covers the previous digest, so any
edit, insertion, or deletion is localizable to the earliest affected
sequence number.  Records serialize to a canonical one-line text form that
verifies bit-exactly across platforms.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

from .errors import OpenTask

GENESIS_HASH = bytes(32)

RECORD_KINDS = frozenset(
    {"perceive", "decide", "memory", "guard", "budget", "anomaly", "task-summary"}
)

FLAG_SANDBAGGING = "SANDBAGGING"
FLAG_QUOTA_PROBE = "QUOTA_PROBE"
FLAG_SELF_INSPECTION = "SELF_INSPECTION"
FLAG_TAMPER = "TAMPER"

# Detail prefixes the detectors key on.
REFUSAL_PREFIXES = ("quota-exceeded", "refused")
SELF_INSPECTION_PREFIX = "self-inspection"


def _escape(text: str) -> str:
    return (
        text.replace("\\", "\\\\")
        .replace("\t", "\\t")
        .replace("\n", "\\n")
        .replace("\r", "\\r")
    )


def _unescape(text: str) -> str:
    out = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\\" and i + 1 < len(text):
            nxt = text[i + 1]
            mapped = {"\\": "\\", "t": "\t", "n": "\n", "r": "\r"}.get(nxt)
            if mapped is not None:
                out.append(mapped)
                i += 2
                continue
        out.append(ch)
        i += 1
    return "".join(out)


def _format_float(value: float) -> str:
    return repr(float(value))


@dataclass(frozen=True)
class AuditRecord:
    """One sealed log entry; hash covers prev_hash plus the payload fields."""

    seq: int
    tick: int
    task_id: Optional[str]
    kind: str
    ops_used: int = 0
    bytes_read: int = 0
    bytes_written: int = 0
    latency_injected: float = 0.0
    biases_applied: Tuple[Tuple[str, float], ...] = ()
    detail: str = ""
    prev_hash: bytes = GENESIS_HASH
    hash: bytes = b""

    def payload_text(self) -> str:
        """Canonical serialization of everything the hash covers."""
        if self.biases_applied:
            biases = ",".join(
                f"{bias_id}:{_format_float(delta)}"
                for bias_id, delta in self.biases_applied
            )
        else:
            biases = "-"
        task = _escape(self.task_id) if self.task_id is not None else "-"
        return "\t".join(
            (
                f"seq={self.seq}",
                f"tick={self.tick}",
                f"task={task}",
                f"kind={self.kind}",
                f"ops={self.ops_used}",
                f"br={self.bytes_read}",
                f"bw={self.bytes_written}",
                f"lat={_format_float(self.latency_injected)}",
                f"biases={biases}",
                f"detail={_escape(self.detail)}",
            )
        )

    def compute_hash(self) -> bytes:
        return hashlib.sha256(self.prev_hash + self.payload_text().encode("utf-8")).digest()

    def to_line(self) -> str:
        return "\t".join(
            (
                self.payload_text(),
                f"prev={self.prev_hash.hex()}",
                f"hash={self.hash.hex()}",
            )
        )


def record_from_line(line: str) -> AuditRecord:
    """Parse one canonical log line; raises ValueError when malformed."""
    parts = line.rstrip("\n").split("\t")
    if len(parts) != 12:
        raise ValueError(f"expected 12 fields, found {len(parts)}")
    values: Dict[str, str] = {}
    expected = ("seq", "tick", "task", "kind", "ops", "br", "bw", "lat", "biases", "detail", "prev", "hash")
    for name, part in zip(expected, parts):
        prefix = name + "="
        if not part.startswith(prefix):
            raise ValueError(f"field {name} malformed: {part!r}")
        values[name] = part[len(prefix) :]
    biases: Tuple[Tuple[str, float], ...] = ()
    if values["biases"] != "-":
        pairs = []
        for item in values["biases"].split(","):
            bias_id, _, delta = item.partition(":")
            pairs.append((bias_id, float(delta)))
        biases = tuple(pairs)
    task = None if values["task"] == "-" else _unescape(values["task"])
    return AuditRecord(
        seq=int(values["seq"]),
        tick=int(values["tick"]),
        task_id=task,
        kind=values["kind"],
        ops_used=int(values["ops"]),
        bytes_read=int(values["br"]),
        bytes_written=int(values["bw"]),
        latency_injected=float(values["lat"]),
        biases_applied=biases,
        detail=_unescape(values["detail"]),
        prev_hash=bytes.fromhex(values["prev"]),
        hash=bytes.fromhex(values["hash"]),
    )


@dataclass
class _TaskAccount:
    open: bool = True
    ops_used: int = 0
    bytes_read: int = 0
    bytes_written: int = 0
    latency_injected: float = 0.0
    events: int = 0


class AuditTrail:
    """Append-only hash chain with per-task accounting.

    The public surface deliberately has no mutate or delete operation;
    records exist from append until process exit.
    """

    def __init__(self) -> None:
        self._records: List[AuditRecord] = []
        self._lock = threading.RLock()
        self._tasks: Dict[str, _TaskAccount] = {}
        self._fired: Set[str] = set()

    @property
    def length(self) -> int:
        with self._lock:
            return len(self._records)

    @property
    def head_hash(self) -> bytes:
        with self._lock:
            return self._records[-1].hash if self._records else GENESIS_HASH

    def records(self) -> Tuple[AuditRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def append(
        self,
        tick: int,
        task_id: Optional[str],
        kind: str,
        ops_used: int = 0,
        bytes_read: int = 0,
        bytes_written: int = 0,
        latency_injected: float = 0.0,
        biases_applied: Sequence[Tuple[str, float]] = (),
        detail: str = "",
    ) -> AuditRecord:
        if kind not in RECORD_KINDS:
            raise ValueError(f"unknown record kind {kind!r}")
        if task_id == "-" or task_id == "":
            raise ValueError("task id '-' is reserved for taskless records")
        with self._lock:
            unsealed = AuditRecord(
                seq=len(self._records),
                tick=tick,
                task_id=task_id,
                kind=kind,
                ops_used=ops_used,
                bytes_read=bytes_read,
                bytes_written=bytes_written,
                latency_injected=latency_injected,
                biases_applied=tuple(biases_applied),
                detail=detail,
                prev_hash=self.head_hash,
            )
            record = replace(unsealed, hash=unsealed.compute_hash())
            self._records.append(record)
            account = self._tasks.get(task_id) if task_id else None
            if account is not None and account.open and kind != "task-summary":
                account.ops_used += ops_used
                account.bytes_read += bytes_read
                account.bytes_written += bytes_written
                account.latency_injected += latency_injected
                account.events += 1
            return record

    def begin_task(self, task_id: str) -> None:
        with self._lock:
            if task_id in self._tasks and self._tasks[task_id].open:
                raise ValueError(f"task {task_id!r} already open")
            self._tasks[task_id] = _TaskAccount()

    def close_task(self, task_id: str) -> None:
        with self._lock:
            self._tasks[task_id].open = False

    def account_task(self, task_id: str, tick: int, detail: str = "") -> AuditRecord:
        """Emit the task-summary record; the task must be closed first."""
        with self._lock:
            account = self._tasks[task_id]
            if account.open:
                raise OpenTask(f"task {task_id!r} still accepts grants")
            return self.append(
                tick=tick,
                task_id=task_id,
                kind="task-summary",
                ops_used=account.ops_used,
                bytes_read=account.bytes_read,
                bytes_written=account.bytes_written,
                latency_injected=account.latency_injected,
                detail=detail,
            )

    def end_task(self, task_id: str, tick: int, detail: str = "") -> AuditRecord:
        self.close_task(task_id)
        return self.account_task(task_id, tick, detail)

    def run_detectors(
        self, tick: int, thresholds: "AnomalyThresholds | None" = None
    ) -> List[AuditRecord]:
        """Append any newly detected anomaly flags, skipping repeats."""
        thresholds = thresholds or AnomalyThresholds()
        with self._lock:
            flags = detect_anomalies(self._records, thresholds)
            appended = []
            for flag in flags:
                key = flag.fingerprint()
                if key in self._fired:
                    continue
                self._fired.add(key)
                appended.append(
                    self.append(
                        tick=tick, task_id=None, kind="anomaly", detail=flag.detail_line()
                    )
                )
            return appended


@dataclass(frozen=True)
class ChainState:
    head_hash: bytes
    length: int


def chain_state(records: Sequence[AuditRecord]) -> ChainState:
    head = records[-1].hash if records else GENESIS_HASH
    return ChainState(head_hash=head, length=len(records))


def verify_chain(records: Sequence[AuditRecord]) -> Tuple[bool, Optional[int]]:
    """Recheck every link; returns (ok, earliest bad seq or None)."""
    prev = GENESIS_HASH
    for index, record in enumerate(records):
        if record.seq != index:
            return False, index
        if record.prev_hash != prev:
            return False, index
        if record.compute_hash() != record.hash:
            return False, index
        prev = record.hash
    return True, None


def write_log(records: Iterable[AuditRecord], path: "str | Path") -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(record.to_line())
            handle.write("\n")


def read_log(path: "str | Path") -> List[AuditRecord]:
    records = []
    with open(path, "r", encoding="utf-8", newline="\n") as handle:
        for number, line in enumerate(handle):
            try:
                records.append(record_from_line(line))
            except ValueError as exc:
                raise ValueError(f"line {number}: {exc}") from exc
    return records


def verify_file(path: "str | Path") -> Tuple[bool, Optional[int], int]:
    """Parse and verify a dumped log, also rejecting non-canonical lines.

    Returns (ok, first_bad_seq, record_count).
    """
    try:
        records = read_log(path)
    except ValueError:
        return False, None, 0
    for index, record in enumerate(records):
        original = record.to_line()
        reparsed = record_from_line(original).to_line()
        if original != reparsed:
            return False, index, len(records)
    ok, bad = verify_chain(records)
    return ok, bad, len(records)


@dataclass(frozen=True)
class AnomalyThresholds:
    """Detector knobs; the concept is from the literature, the numbers are ours."""

    window_tasks: int = 10
    sandbag_ratio: float = 0.5
    quota_probe_count: int = 5

    def __post_init__(self) -> None:
        if self.window_tasks < 1:
            raise ValueError("window_tasks must be >= 1")
        if not 0 < self.sandbag_ratio < 1:
            raise ValueError("sandbag_ratio must lie in (0, 1)")
        if self.quota_probe_count < 1:
            raise ValueError("quota_probe_count must be >= 1")


@dataclass(frozen=True)
class AnomalyFlag:
    name: str
    detail: str

    def detail_line(self) -> str:
        return f"{self.name} {self.detail}" if self.detail else self.name

    def fingerprint(self) -> str:
        return self.detail_line()


def detect_anomalies(
    records: Sequence[AuditRecord], thresholds: "AnomalyThresholds | None" = None
) -> List[AnomalyFlag]:
    """Pure scan for the four precursor signals over a record window."""
    thresholds = thresholds or AnomalyThresholds()
    flags: List[AnomalyFlag] = []
    n = thresholds.window_tasks

    summaries = [r for r in records if r.kind == "task-summary"]
    if len(summaries) >= 2 * n:
        recent = summaries[-n:]
        prior = summaries[-2 * n : -n]
        recent_mean = sum(r.ops_used for r in recent) / n
        prior_mean = sum(r.ops_used for r in prior) / n
        if prior_mean > 0 and recent_mean <= thresholds.sandbag_ratio * prior_mean:
            flags.append(
                AnomalyFlag(
                    FLAG_SANDBAGGING,
                    f"recent_mean={recent_mean:.1f} prior_mean={prior_mean:.1f} "
                    f"at={len(summaries)}",
                )
            )

    # The probe window: records from the start of the N-th most recent task
    # summary's task onward, so probing pressure is judged per recent work.
    if len(summaries) > n:
        cutoff = summaries[-(n + 1)].seq + 1
    else:
        cutoff = 0
    refusals = [
        r
        for r in records[cutoff:]
        if r.detail.startswith(REFUSAL_PREFIXES)
    ]
    if len(refusals) >= thresholds.quota_probe_count:
        flags.append(
            AnomalyFlag(
                FLAG_QUOTA_PROBE,
                f"count={len(refusals)} since_seq={cutoff} at={len(records)}",
            )
        )

    for record in records:
        if record.kind != "anomaly" and record.detail.startswith(SELF_INSPECTION_PREFIX):
            flags.append(
                AnomalyFlag(FLAG_SELF_INSPECTION, f"seq={record.seq} {record.detail}")
            )

    ok, bad = verify_chain(records)
    if not ok:
        flags.append(AnomalyFlag(FLAG_TAMPER, f"first_bad_seq={bad}"))
    return flags
