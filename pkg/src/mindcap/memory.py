"""Two-tape memory: quota'd long-term store behind a small pointer cache.

Long-term storage is slow to write and fast to read given a cached pointer;
reads without a pointer pay a recall penalty and displace the least recently
used slot.  All traffic is metered through token buckets so sustained
throughput can never exceed the configured bandwidth.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Tuple

from .baselines import ResourceBudget, WM_SLOTS_MIN
from .errors import (
    DuplicateKey,
    MissingKey,
    QuotaExceeded,
    StoreFormatError,
    UnsatisfiableRequest,
)

DEFAULT_WRITE_PENALTY_MS = 50.0
DEFAULT_RECALL_PENALTY_MS = 200.0


@dataclass(frozen=True)
class Chunk:
    """An opaque unit of long-term memory, sized in bits."""

    key: str
    payload: bytes

    def __post_init__(self) -> None:
        if not self.key:
            raise ValueError("chunk key must be non-empty")
        if not self.payload:
            raise ValueError("chunk payload must be non-empty")

    @property
    def size_bits(self) -> int:
        return 8 * len(self.payload)

    @property
    def size_bytes(self) -> int:
        return len(self.payload)


class LongTermStore:
    """Keyed chunk storage with an exact bit-level quota.

    Mutations hold a lock so concurrent telemetry readers always observe
    used_bits equal to the sum of stored chunk sizes.
    """

    def __init__(self, capacity_bits: int):
        if capacity_bits < 1:
            raise ValueError("capacity_bits must be at least 1")
        self.capacity_bits = int(capacity_bits)
        self._chunks: Dict[str, Chunk] = {}
        self._used_bits = 0
        self._lock = threading.RLock()

    @property
    def used_bits(self) -> int:
        with self._lock:
            return self._used_bits

    @property
    def free_bits(self) -> int:
        with self._lock:
            return self.capacity_bits - self._used_bits

    def __len__(self) -> int:
        with self._lock:
            return len(self._chunks)

    def __contains__(self, key: str) -> bool:
        with self._lock:
            return key in self._chunks

    def keys(self) -> List[str]:
        with self._lock:
            return list(self._chunks)

    def write(self, key: str, payload: bytes) -> Chunk:
        """Store a new chunk or raise; the store never partially mutates."""
        chunk = Chunk(key, bytes(payload))
        with self._lock:
            if key in self._chunks:
                raise DuplicateKey(f"key {key!r} already stored; delete first")
            if self._used_bits + chunk.size_bits > self.capacity_bits:
                raise QuotaExceeded(
                    key=key,
                    size_bits=chunk.size_bits,
                    used_bits=self._used_bits,
                    capacity_bits=self.capacity_bits,
                )
            self._chunks[key] = chunk
            self._used_bits += chunk.size_bits
            return chunk

    def read(self, key: str) -> Chunk:
        with self._lock:
            try:
                return self._chunks[key]
            except KeyError:
                raise MissingKey(f"no chunk stored under {key!r}") from None

    def delete(self, key: str) -> Chunk:
        with self._lock:
            try:
                chunk = self._chunks.pop(key)
            except KeyError:
                raise MissingKey(f"no chunk stored under {key!r}") from None
            self._used_bits -= chunk.size_bits
            return chunk

    def snapshot_accounting(self) -> Tuple[int, int]:
        """Consistent (used_bits, chunk_count) pair for telemetry readers."""
        with self._lock:
            return self._used_bits, len(self._chunks)

    def check_accounting(self) -> bool:
        with self._lock:
            return self._used_bits == sum(c.size_bits for c in self._chunks.values())

    def iter_chunks(self) -> Iterator[Chunk]:
        with self._lock:
            items = list(self._chunks.values())
        return iter(items)


_STORE_MAGIC = b"MCSTORE1\n"


def dump_store(store: LongTermStore) -> bytes:
    """Serialize a store snapshot: magic, count, records, used_bits trailer."""
    out = [_STORE_MAGIC]
    chunks = list(store.iter_chunks())
    out.append(struct.pack(">Q", len(chunks)))
    for chunk in chunks:
        key_bytes = chunk.key.encode("utf-8")
        out.append(struct.pack(">I", len(key_bytes)))
        out.append(key_bytes)
        out.append(struct.pack(">Q", len(chunk.payload)))
        out.append(chunk.payload)
    out.append(struct.pack(">Q", store.used_bits))
    return b"".join(out)


def restore_store(data: bytes, capacity_bits: int) -> LongTermStore:
    """Rebuild a store from dump_store output, cross-checking the trailer."""
    view = memoryview(data)
    if bytes(view[: len(_STORE_MAGIC)]) != _STORE_MAGIC:
        raise StoreFormatError("bad magic; not a store snapshot")
    pos = len(_STORE_MAGIC)

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise StoreFormatError("truncated snapshot")
        piece = view[pos : pos + n]
        pos += n
        return piece

    (count,) = struct.unpack(">Q", take(8))
    store = LongTermStore(capacity_bits)
    for _ in range(count):
        (key_len,) = struct.unpack(">I", take(4))
        key = bytes(take(key_len)).decode("utf-8")
        (payload_len,) = struct.unpack(">Q", take(8))
        payload = bytes(take(payload_len))
        store.write(key, payload)
    (recorded_used,) = struct.unpack(">Q", take(8))
    if pos != len(view):
        raise StoreFormatError("trailing bytes after snapshot trailer")
    if recorded_used != store.used_bits:
        raise StoreFormatError(
            f"used_bits trailer {recorded_used} does not match content {store.used_bits}"
        )
    return store


class WorkingMemory:
    """Fixed number of chunk-pointer slots with least-recently-used eviction."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError("working memory needs at least one slot")
        self.capacity = int(capacity)
        self._slots: List[Optional[str]] = [None] * self.capacity
        self._recency: Dict[str, int] = {}
        self._clock = 0

    def __contains__(self, key: str) -> bool:
        return key in self._recency

    def __len__(self) -> int:
        return len(self._recency)

    @property
    def slots(self) -> Tuple[Optional[str], ...]:
        return tuple(self._slots)

    def keys(self) -> List[str]:
        return [k for k in self._slots if k is not None]

    def load(self, key: str) -> Tuple[int, Optional[str]]:
        """Place key in a slot, returning (slot index, evicted key or None).

        A key already resident keeps its slot and only refreshes recency.
        """
        self._clock += 1
        if key in self._recency:
            self._recency[key] = self._clock
            return self._slots.index(key), None
        evicted: Optional[str] = None
        if None in self._slots:
            slot = self._slots.index(None)
        else:
            victim = min(self._recency, key=self._recency.__getitem__)
            slot = self._slots.index(victim)
            del self._recency[victim]
            evicted = victim
        self._slots[slot] = key
        self._recency[key] = self._clock
        return slot, evicted

    def drop(self, key: str) -> bool:
        """Remove key if resident; keeps WM consistent with store deletes."""
        if key not in self._recency:
            return False
        del self._recency[key]
        self._slots[self._slots.index(key)] = None
        return True


@dataclass
class TokenBucket:
    """Linear-refill token bucket over simulated milliseconds.

    rate is tokens per second; tokens never leaves [0, burst].
    """

    rate: float
    burst: int
    tokens: float = field(default=-1.0)
    last_refill_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.rate <= 0:
            raise ValueError("rate must be positive")
        if self.burst < 1:
            raise ValueError("burst must be at least 1")
        if self.tokens < 0:
            self.tokens = float(self.burst)
        self.tokens = min(float(self.tokens), float(self.burst))

    def refill(self, now_ms: float) -> None:
        # last_refill_ms can sit in the simulated future after a debit that
        # included a wait; never refill backwards.
        if now_ms > self.last_refill_ms:
            elapsed_s = (now_ms - self.last_refill_ms) / 1000.0
            self.tokens = min(float(self.burst), self.tokens + self.rate * elapsed_s)
            self.last_refill_ms = now_ms

    def available(self, now_ms: float) -> float:
        if now_ms <= self.last_refill_ms:
            return self.tokens
        elapsed_s = (now_ms - self.last_refill_ms) / 1000.0
        return min(float(self.burst), self.tokens + self.rate * elapsed_s)

    def throttle(self, amount: float, now_ms: float) -> float:
        """Wait (ms) until amount tokens exist, then debit them.

        Returns the simulated wait; zero when the bucket already holds
        enough.  amount above burst can never be satisfied in one grant.
        """
        if amount < 0:
            raise ValueError("amount must be >= 0")
        if amount > self.burst:
            raise UnsatisfiableRequest(
                f"requested {amount} tokens but burst is {self.burst}; split the request"
            )
        self.refill(now_ms)
        if self.tokens >= amount:
            self.tokens -= amount
            return 0.0
        shortfall = amount - self.tokens
        wait_ms = shortfall * 1000.0 / self.rate
        # Everything accrued during the wait is consumed by this grant.
        self.tokens = 0.0
        self.last_refill_ms = max(now_ms, self.last_refill_ms) + wait_ms
        return wait_ms


@dataclass(frozen=True)
class MemoryReceipt:
    """Outcome of a metered memory operation."""

    key: str
    size_bits: int
    latency_ms: float
    wm_hit: bool = False
    evicted: Optional[str] = None


class TwoTapeMemory:
    """Binds store, working memory, and bandwidth buckets into one tape pair."""

    def __init__(
        self,
        store: LongTermStore,
        wm: WorkingMemory,
        read_bucket: TokenBucket,
        write_bucket: TokenBucket,
        write_penalty_ms: float = DEFAULT_WRITE_PENALTY_MS,
        recall_penalty_ms: float = DEFAULT_RECALL_PENALTY_MS,
    ):
        self.store = store
        self.wm = wm
        self.read_bucket = read_bucket
        self.write_bucket = write_bucket
        self.write_penalty_ms = float(write_penalty_ms)
        self.recall_penalty_ms = float(recall_penalty_ms)

    @classmethod
    def from_budget(cls, budget: ResourceBudget) -> "TwoTapeMemory":
        return cls(
            store=LongTermStore(budget.storage_bits),
            wm=WorkingMemory(max(budget.wm_slots, WM_SLOTS_MIN)),
            read_bucket=TokenBucket(rate=budget.read_bandwidth, burst=budget.read_bandwidth),
            write_bucket=TokenBucket(rate=budget.write_bandwidth, burst=budget.write_bandwidth),
        )

    def _debit(self, bucket: TokenBucket, amount: int, now_ms: float) -> float:
        """Debit amount tokens, splitting grants that exceed the burst."""
        wait_total = 0.0
        remaining = amount
        while remaining > 0:
            grant = min(remaining, bucket.burst)
            wait_total += bucket.throttle(grant, now_ms + wait_total)
            remaining -= grant
        return wait_total

    def ltm_write(self, key: str, payload: bytes, now_ms: float = 0.0) -> MemoryReceipt:
        """Slow-path store: quota check first, then bandwidth debit + penalty."""
        chunk = self.store.write(key, payload)  # atomic; raises before any debit
        wait_ms = self._debit(self.write_bucket, chunk.size_bytes, now_ms)
        transfer_ms = chunk.size_bytes / self.write_bucket.rate * 1000.0
        return MemoryReceipt(
            key=key,
            size_bits=chunk.size_bits,
            latency_ms=wait_ms + transfer_ms + self.write_penalty_ms,
        )

    def ltm_read(self, key: str, now_ms: float = 0.0) -> Tuple[bytes, MemoryReceipt]:
        """Fast with a cached pointer; a recall pays the penalty and loads WM."""
        chunk = self.store.read(key)
        wait_ms = self._debit(self.read_bucket, chunk.size_bytes, now_ms)
        transfer_ms = chunk.size_bytes / self.read_bucket.rate * 1000.0
        hit = key in self.wm
        evicted: Optional[str] = None
        latency_ms = wait_ms + transfer_ms
        if hit:
            self.wm.load(key)  # refresh recency only
        else:
            latency_ms += self.recall_penalty_ms
            _, evicted = self.wm.load(key)
        receipt = MemoryReceipt(
            key=key,
            size_bits=chunk.size_bits,
            latency_ms=latency_ms,
            wm_hit=hit,
            evicted=evicted,
        )
        return chunk.payload, receipt

    def ltm_delete(self, key: str) -> MemoryReceipt:
        """Free a chunk and drop any working-memory pointer to it."""
        chunk = self.store.delete(key)
        dropped = self.wm.drop(key)
        return MemoryReceipt(
            key=key, size_bits=chunk.size_bits, latency_ms=0.0, wm_hit=dropped
        )
