"""Counter-based deterministic random source.

Every random draw in the sandbox flows through this generator so that a
scenario seed reproduces bit-identical audit logs on any platform.  The
construction is a plain counter-mode PRF: draw ``i`` from a stream keyed by
``K`` is ``SHA-256(K || i)``.  Substreams are derived by hashing the parent
key with a label path, so independent purposes (question generation, mistake
injection, fuzz traces) never share a stream.
"""

from __future__ import annotations

import hashlib
from typing import Sequence


def _to_key(seed: "int | bytes") -> bytes:
    if isinstance(seed, bytes):
        return hashlib.sha256(b"key:" + seed).digest()
    if seed < 0:
        raise ValueError("seed must be non-negative")
    return hashlib.sha256(b"seed:" + seed.to_bytes(16, "big")).digest()


class CounterRng:
    """SHA-256 counter-mode generator with labelled substream derivation."""

    def __init__(self, seed: "int | bytes" = 0):
        self._key = _to_key(seed)
        self._counter = 0

    def derive(self, *labels: "str | int") -> "CounterRng":
        """Child generator for an independent, named substream."""
        h = hashlib.sha256(self._key)
        for label in labels:
            part = str(label).encode("utf-8")
            h.update(len(part).to_bytes(4, "big"))
            h.update(part)
        child = CounterRng.__new__(CounterRng)
        child._key = h.digest()
        child._counter = 0
        return child

    def next_u64(self) -> int:
        block = hashlib.sha256(self._key + self._counter.to_bytes(8, "big")).digest()
        self._counter += 1
        return int.from_bytes(block[:8], "big")

    def random(self) -> float:
        """Uniform float in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) / (1 << 53)

    def randrange(self, n: int) -> int:
        """Uniform integer in [0, n), rejection-sampled to avoid modulo bias."""
        if n <= 0:
            raise ValueError("randrange needs n >= 1")
        span = (1 << 64) - ((1 << 64) % n)
        while True:
            v = self.next_u64()
            if v < span:
                return v % n

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in [lo, hi], both ends inclusive."""
        if hi < lo:
            raise ValueError("empty range")
        return lo + self.randrange(hi - lo + 1)

    def choice(self, seq: Sequence):
        if not seq:
            raise ValueError("empty sequence")
        return seq[self.randrange(len(seq))]

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.randrange(i + 1)
            items[i], items[j] = items[j], items[i]
