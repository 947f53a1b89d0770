"""Simulated-time governor: operation quotas and reaction-time modeling.

Every step the agent takes is charged here.  Deciding costs time linear in
the Shannon entropy of the alternatives, perceiving costs time that grows
with stimulus complexity and saturates for complex images, and operations
drain a token bucket whose waits advance a deterministic virtual clock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .baselines import ResourceBudget
from .errors import NonNormalized
from .memory import TokenBucket

NORMALIZATION_TOLERANCE = 1e-9
DEFAULT_PERCEPTUAL_MIN_MS = 10.0
DEFAULT_COMPLEXITY_REF_BITS = 30_000.0  # a 75x50 8-bit glance


class VirtualClock:
    """Integer tick counter; time moves only when something is charged."""

    def __init__(self, tick_rate: int = 1000):
        if tick_rate < 1:
            raise ValueError("tick_rate must be at least 1 Hz")
        self.tick_rate = int(tick_rate)
        self._now = 0

    @property
    def now(self) -> int:
        return self._now

    @property
    def now_ms(self) -> float:
        return self._now * 1000.0 / self.tick_rate

    def advance_ms(self, duration_ms: float) -> int:
        """Advance by at least duration_ms, returning ticks moved.

        Rounds up so simulated time never lags a charged duration; the tiny
        slack keeps exact multiples of the tick length from overshooting.
        """
        if duration_ms < 0:
            raise ValueError("cannot advance the clock backwards")
        ticks = math.ceil(duration_ms * self.tick_rate / 1000.0 - 1e-9)
        ticks = max(ticks, 0)
        self._now += ticks
        return ticks

    def advance_ticks(self, ticks: int) -> None:
        if ticks < 0:
            raise ValueError("cannot advance the clock backwards")
        self._now += ticks


def entropy(distribution: Sequence[float]) -> float:
    """Shannon entropy in bits of a normalized probability vector."""
    if not distribution:
        raise NonNormalized("empty distribution")
    for p in distribution:
        if p < 0:
            raise NonNormalized(f"negative probability {p}")
    total = math.fsum(distribution)
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise NonNormalized(f"probabilities sum to {total!r}, not 1")
    return -math.fsum(p * math.log2(p) for p in distribution if p > 0.0)


@dataclass(frozen=True)
class LatencyModel:
    """Hick's-law decision timing plus a saturating perceptual delay."""

    latency_base: float
    latency_per_bit: float
    perceptual_floor: float = 100.0
    perceptual_min: float = DEFAULT_PERCEPTUAL_MIN_MS
    complexity_ref: float = DEFAULT_COMPLEXITY_REF_BITS

    def __post_init__(self) -> None:
        if self.latency_base < 0:
            raise ValueError("latency_base must be >= 0")
        if self.latency_per_bit <= 0:
            raise ValueError("latency_per_bit must be positive")
        if not 0 <= self.perceptual_min <= self.perceptual_floor:
            raise ValueError("need 0 <= perceptual_min <= perceptual_floor")
        if self.complexity_ref <= 0:
            raise ValueError("complexity_ref must be positive")

    @classmethod
    def from_budget(cls, budget: ResourceBudget) -> "LatencyModel":
        return cls(
            latency_base=budget.latency_base,
            latency_per_bit=budget.latency_per_bit,
            perceptual_floor=budget.perceptual_floor,
        )

    def decision_latency(self, distribution: Sequence[float]) -> float:
        """base + per_bit * H(distribution), in milliseconds."""
        return self.latency_base + self.latency_per_bit * entropy(distribution)

    def perceptual_delay(self, stimulus_complexity: float) -> float:
        """Linear from the minimum up to the floor, saturating at the floor."""
        if stimulus_complexity < 0:
            raise ValueError("stimulus_complexity must be >= 0")
        fraction = min(1.0, stimulus_complexity / self.complexity_ref)
        return self.perceptual_min + (self.perceptual_floor - self.perceptual_min) * fraction


def decision_latency(model: LatencyModel, distribution: Sequence[float]) -> float:
    return model.decision_latency(distribution)


def perceptual_delay(model: LatencyModel, stimulus_complexity: float) -> float:
    return model.perceptual_delay(stimulus_complexity)


def charge_ops(clock: VirtualClock, bucket: TokenBucket, n: int) -> float:
    """Debit n operations, advancing the clock by any throttle wait.

    Returns the wait in milliseconds.  A request above the bucket burst
    propagates UnsatisfiableRequest untouched.
    """
    if n < 0:
        raise ValueError("operation count must be >= 0")
    if n == 0:
        return 0.0
    wait_ms = bucket.throttle(n, clock.now_ms)
    if wait_ms > 0:
        clock.advance_ms(wait_ms)
    return wait_ms


def ops_bucket_from_budget(budget: ResourceBudget) -> TokenBucket:
    return TokenBucket(rate=budget.ops_per_second, burst=budget.ops_burst)
