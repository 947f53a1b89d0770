"""Virtual clock, entropy, Hick latency, perceptual delay, op charging."""

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mindcap.baselines import human_baseline
from mindcap.errors import NonNormalized, UnsatisfiableRequest
from mindcap.governor import (
    LatencyModel,
    VirtualClock,
    charge_ops,
    decision_latency,
    entropy,
    ops_bucket_from_budget,
    perceptual_delay,
)
from mindcap.memory import TokenBucket


def test_clock_advances_exact_multiples():
    clock = VirtualClock(1000)
    assert clock.advance_ms(100.0) == 100
    assert clock.now == 100
    assert clock.now_ms == 100.0


def test_clock_rounds_partial_ticks_up():
    clock = VirtualClock(1000)
    assert clock.advance_ms(0.4) == 1
    assert clock.advance_ms(0.0) == 0
    assert clock.advance_ms(2.5) == 3
    assert clock.now == 4


def test_clock_exact_boundary_does_not_overshoot():
    # 1/3 ms ticks: three of them are exactly 1 ms despite float error
    clock = VirtualClock(3000)
    assert clock.advance_ms(1.0) == 3


def test_clock_rejects_backwards():
    clock = VirtualClock()
    with pytest.raises(ValueError):
        clock.advance_ms(-1.0)
    with pytest.raises(ValueError):
        clock.advance_ticks(-1)
    with pytest.raises(ValueError):
        VirtualClock(0)


def test_entropy_uniform_cases():
    assert entropy([0.25, 0.25, 0.25, 0.25]) == 2.0
    assert entropy([0.5, 0.5]) == 1.0
    assert entropy([1.0]) == 0.0
    assert entropy([1.0, 0.0]) == 0.0


def test_entropy_rejects_non_distributions():
    with pytest.raises(NonNormalized):
        entropy([])
    with pytest.raises(NonNormalized):
        entropy([0.5, -0.1, 0.6])
    with pytest.raises(NonNormalized):
        entropy([0.5, 0.6])
    # within the 1e-9 normalization tolerance is accepted
    assert entropy([0.5, 0.5 + 5e-10]) > 0.999


@given(st.lists(st.floats(min_value=1e-6, max_value=1.0), min_size=1, max_size=12))
def test_entropy_bounds_property(weights):
    total = math.fsum(weights)
    dist = [w / total for w in weights]
    h = entropy(dist)
    assert -1e-12 <= h <= math.log2(len(dist)) + 1e-9
    # permutation invariance
    assert entropy(list(reversed(dist))) == pytest.approx(h, abs=1e-12)


def test_decision_latency_spec_example():
    # four equally likely options: 200 + 150 * 2 bits = 500 ms
    model = LatencyModel(latency_base=200.0, latency_per_bit=150.0)
    assert model.decision_latency([0.25] * 4) == 500.0
    assert decision_latency(model, [0.5, 0.5]) == 350.0
    # a certain choice costs only the base
    assert model.decision_latency([1.0]) == 200.0


def test_perceptual_delay_saturates():
    model = LatencyModel(latency_base=200.0, latency_per_bit=150.0)
    assert model.perceptual_delay(0) == 10.0
    assert model.perceptual_delay(15_000) == 55.0
    assert model.perceptual_delay(30_000) == 100.0
    assert perceptual_delay(model, 10**9) == 100.0
    with pytest.raises(ValueError):
        model.perceptual_delay(-1)


def test_latency_model_validation():
    with pytest.raises(ValueError):
        LatencyModel(latency_base=-1.0, latency_per_bit=150.0)
    with pytest.raises(ValueError):
        LatencyModel(latency_base=200.0, latency_per_bit=0.0)
    with pytest.raises(ValueError):
        LatencyModel(latency_base=200.0, latency_per_bit=150.0, perceptual_min=200.0)
    with pytest.raises(ValueError):
        LatencyModel(latency_base=200.0, latency_per_bit=150.0, complexity_ref=0.0)


def test_latency_model_from_budget():
    budget = human_baseline("turing-minimal")
    model = LatencyModel.from_budget(budget)
    assert model.latency_base == budget.latency_base
    assert model.latency_per_bit == budget.latency_per_bit
    assert model.perceptual_floor == budget.perceptual_floor


def test_charge_ops_full_bucket_is_free():
    clock = VirtualClock(1000)
    bucket = TokenBucket(rate=100.0, burst=100)
    assert charge_ops(clock, bucket, 60) == 0.0
    assert clock.now == 0


def test_charge_ops_empty_bucket_waits():
    # empty bucket at 100 ops/s: 100 ops wait a full second of virtual time
    clock = VirtualClock(1000)
    bucket = TokenBucket(rate=100.0, burst=100, tokens=0.0)
    wait = charge_ops(clock, bucket, 100)
    assert wait == 1000.0
    assert clock.now == 1000


def test_charge_ops_edge_cases():
    clock = VirtualClock(1000)
    bucket = TokenBucket(rate=100.0, burst=100)
    assert charge_ops(clock, bucket, 0) == 0.0
    with pytest.raises(ValueError):
        charge_ops(clock, bucket, -1)
    with pytest.raises(UnsatisfiableRequest):
        charge_ops(clock, bucket, 101)
    assert clock.now == 0  # failed charges never move time


def test_ops_bucket_from_budget():
    budget = human_baseline("turing-minimal")
    bucket = ops_bucket_from_budget(budget)
    assert bucket.rate == budget.ops_per_second
    assert bucket.burst == budget.ops_burst
    assert bucket.tokens == budget.ops_burst
