"""Two-tape memory: quota exactness, LRU behavior, bucket math, latencies."""

from collections import OrderedDict

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mindcap.baselines import human_baseline
from mindcap.errors import (
    DuplicateKey,
    MissingKey,
    QuotaExceeded,
    StoreFormatError,
    UnsatisfiableRequest,
)
from mindcap.memory import (
    Chunk,
    LongTermStore,
    TokenBucket,
    TwoTapeMemory,
    WorkingMemory,
    dump_store,
    restore_store,
)
from mindcap.rng import CounterRng


def test_chunk_sizes_in_bits():
    chunk = Chunk("k", b"abc")
    assert chunk.size_bits == 24
    assert chunk.size_bytes == 3
    with pytest.raises(ValueError):
        Chunk("", b"x")
    with pytest.raises(ValueError):
        Chunk("k", b"")


def test_store_write_read_delete():
    store = LongTermStore(1000)
    store.write("a", b"hello")
    assert store.read("a").payload == b"hello"
    assert store.used_bits == 40
    assert store.free_bits == 960
    assert "a" in store and len(store) == 1
    store.delete("a")
    assert store.used_bits == 0
    assert "a" not in store


def test_store_error_paths():
    store = LongTermStore(1000)
    store.write("a", b"x")
    with pytest.raises(DuplicateKey):
        store.write("a", b"y")
    with pytest.raises(MissingKey):
        store.read("zzz")
    with pytest.raises(MissingKey):
        store.delete("zzz")
    with pytest.raises(ValueError):
        LongTermStore(0)


def test_quota_boundary_is_bit_exact():
    # 80 bits of capacity: a 10-byte chunk exactly fills it
    store = LongTermStore(80)
    store.write("fill", b"0123456789")
    assert store.free_bits == 0
    with pytest.raises(QuotaExceeded):
        store.write("one-more", b"x")
    # 7 spare bits cannot take an 8-bit byte: off by exactly one bit
    tight = LongTermStore(87)
    tight.write("fill", b"0123456789")
    assert tight.free_bits == 7
    with pytest.raises(QuotaExceeded) as info:
        tight.write("spill", b"x")
    exc = info.value
    assert exc.used_bits + exc.size_bits == tight.capacity_bits + 1
    # one more bit of capacity and the same write fits
    loose = LongTermStore(88)
    loose.write("fill", b"0123456789")
    loose.write("spill", b"x")
    assert loose.free_bits == 0


def test_failed_write_leaves_store_untouched():
    store = LongTermStore(16)
    store.write("a", b"x")
    with pytest.raises(QuotaExceeded):
        store.write("b", b"too big")
    assert store.keys() == ["a"]
    assert store.used_bits == 8
    assert store.check_accounting()


@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 9), st.integers(1, 40)), max_size=60))
def test_store_accounting_invariant(ops):
    store = LongTermStore(800)
    shadow = {}
    for verb, key_index, size in ops:
        key = f"k{key_index}"
        if verb == 0:
            try:
                store.write(key, b"x" * size)
                shadow[key] = 8 * size
            except (DuplicateKey, QuotaExceeded):
                pass
        elif verb == 1:
            try:
                store.delete(key)
                del shadow[key]
            except MissingKey:
                pass
        else:
            try:
                store.read(key)
            except MissingKey:
                pass
        assert store.used_bits == sum(shadow.values())
        assert store.used_bits <= store.capacity_bits
        assert store.check_accounting()


def test_dump_restore_round_trip():
    store = LongTermStore(10_000)
    store.write("alpha", b"payload one")
    store.write("beta/2", bytes(range(256)))
    blob = dump_store(store)
    back = restore_store(blob, 10_000)
    assert back.used_bits == store.used_bits
    assert sorted(back.keys()) == sorted(store.keys())
    assert back.read("beta/2").payload == bytes(range(256))


def test_restore_rejects_corruption():
    store = LongTermStore(10_000)
    store.write("a", b"data")
    blob = dump_store(store)
    with pytest.raises(StoreFormatError, match="bad magic"):
        restore_store(b"NOPE" + blob[4:], 10_000)
    with pytest.raises(StoreFormatError, match="truncated"):
        restore_store(blob[:-4], 10_000)
    with pytest.raises(StoreFormatError, match="trailing"):
        restore_store(blob + b"\x00", 10_000)
    tampered = blob[:-1] + bytes([blob[-1] ^ 1])
    with pytest.raises(StoreFormatError, match="used_bits trailer"):
        restore_store(tampered, 10_000)


def test_restore_respects_capacity():
    store = LongTermStore(10_000)
    store.write("a", b"0123456789")
    blob = dump_store(store)
    with pytest.raises(QuotaExceeded):
        restore_store(blob, 40)


def test_wm_basic_lru():
    wm = WorkingMemory(3)
    assert wm.load("a") == (0, None)
    assert wm.load("b") == (1, None)
    assert wm.load("c") == (2, None)
    wm.load("a")  # refresh; b is now least recent
    slot, evicted = wm.load("d")
    assert evicted == "b"
    assert slot == 1  # reuses the victim's slot
    assert len(wm) == 3
    assert "b" not in wm and "a" in wm


def test_wm_drop_and_refill():
    wm = WorkingMemory(2)
    wm.load("a")
    wm.load("b")
    assert wm.drop("a")
    assert not wm.drop("ghost")
    slot, evicted = wm.load("c")
    assert evicted is None  # freed slot reused before any eviction
    assert set(wm.keys()) == {"b", "c"}
    with pytest.raises(ValueError):
        WorkingMemory(0)


@pytest.mark.parametrize("capacity", [5, 7, 9])
def test_wm_matches_reference_lru(capacity):
    wm = WorkingMemory(capacity)
    reference: "OrderedDict[str, None]" = OrderedDict()
    rng = CounterRng(capacity)
    for _ in range(2000):
        key = f"k{rng.randrange(25)}"
        _, evicted = wm.load(key)
        expected = None
        if key in reference:
            reference.move_to_end(key)
        else:
            if len(reference) == capacity:
                expected, _ = reference.popitem(last=False)
            reference[key] = None
        assert evicted == expected
        assert len(wm) <= capacity
        assert set(wm.keys()) == set(reference)


def test_bucket_starts_full_and_caps_at_burst():
    bucket = TokenBucket(rate=100.0, burst=50)
    assert bucket.tokens == 50.0
    bucket.refill(10_000.0)
    assert bucket.tokens == 50.0
    assert TokenBucket(rate=1.0, burst=10, tokens=99.0).tokens == 10.0


def test_bucket_throttle_examples():
    # empty bucket, rate 100 tokens/s: 50 tokens are a 500 ms wait
    bucket = TokenBucket(rate=100.0, burst=100, tokens=0.0)
    assert bucket.throttle(50, now_ms=0.0) == 500.0
    # the wait consumed everything accrued during it
    assert bucket.tokens == 0.0
    assert bucket.last_refill_ms == 500.0
    # a full bucket grants instantly
    full = TokenBucket(rate=100.0, burst=100)
    assert full.throttle(60, now_ms=0.0) == 0.0
    assert full.tokens == 40.0


def test_bucket_linear_refill():
    bucket = TokenBucket(rate=100.0, burst=100, tokens=0.0)
    assert bucket.available(250.0) == 25.0
    bucket.refill(250.0)
    assert bucket.tokens == 25.0
    # refill never runs backwards
    bucket.refill(100.0)
    assert bucket.tokens == 25.0


def test_bucket_rejects_over_burst_and_negative():
    bucket = TokenBucket(rate=100.0, burst=100)
    with pytest.raises(UnsatisfiableRequest):
        bucket.throttle(101, now_ms=0.0)
    with pytest.raises(ValueError):
        bucket.throttle(-1, now_ms=0.0)
    with pytest.raises(ValueError):
        TokenBucket(rate=0.0, burst=10)
    with pytest.raises(ValueError):
        TokenBucket(rate=1.0, burst=0)


@settings(max_examples=50)
@given(st.lists(st.floats(min_value=0.0, max_value=100.0), min_size=1, max_size=40))
def test_bucket_never_overdraws(amounts):
    bucket = TokenBucket(rate=77.0, burst=100)
    now = 0.0
    granted = 0.0
    for amount in amounts:
        wait = bucket.throttle(amount, now)
        now = max(now, bucket.last_refill_ms)
        granted += amount
        assert bucket.tokens >= -1e-9
        assert bucket.tokens <= bucket.burst + 1e-9
        # cumulative grants can never beat burst + rate * elapsed
        assert granted <= bucket.burst + 77.0 * now / 1000.0 + 1e-6


def _memory(write_rate=10**5, read_rate=10**6, slots=7, capacity=10**7):
    return TwoTapeMemory(
        store=LongTermStore(capacity),
        wm=WorkingMemory(slots),
        read_bucket=TokenBucket(rate=read_rate, burst=read_rate),
        write_bucket=TokenBucket(rate=write_rate, burst=write_rate),
    )


def test_write_latency_example():
    # 1000 bytes at 10^5 B/s is 10 ms transfer plus the 50 ms write penalty
    memory = _memory()
    receipt = memory.ltm_write("k", b"x" * 1000)
    assert receipt.latency_ms == 60.0
    assert receipt.size_bits == 8000


def test_read_hit_and_miss_latencies():
    memory = _memory()
    memory.ltm_write("k", b"x" * 1000)
    # first read has no cached pointer: 1 ms transfer + 200 ms recall
    payload, miss = memory.ltm_read("k")
    assert payload == b"x" * 1000
    assert not miss.wm_hit
    assert miss.latency_ms == 201.0
    # the pointer is now cached: pure transfer
    _, hit = memory.ltm_read("k")
    assert hit.wm_hit
    assert hit.latency_ms == 1.0


def test_read_miss_evicts_lru_pointer():
    memory = _memory(slots=2)
    for name in ("a", "b", "c"):
        memory.ltm_write(name, b"data")
    memory.ltm_read("a")
    memory.ltm_read("b")
    _, receipt = memory.ltm_read("c")
    assert receipt.evicted == "a"
    assert set(memory.wm.keys()) == {"b", "c"}


def test_write_does_not_touch_wm():
    memory = _memory()
    memory.ltm_write("k", b"abc")
    assert "k" not in memory.wm


def test_delete_frees_quota_and_pointer():
    memory = _memory(capacity=80)
    memory.ltm_write("k", b"0123456789")
    memory.ltm_read("k")
    receipt = memory.ltm_delete("k")
    assert receipt.wm_hit  # the pointer was resident and got dropped
    assert memory.store.used_bits == 0
    assert "k" not in memory.wm
    memory.ltm_write("again", b"0123456789")


def test_oversized_write_splits_across_bucket_bursts():
    # burst 1000 B, 2500 B write: grants of 1000/1000/500 with growing waits
    memory = TwoTapeMemory(
        store=LongTermStore(10**6),
        wm=WorkingMemory(5),
        read_bucket=TokenBucket(rate=1000.0, burst=1000),
        write_bucket=TokenBucket(rate=1000.0, burst=1000),
    )
    receipt = memory.ltm_write("big", b"x" * 2500)
    # waits: 0 + 1000 ms + 500 ms; transfer 2500 ms; penalty 50 ms
    assert receipt.latency_ms == pytest.approx(4050.0)


def test_quota_failure_costs_no_bandwidth():
    memory = _memory(capacity=80)
    memory.ltm_write("k", b"0123456789")
    before = memory.write_bucket.tokens
    with pytest.raises(QuotaExceeded):
        memory.ltm_write("spill", b"x")
    assert memory.write_bucket.tokens == before


def test_from_budget_wiring():
    budget = human_baseline("turing-minimal")
    memory = TwoTapeMemory.from_budget(budget)
    assert memory.store.capacity_bits == budget.storage_bits
    assert memory.wm.capacity == budget.wm_slots
    assert memory.read_bucket.rate == budget.read_bandwidth
    assert memory.read_bucket.burst == budget.read_bandwidth
    assert memory.write_bucket.rate == budget.write_bandwidth
    assert memory.write_penalty_ms == 50.0
    assert memory.recall_penalty_ms == 200.0
