"""Human-scale reference figures and named budget profiles.

Every numeric limit the sandbox enforces is declared here once, as a named
constant with its provenance in the surrounding literature on human cognition
(storage estimates, Miller's 7+/-2 span, Hick's law timing, neuron counts).
Profiles bundle the constants into complete, validated resource envelopes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, fields, replace
from typing import Dict, List, Mapping, Tuple

from .config import Value, dump_config_text

# Storage.  Classic estimates put long-term human storage between 10^10 and
# 10^15 bits; 10^7 bits is the famous "practicable" lower figure and 10^9 the
# companion estimate for conversational competence.  The hard ceiling is
# 10 gigaBYTES: enough compressed text to carry an offline copy of a full
# encyclopedia, which is exactly the capability the ceiling exists to deny.
STORAGE_PRACTICAL_BITS = 10**7
STORAGE_CONVERSATIONAL_BITS = 10**9
STORAGE_CEILING_BITS = 8 * 10**10
BRAIN_STORAGE_BITS_LOW = 10**10
BRAIN_STORAGE_BITS_HIGH = 10**15

# Neural substrate numbers behind the storage estimates.
NEURON_COUNT = 10**11
SYNAPSES_PER_NEURON = 5000
BRAIN_SYNAPSE_COUNT = NEURON_COUNT * SYNAPSES_PER_NEURON  # 5 x 10^14
DEFAULT_BITS_PER_SYNAPSE = 1  # synapses may encode more; kept a parameter

# Processing and compute.
WM_SLOTS_MIN = 5
WM_SLOTS_DEFAULT = 7
WM_SLOTS_MAX = 9
POINTER_CACHE_STRICT_SLOTS = 3  # two-tape model's "two or three pointers";
#   below the installable [5, 9] band, usable only by constructing a working
#   memory directly, never via a budget
COMPLEX_IMAGE_MS = 100.0
BRAIN_OPS_PER_SECOND = 10**17  # upper-bound estimate from synapse counting
WHOLE_BRAIN_REPLICATION_MIPS = 100  # robotics-derived whole-function estimate
NEURON_PEAK_HZ = 200

# Rhythms observed in cortical activity, reference only; the scheduler
# deliberately does not run at brain-band rates.
FREQUENCY_BANDS_HZ: Dict[str, Tuple[int, int]] = {
    "theta": (5, 8),
    "alpha": (9, 12),
    "beta": (14, 28),
    "gamma": (40, 80),
}

# Machine-side bandwidth figures the memory throttles must stay far below.
REFERENCE_RAM_BANDWIDTH = 10 * 10**9  # bytes/s
REFERENCE_DISK_BANDWIDTH = 100 * 10**6
REFERENCE_CPU_BANDWIDTH = 25 * 10**9

# Defaults for installable profiles.  No task-granular human ops/s figure
# exists, so the quota is a deliberately conservative, configurable default.
DEFAULT_OPS_PER_SECOND = 10**6
DEFAULT_OPS_BURST = 10**4
DEFAULT_READ_BANDWIDTH = 10**6   # bytes/s, ~4 orders below RAM
DEFAULT_WRITE_BANDWIDTH = 10**5  # writes are the slow direction
DEFAULT_LATENCY_BASE_MS = 200.0
DEFAULT_LATENCY_PER_BIT_MS = 150.0
DEFAULT_TICK_RATE_HZ = 1000


class BaselineProfile(enum.Enum):
    """Named budget profiles; BRAIN_REFERENCE is inspect-only."""

    TURING_MINIMAL = "turing-minimal"
    TURING_PRACTICAL = "turing-practical"
    WIKI_CEILING = "wiki-ceiling"
    BRAIN_REFERENCE = "brain-reference"

    @classmethod
    def parse(cls, name: "str | BaselineProfile") -> "BaselineProfile":
        if isinstance(name, cls):
            return name
        for member in cls:
            if member.value == name:
                return member
        raise ValueError(f"unknown profile {name!r}")


@dataclass(frozen=True)
class ResourceBudget:
    """The full resource envelope a sandbox run is governed by.

    Sizes are bits, durations milliseconds, bandwidths bytes per second.
    """

    storage_bits: int
    ops_per_second: int = DEFAULT_OPS_PER_SECOND
    ops_burst: int = DEFAULT_OPS_BURST
    read_bandwidth: int = DEFAULT_READ_BANDWIDTH
    write_bandwidth: int = DEFAULT_WRITE_BANDWIDTH
    wm_slots: int = WM_SLOTS_DEFAULT
    latency_base: float = DEFAULT_LATENCY_BASE_MS
    latency_per_bit: float = DEFAULT_LATENCY_PER_BIT_MS
    perceptual_floor: float = COMPLEX_IMAGE_MS
    tick_rate: int = DEFAULT_TICK_RATE_HZ

    def replace(self, **changes) -> "ResourceBudget":
        return replace(self, **changes)

    def to_pairs(self) -> Dict[str, Value]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def to_config_text(self) -> str:
        return dump_config_text(self.to_pairs())

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Value]) -> "ResourceBudget":
        known = {}
        for name in cls.field_names():
            if name in mapping:
                known[name] = mapping[name]
        unknown = set(mapping) - set(cls.field_names())
        if unknown:
            raise ValueError(f"unknown budget fields: {sorted(unknown)}")
        return cls(**known)  # type: ignore[arg-type]


_PROFILES: Dict[BaselineProfile, ResourceBudget] = {
    BaselineProfile.TURING_MINIMAL: ResourceBudget(
        storage_bits=STORAGE_PRACTICAL_BITS,
    ),
    BaselineProfile.TURING_PRACTICAL: ResourceBudget(
        storage_bits=STORAGE_CONVERSATIONAL_BITS,
    ),
    BaselineProfile.WIKI_CEILING: ResourceBudget(
        storage_bits=STORAGE_CEILING_BITS,
    ),
    # Reference-only envelope at brain scale; fails validation by design so
    # it can never be installed as a live budget.
    BaselineProfile.BRAIN_REFERENCE: ResourceBudget(
        storage_bits=BRAIN_STORAGE_BITS_HIGH,
        ops_per_second=BRAIN_OPS_PER_SECOND,
        ops_burst=10**9,
        read_bandwidth=REFERENCE_RAM_BANDWIDTH,
        write_bandwidth=REFERENCE_DISK_BANDWIDTH,
    ),
}


def human_baseline(profile: "str | BaselineProfile") -> ResourceBudget:
    """Canonical budget for a named profile.  Pure; same profile, same budget."""
    return _PROFILES[BaselineProfile.parse(profile)]


def estimate_synapse_capacity(
    neurons: int, synapses_per_neuron: int, bits_per_synapse: int = DEFAULT_BITS_PER_SYNAPSE
) -> int:
    """Brain storage estimate by synapse counting, exact integer arithmetic."""
    for name, value in (
        ("neurons", neurons),
        ("synapses_per_neuron", synapses_per_neuron),
        ("bits_per_synapse", bits_per_synapse),
    ):
        if not isinstance(value, int) or isinstance(value, bool):
            raise TypeError(f"{name} must be an integer")
        if value < 0:
            raise ValueError(f"{name} must be >= 0")
    return neurons * synapses_per_neuron * bits_per_synapse


@dataclass(frozen=True)
class Violation:
    field: str
    message: str

    def __str__(self) -> str:
        return f"{self.field}: {self.message}"


@dataclass(frozen=True)
class ValidationResult:
    violations: Tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok

    def describe(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(str(v) for v in self.violations)


_POSITIVE_FIELDS = (
    "ops_per_second",
    "ops_burst",
    "read_bandwidth",
    "write_bandwidth",
    "latency_base",
    "latency_per_bit",
    "perceptual_floor",
    "tick_rate",
)


def validate_budget(budget: ResourceBudget) -> ValidationResult:
    """Check every budget invariant; violations are data, not exceptions."""
    problems: List[Violation] = []
    if budget.storage_bits < 1:
        problems.append(Violation("storage_bits", "must be at least 1 bit"))
    elif budget.storage_bits > STORAGE_CEILING_BITS:
        problems.append(
            Violation(
                "storage_bits",
                f"exceeds 10 Gb ceiling ({budget.storage_bits} > {STORAGE_CEILING_BITS} bits)",
            )
        )
    if budget.wm_slots < WM_SLOTS_MIN:
        problems.append(
            Violation("wm_slots", f"below 7±2 range [{WM_SLOTS_MIN}, {WM_SLOTS_MAX}]")
        )
    elif budget.wm_slots > WM_SLOTS_MAX:
        problems.append(
            Violation("wm_slots", f"above 7±2 range [{WM_SLOTS_MIN}, {WM_SLOTS_MAX}]")
        )
    for name in _POSITIVE_FIELDS:
        if getattr(budget, name) <= 0:
            problems.append(Violation(name, "must be strictly positive"))
    return ValidationResult(tuple(problems))
