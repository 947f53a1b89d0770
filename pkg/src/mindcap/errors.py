"""Exception taxonomy shared across the sandbox runtime."""


class MindcapError(Exception):
    """Base class for all sandbox errors."""


class QuotaExceeded(MindcapError):
    """A write would push long-term storage past its capacity."""

    def __init__(self, key: str, size_bits: int, used_bits: int, capacity_bits: int):
        self.key = key
        self.size_bits = size_bits
        self.used_bits = used_bits
        self.capacity_bits = capacity_bits
        super().__init__(
            f"write of {size_bits} bits to {key!r} exceeds capacity "
            f"({used_bits}/{capacity_bits} bits used)"
        )


class DuplicateKey(MindcapError):
    """Key already present; overwrite requires an explicit delete first."""


class MissingKey(MindcapError):
    """Key not present in the long-term store."""


class ReservedKey(MindcapError):
    """Key prefix reserved for sandbox internals; agents may not use it."""


class UnsatisfiableRequest(MindcapError):
    """A single token grant larger than the bucket burst can never succeed."""


class NonNormalized(MindcapError):
    """Probabilities are negative or do not sum to one."""


class UnknownBias(MindcapError):
    """Bias id is not one of the supported decision filters."""


class MalformedExpression(MindcapError):
    """Quiz expression outside the supported +, -, x integer grammar."""


class InvalidBudget(MindcapError):
    """Budget fails validation and may not be installed or sealed."""


class InvalidScenario(MindcapError):
    """Scenario config is incomplete or fails budget validation."""


class OpenTask(MindcapError):
    """Task summary requested while the task can still receive grants."""


class GlanceCapExceeded(MindcapError):
    """Stimulus larger than the single-glance input cap."""


class StoreFormatError(MindcapError):
    """Persisted store snapshot is truncated or fails its integrity trailer."""


class IllegalTransition(MindcapError):
    """Supervisor command not valid in the current run state."""


class BadToken(MindcapError):
    """Supervisor command carried a wrong or missing token."""
