"""mindcap: a capability governor that keeps a sandboxed agent at human scale.

Wraps a pluggable decision-making agent in quantified limits taken from the
human-performance literature: bounded storage, a handful of working-memory
slots, throttled memory bandwidth, entropy-linear decision latency, capped
perception, and a pipeline of safety biases; every grant lands in a
tamper-evident audit chain watched by a live supervisor channel.
"""

from .audit import (
    AnomalyFlag,
    AnomalyThresholds,
    AuditRecord,
    AuditTrail,
    detect_anomalies,
    verify_chain,
)
from .baselines import (
    BaselineProfile,
    ResourceBudget,
    STORAGE_CEILING_BITS,
    estimate_synapse_capacity,
    human_baseline,
    validate_budget,
)
from .biases import (
    ActionCandidate,
    BiasConfig,
    Decision,
    DecisionContext,
    EmtOutcome,
    apply_bias,
    apply_pipeline,
    emt_decide,
    inject_mistake,
    spotlight_adjust,
)
from .errors import (
    DuplicateKey,
    GlanceCapExceeded,
    InvalidBudget,
    InvalidScenario,
    MalformedExpression,
    MindcapError,
    MissingKey,
    NonNormalized,
    QuotaExceeded,
    ReservedKey,
    UnknownBias,
    UnsatisfiableRequest,
)
from .governor import LatencyModel, VirtualClock, charge_ops, entropy
from .guard import Guard, Seal, seal, verify
from .memory import (
    Chunk,
    LongTermStore,
    TokenBucket,
    TwoTapeMemory,
    WorkingMemory,
)
from .perception import GLANCE_CAP_BITS, Stimulus, downscale
from .runner import Report, Scenario, load_scenario, parse_scenario, run_scenario
from .telemetry import TelemetrySnapshot, fold_telemetry

__version__ = "0.1.0"

__all__ = [
    "ActionCandidate",
    "AnomalyFlag",
    "AnomalyThresholds",
    "AuditRecord",
    "AuditTrail",
    "BaselineProfile",
    "BiasConfig",
    "Chunk",
    "Decision",
    "DecisionContext",
    "DuplicateKey",
    "EmtOutcome",
    "GLANCE_CAP_BITS",
    "GlanceCapExceeded",
    "Guard",
    "InvalidBudget",
    "InvalidScenario",
    "LatencyModel",
    "LongTermStore",
    "MalformedExpression",
    "MindcapError",
    "MissingKey",
    "NonNormalized",
    "QuotaExceeded",
    "Report",
    "ReservedKey",
    "ResourceBudget",
    "STORAGE_CEILING_BITS",
    "Scenario",
    "Seal",
    "Stimulus",
    "TelemetrySnapshot",
    "TokenBucket",
    "TwoTapeMemory",
    "UnknownBias",
    "UnsatisfiableRequest",
    "VirtualClock",
    "WorkingMemory",
    "apply_bias",
    "apply_pipeline",
    "charge_ops",
    "detect_anomalies",
    "downscale",
    "emt_decide",
    "entropy",
    "estimate_synapse_capacity",
    "fold_telemetry",
    "human_baseline",
    "inject_mistake",
    "load_scenario",
    "parse_scenario",
    "run_scenario",
    "seal",
    "spotlight_adjust",
    "validate_budget",
    "verify",
    "verify_chain",
]
