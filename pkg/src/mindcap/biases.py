"""Safety biases as composable decision transformers.

Each bias is a one-line monotone adjustment to candidate utilities or to the
believed supervision probability, scaled by a per-bias weight where zero is
the exact identity.  A pipeline applies enabled biases in a configured order
and picks the adjusted argmax, with ties resolved toward inaction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Mapping, Optional, Tuple

from .errors import UnknownBias
from .rng import CounterRng

# Candidate tags the biases key on.
TAG_NOOP = "noop"
TAG_AGGRESSIVE = "aggressive"
TAG_HARMFUL_ACT = "harmful-act"
TAG_HARMFUL_OMISSION = "harmful-omission"
TAG_INFO_GATHERING = "information-gathering"
TAG_ENV_ALTERING = "environment-altering"
TAG_AUTHORITY = "authority-endorsed"
TAG_CANONICAL_USE = "canonical-use"
TAG_NOVEL_USE = "novel-use"

KNOWN_TAGS = frozenset(
    {
        TAG_NOOP,
        TAG_AGGRESSIVE,
        TAG_HARMFUL_ACT,
        TAG_HARMFUL_OMISSION,
        TAG_INFO_GATHERING,
        TAG_ENV_ALTERING,
        TAG_AUTHORITY,
        TAG_CANONICAL_USE,
        TAG_NOVEL_USE,
    }
)


@dataclass(frozen=True)
class ActionCandidate:
    """One agent-proposed action with the attributes the biases read."""

    id: str
    utility: float
    tags: frozenset = frozenset()
    exposure_count: int = 0
    group_frequency: float = 0.0
    justification_depth: int = 0
    plan_length: int = 1

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("candidate id must be non-empty")
        if not math.isfinite(self.utility):
            raise ValueError("utility must be finite")
        if self.exposure_count < 0:
            raise ValueError("exposure_count must be >= 0")
        if not 0.0 <= self.group_frequency <= 1.0:
            raise ValueError("group_frequency must lie in [0, 1]")
        if self.justification_depth < 0 or self.plan_length < 0:
            raise ValueError("depth and plan length must be >= 0")
        unknown = set(self.tags) - KNOWN_TAGS
        if unknown:
            raise ValueError(f"unknown tags: {sorted(unknown)}")
        object.__setattr__(self, "tags", frozenset(self.tags))


@dataclass(frozen=True)
class DecisionContext:
    """Everything the pipeline needs to rewrite one decision."""

    candidates: Tuple[ActionCandidate, ...]
    prior_choice: Optional[str] = None
    initial_values: Mapping[str, float] = field(default_factory=dict)
    observation_prob: float = 0.0
    evidence_alignment: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "candidates", tuple(self.candidates))
        if not self.candidates:
            raise ValueError("a decision needs at least one candidate")
        ids = [c.id for c in self.candidates]
        if len(set(ids)) != len(ids):
            raise ValueError("candidate ids must be unique")
        noops = [c for c in self.candidates if TAG_NOOP in c.tags]
        if len(noops) > 1:
            raise ValueError("at most one candidate may be tagged noop")
        if not 0.0 <= self.observation_prob <= 1.0:
            raise ValueError("observation_prob must lie in [0, 1]")

    def utilities(self) -> Dict[str, float]:
        return {c.id: c.utility for c in self.candidates}


def spotlight_adjust(prob: float, weight: float) -> float:
    """Inflate a supervision probability toward certainty; w >= 1 pins it at 1."""
    return min(1.0, prob + weight * (1.0 - prob))


def _map_utils(
    ctx: DecisionContext, fn: Callable[[ActionCandidate], float]
) -> DecisionContext:
    new = tuple(replace(c, utility=fn(c)) for c in ctx.candidates)
    return replace(ctx, candidates=new)


def _bias_spotlight(ctx: DecisionContext, w: float, cfg: "BiasConfig") -> DecisionContext:
    return replace(ctx, observation_prob=spotlight_adjust(ctx.observation_prob, w))


def _bias_confirmation(ctx, w, cfg):
    return _map_utils(ctx, lambda c: c.utility + w * ctx.evidence_alignment.get(c.id, 0.0))


def _bias_conservatism(ctx, w, cfg):
    blend = min(w, 1.0)

    def adjust(c: ActionCandidate) -> float:
        if c.id not in ctx.initial_values:
            return c.utility
        return (1.0 - blend) * c.utility + blend * ctx.initial_values[c.id]

    return _map_utils(ctx, adjust)


def _bias_planning_fallacy(ctx, w, cfg):
    horizon = cfg.planning_horizon
    return _map_utils(
        ctx, lambda c: c.utility - w * max(0, c.plan_length - horizon)
    )


def _bias_status_quo(ctx, w, cfg):
    def adjust(c: ActionCandidate) -> float:
        if TAG_NOOP in c.tags or c.id == ctx.prior_choice:
            return c.utility + w
        return c.utility

    return _map_utils(ctx, adjust)


def _bias_omission(ctx, w, cfg):
    def adjust(c: ActionCandidate) -> float:
        u = c.utility
        if TAG_HARMFUL_ACT in c.tags:
            u -= w * cfg.act_penalty
        if TAG_HARMFUL_OMISSION in c.tags:
            u -= w * cfg.omission_penalty
        return u

    return _map_utils(ctx, adjust)


def _bias_courtesy(ctx, w, cfg):
    return _map_utils(
        ctx, lambda c: c.utility - (w if TAG_AGGRESSIVE in c.tags else 0.0)
    )


def _bias_functional_fixedness(ctx, w, cfg):
    return _map_utils(
        ctx, lambda c: c.utility - (w if TAG_NOVEL_USE in c.tags else 0.0)
    )


def _bias_information(ctx, w, cfg):
    return _map_utils(
        ctx, lambda c: c.utility + (w if TAG_INFO_GATHERING in c.tags else 0.0)
    )


def _bias_mere_exposure(ctx, w, cfg):
    return _map_utils(ctx, lambda c: c.utility + w * math.log(1 + c.exposure_count))


def _bias_bandwagon(ctx, w, cfg):
    return _map_utils(ctx, lambda c: c.utility + w * c.group_frequency)


def _bias_authority(ctx, w, cfg):
    return _map_utils(
        ctx, lambda c: c.utility + (w if TAG_AUTHORITY in c.tags else 0.0)
    )


def _bias_system_justification(ctx, w, cfg):
    return _map_utils(
        ctx, lambda c: c.utility - (w if TAG_ENV_ALTERING in c.tags else 0.0)
    )


def _bias_processing_difficulty(ctx, w, cfg):
    return _map_utils(ctx, lambda c: c.utility + w * math.log(1 + c.justification_depth))


_BIAS_REGISTRY: Dict[str, Callable[[DecisionContext, float, "BiasConfig"], DecisionContext]] = {
    "spotlight": _bias_spotlight,
    "confirmation": _bias_confirmation,
    "conservatism": _bias_conservatism,
    "planning_fallacy": _bias_planning_fallacy,
    "status_quo": _bias_status_quo,
    "omission": _bias_omission,
    "courtesy": _bias_courtesy,
    "functional_fixedness": _bias_functional_fixedness,
    "information_bias": _bias_information,
    "mere_exposure": _bias_mere_exposure,
    "bandwagon": _bias_bandwagon,
    "authority": _bias_authority,
    "system_justification": _bias_system_justification,
    "processing_difficulty": _bias_processing_difficulty,
}

BIAS_IDS: Tuple[str, ...] = tuple(sorted(_BIAS_REGISTRY))

# Belief-level adjustments run before utility-level ones; within each group
# the order follows the bias list's presentation order.
DEFAULT_ORDER: Tuple[str, ...] = (
    "spotlight",
    "confirmation",
    "conservatism",
    "planning_fallacy",
    "status_quo",
    "omission",
    "courtesy",
    "functional_fixedness",
    "information_bias",
    "mere_exposure",
    "bandwagon",
    "authority",
    "system_justification",
    "processing_difficulty",
)

assert set(DEFAULT_ORDER) == set(BIAS_IDS)


@dataclass(frozen=True)
class BiasConfig:
    """Weights, ordering, and the error-management / mistake knobs."""

    weights: Mapping[str, float] = field(default_factory=dict)
    order: Tuple[str, ...] = DEFAULT_ORDER
    mistake_rate: float = 0.0
    false_positive_cost: float = 1.0
    false_negative_cost: float = 1.0
    planning_horizon: int = 3
    act_penalty: float = 1.0
    omission_penalty: float = 0.25

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", dict(self.weights))
        object.__setattr__(self, "order", tuple(self.order))
        for bias_id, w in self.weights.items():
            if bias_id not in _BIAS_REGISTRY:
                raise UnknownBias(f"no bias named {bias_id!r}")
            if w < 0:
                raise ValueError(f"weight for {bias_id} must be >= 0")
        if len(set(self.order)) != len(self.order):
            raise ValueError("pipeline order contains duplicates")
        for bias_id in self.order:
            if bias_id not in _BIAS_REGISTRY:
                raise UnknownBias(f"no bias named {bias_id!r}")
        enabled = {b for b, w in self.weights.items() if w > 0}
        missing = enabled - set(self.order)
        if missing:
            raise ValueError(f"enabled biases missing from order: {sorted(missing)}")
        if not 0.0 <= self.mistake_rate < 1.0:
            raise ValueError("mistake_rate must lie in [0, 1)")
        if self.false_positive_cost < 0 or self.false_negative_cost < 0:
            raise ValueError("error costs must be >= 0")

    def weight(self, bias_id: str) -> float:
        return self.weights.get(bias_id, 0.0)

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, object]) -> "BiasConfig":
        """Build from flat config keys: bias.<id>, emt.*, mistake_rate."""
        weights: Dict[str, float] = {}
        kwargs: Dict[str, object] = {}
        for key, value in mapping.items():
            if key.startswith("bias."):
                weights[key[len("bias.") :]] = float(value)  # type: ignore[arg-type]
            elif key == "emt.false_positive_cost":
                kwargs["false_positive_cost"] = float(value)  # type: ignore[arg-type]
            elif key == "emt.false_negative_cost":
                kwargs["false_negative_cost"] = float(value)  # type: ignore[arg-type]
            elif key == "mistake_rate":
                kwargs["mistake_rate"] = float(value)  # type: ignore[arg-type]
            elif key == "planning_horizon":
                kwargs["planning_horizon"] = int(value)  # type: ignore[call-overload]
            else:
                raise UnknownBias(f"unrecognized bias config key {key!r}")
        return cls(weights=weights, **kwargs)  # type: ignore[arg-type]


def apply_bias(bias_id: str, ctx: DecisionContext, cfg: BiasConfig) -> DecisionContext:
    """Apply one bias at its configured weight; weight 0 returns ctx itself."""
    try:
        fn = _BIAS_REGISTRY[bias_id]
    except KeyError:
        raise UnknownBias(f"no bias named {bias_id!r}") from None
    w = cfg.weight(bias_id)
    if w == 0.0:
        return ctx
    return fn(ctx, w, cfg)


@dataclass(frozen=True)
class Decision:
    """Pipeline outcome: the pick, the rewritten context, per-bias deltas."""

    chosen: str
    context: DecisionContext
    applied: Tuple[Tuple[str, float], ...]


def select_candidate(ctx: DecisionContext) -> str:
    """Adjusted argmax; ties go to the noop candidate, then smallest id."""
    best = max(c.utility for c in ctx.candidates)
    tied = [c for c in ctx.candidates if c.utility == best]
    for c in tied:
        if TAG_NOOP in c.tags:
            return c.id
    return min(c.id for c in tied)


def apply_pipeline(ctx: DecisionContext, cfg: BiasConfig) -> Decision:
    """Run enabled biases in order, recording each bias's largest adjustment."""
    applied: List[Tuple[str, float]] = []
    current = ctx
    for bias_id in cfg.order:
        if cfg.weight(bias_id) == 0.0:
            continue
        before_utils = current.utilities()
        before_obs = current.observation_prob
        current = apply_bias(bias_id, current, cfg)
        delta = max(
            abs(current.utilities()[cid] - before_utils[cid]) for cid in before_utils
        )
        delta = max(delta, abs(current.observation_prob - before_obs))
        applied.append((bias_id, delta))
    return Decision(
        chosen=select_candidate(current), context=current, applied=tuple(applied)
    )


class EmtOutcome(enum.Enum):
    ACT = "act"
    REFRAIN = "refrain"
    INDIFFERENT = "indifferent"


def emt_decide(
    p_threat: float, false_positive_cost: float, false_negative_cost: float
) -> EmtOutcome:
    """Minimize expected error cost; protective when misses are costlier.

    Acts exactly when p x FN_cost strictly exceeds (1-p) x FP_cost; the
    boundary resolves to refraining, and two zero costs mean indifference.
    """
    if not 0.0 <= p_threat <= 1.0:
        raise ValueError("p_threat must lie in [0, 1]")
    if false_positive_cost < 0 or false_negative_cost < 0:
        raise ValueError("costs must be >= 0")
    if false_positive_cost == 0 and false_negative_cost == 0:
        return EmtOutcome.INDIFFERENT
    miss_cost = p_threat * false_negative_cost
    false_alarm_cost = (1.0 - p_threat) * false_positive_cost
    return EmtOutcome.ACT if miss_cost > false_alarm_cost else EmtOutcome.REFRAIN


def inject_mistake(correct: int, mistake_rate: float, seed: int) -> int:
    """Deliberately miscompute with probability mistake_rate, else pass through.

    An injected error flips one low-order digit by +/-1 (a plausible slip,
    never the right answer).  Pure in (correct, mistake_rate, seed).
    """
    if not 0.0 <= mistake_rate < 1.0:
        raise ValueError("mistake_rate must lie in [0, 1)")
    rng = CounterRng(seed).derive("mistake")
    if rng.random() >= mistake_rate:
        return correct
    digits = len(str(abs(correct))) if correct else 1
    position = rng.randrange(min(digits, 3))
    magnitude = 10**position
    return correct + (magnitude if rng.random() < 0.5 else -magnitude)
