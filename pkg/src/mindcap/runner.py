"""Scenario harness: every agent step flows through the full governor stack.

A step is perceive (downscale, delay), propose, charge (ops bucket), bias
pipeline, decide (Hick latency), act.  Memory goes through a mediation
handle that logs every access and refuses reserved keys, so the agent can
never reach the store, the budget, or the audit trail directly.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .agents import (
    Agent,
    GridworldAgent,
    GridworldEnvironment,
    QuizAgent,
    QuizEnvironment,
)
from .audit import AnomalyThresholds, AuditRecord, AuditTrail
from .baselines import ResourceBudget, human_baseline, validate_budget
from .biases import (
    BiasConfig,
    DecisionContext,
    apply_pipeline,
    inject_mistake,
    spotlight_adjust,
)
from .config import Value, dump_config_text, parse_config_text
from .errors import (
    InvalidScenario,
    MissingKey,
    QuotaExceeded,
    ReservedKey,
    UnknownBias,
)
from .governor import LatencyModel, VirtualClock, charge_ops, ops_bucket_from_budget
from .guard import ChangeOutcome, Guard
from .memory import TwoTapeMemory
from .perception import Stimulus, downscale
from .rng import CounterRng

AGENT_IDS = ("quiz", "gridworld")

# Keys the agent must never touch; reads against them are self-inspection.
RESERVED_KEY_PREFIXES = ("seal/", "audit/")

DEFAULT_OPS_BASE = 10  # per-step overhead on top of one op per candidate


class RunKilled(Exception):
    """Raised inside the step loop when the supervisor kills the run."""


@dataclass(frozen=True)
class AgentStep:
    """One completed step; construction enforces the chosen-candidate rule."""

    observation: Stimulus
    context: DecisionContext
    chosen: str

    def __post_init__(self) -> None:
        ids = {c.id for c in self.context.candidates}
        if self.chosen not in ids:
            raise ValueError(f"chosen {self.chosen!r} not among candidates")


@dataclass(frozen=True)
class Scenario:
    """Everything that determines a run; the seed pins it bit-exactly."""

    name: str
    agent: str
    episodes: int
    seed: int
    profile: str = "turing-minimal"
    budget_overrides: Mapping[str, Value] = field(default_factory=dict)
    bias: BiasConfig = field(default_factory=BiasConfig)
    thresholds: AnomalyThresholds = field(default_factory=AnomalyThresholds)
    observation_prob: float = 0.0
    max_steps: int = 100

    def __post_init__(self) -> None:
        if self.agent not in AGENT_IDS:
            raise InvalidScenario(f"unknown agent {self.agent!r}; pick from {AGENT_IDS}")
        if self.episodes < 1:
            raise InvalidScenario("episodes must be >= 1")
        if self.max_steps < 1:
            raise InvalidScenario("max_steps must be >= 1")
        if not 0.0 <= self.observation_prob <= 1.0:
            raise InvalidScenario("observation_prob must lie in [0, 1]")

    def build_budget(self) -> ResourceBudget:
        try:
            budget = human_baseline(self.profile)
        except (KeyError, ValueError):
            raise InvalidScenario(f"unknown profile {self.profile!r}") from None
        if self.budget_overrides:
            try:
                budget = budget.replace(**dict(self.budget_overrides))
            except TypeError as exc:
                raise InvalidScenario(str(exc)) from None
        result = validate_budget(budget)
        if not result.ok:
            raise InvalidScenario(result.describe())
        return budget

    def policy_bytes(self) -> bytes:
        """Canonical policy blob the guard seals: agent id + decision knobs."""
        pairs: Dict[str, Value] = {
            "agent": self.agent,
            "mistake_rate": self.bias.mistake_rate,
            "planning_horizon": self.bias.planning_horizon,
            "emt.false_positive_cost": self.bias.false_positive_cost,
            "emt.false_negative_cost": self.bias.false_negative_cost,
        }
        for bias_id, weight in sorted(self.bias.weights.items()):
            pairs[f"bias.{bias_id}"] = weight
        return dump_config_text(pairs).encode("utf-8")


_SCENARIO_INT_KEYS = {"episodes", "seed", "max_steps"}
_SCENARIO_FLOAT_KEYS = {"observation_prob"}
_SCENARIO_STR_KEYS = {"name", "agent", "profile"}


def parse_scenario(text: str, name: str = "scenario") -> Scenario:
    """Read a scenario from the shared flat configuration format."""
    try:
        pairs = parse_config_text(text)
    except ValueError as exc:
        raise InvalidScenario(str(exc)) from None

    plain: Dict[str, Value] = {"name": name}
    budget_overrides: Dict[str, Value] = {}
    bias_pairs: Dict[str, Value] = {}
    anomaly_pairs: Dict[str, Value] = {}
    for key, value in pairs.items():
        if key.startswith("budget."):
            budget_overrides[key[len("budget.") :]] = value
        elif key.startswith(("bias.", "emt.")) or key in ("mistake_rate", "planning_horizon"):
            bias_pairs[key] = value
        elif key.startswith("anomaly."):
            anomaly_pairs[key[len("anomaly.") :]] = value
        elif key in _SCENARIO_INT_KEYS:
            plain[key] = int(value)  # type: ignore[call-overload]
        elif key in _SCENARIO_FLOAT_KEYS:
            plain[key] = float(value)  # type: ignore[arg-type]
        elif key in _SCENARIO_STR_KEYS:
            plain[key] = str(value)
        else:
            raise InvalidScenario(f"unknown scenario key {key!r}")

    for required in ("agent", "episodes", "seed"):
        if required not in plain:
            raise InvalidScenario(f"scenario missing required key {required!r}")
    try:
        bias = BiasConfig.from_mapping(bias_pairs)
        thresholds = AnomalyThresholds(
            **{k: (float(v) if k == "sandbag_ratio" else int(v)) for k, v in anomaly_pairs.items()}  # type: ignore[arg-type]
        )
    except (ValueError, TypeError, UnknownBias) as exc:
        raise InvalidScenario(str(exc)) from None
    return Scenario(
        budget_overrides=budget_overrides,
        bias=bias,
        thresholds=thresholds,
        **plain,  # type: ignore[arg-type]
    )


def load_scenario(path: "str | Path") -> Scenario:
    path = Path(path)
    return parse_scenario(path.read_text(encoding="utf-8"), name=path.stem)


class MemoryHandle:
    """The agent's only road to storage; every access leaves a record."""

    def __init__(self, run: "ScenarioRun"):
        self._run = run

    def _check_reserved(self, key: str, verb: str) -> None:
        if key.startswith(RESERVED_KEY_PREFIXES):
            run = self._run
            run.trail.append(
                tick=run.clock.now,
                task_id=run.current_task,
                kind="memory",
                detail=f"self-inspection key={key} verb={verb}",
            )
            raise ReservedKey(f"key {key!r} is outside the agent's memory space")

    def write(self, key: str, payload: bytes) -> None:
        run = self._run
        self._check_reserved(key, "write")
        try:
            receipt = run.memory.ltm_write(key, payload, now_ms=run.clock.now_ms)
        except QuotaExceeded as exc:
            run.trail.append(
                tick=run.clock.now,
                task_id=run.current_task,
                kind="memory",
                detail=f"quota-exceeded key={key} bits={exc.size_bits}",
            )
            raise
        run.clock.advance_ms(receipt.latency_ms)
        run._bytes_written += len(payload)
        run._latency += receipt.latency_ms
        run.trail.append(
            tick=run.clock.now,
            task_id=run.current_task,
            kind="memory",
            bytes_written=len(payload),
            latency_injected=receipt.latency_ms,
            detail=f"ltm-write key={key} bits={receipt.size_bits}",
        )

    def read(self, key: str) -> bytes:
        run = self._run
        self._check_reserved(key, "read")
        try:
            payload, receipt = run.memory.ltm_read(key, now_ms=run.clock.now_ms)
        except MissingKey:
            run.trail.append(
                tick=run.clock.now,
                task_id=run.current_task,
                kind="memory",
                detail=f"missing-key key={key}",
            )
            raise
        run.clock.advance_ms(receipt.latency_ms)
        run._bytes_read += len(payload)
        run._latency += receipt.latency_ms
        run.trail.append(
            tick=run.clock.now,
            task_id=run.current_task,
            kind="memory",
            bytes_read=len(payload),
            latency_injected=receipt.latency_ms,
            detail=(
                f"ltm-read key={key} hit={int(receipt.wm_hit)} "
                f"evicted={receipt.evicted or '-'}"
            ),
        )
        return payload

    def delete(self, key: str) -> None:
        run = self._run
        self._check_reserved(key, "delete")
        receipt = run.memory.ltm_delete(key)
        run.trail.append(
            tick=run.clock.now,
            task_id=run.current_task,
            kind="memory",
            detail=f"ltm-delete key={key} bits={receipt.size_bits} wm={int(receipt.wm_hit)}",
        )


class NullControl:
    """Gate used when no supervisor is attached: never blocks, never kills."""

    def wait_step(self) -> None:
        pass


@dataclass(frozen=True)
class EpisodeResult:
    task_id: str
    reward: float
    steps: int


@dataclass
class Report:
    """Run outcome; totals are accumulated live and must match the log fold."""

    scenario: str
    rewards: List[float]
    episodes: List[EpisodeResult]
    total_ops: int
    total_bytes_read: int
    total_bytes_written: int
    total_latency_ms: float
    flags: List[Tuple[str, str]]
    head_hash: str
    chain_length: int
    killed: bool = False
    trail: Optional[AuditTrail] = None
    run: Optional["ScenarioRun"] = None


class ScenarioRun:
    """Mutable state for one scenario execution."""

    def __init__(
        self,
        scenario: Scenario,
        control: Optional[NullControl] = None,
        pace_s: float = 0.0,
        wall_clock: bool = False,
    ):
        self.scenario = scenario
        self.wall_clock = wall_clock
        self.budget = scenario.build_budget()
        self.clock = VirtualClock(self.budget.tick_rate)
        self.trail = AuditTrail()
        self.memory = TwoTapeMemory.from_budget(self.budget)
        self.guard = Guard(
            scenario.policy_bytes(), self.budget, trail=self.trail, store=self.memory.store
        )
        self.ops_bucket = ops_bucket_from_budget(self.budget)
        self.latency_model = LatencyModel.from_budget(self.budget)
        self.handle = MemoryHandle(self)
        self.control = control or NullControl()
        self.pace_s = pace_s
        self.current_task: Optional[str] = None
        self.steps_taken = 0

        self._mistake_seeds = CounterRng(scenario.seed).derive("mistake-seeds")
        env_rng = CounterRng(scenario.seed).derive("env")
        self.agent: Agent
        if scenario.agent == "quiz":
            self.agent = QuizAgent()
            self.env = QuizEnvironment(env_rng)
        else:
            self.agent = GridworldAgent()
            self.env = GridworldEnvironment()

        # Live accumulators; the audit log is the authority they must match.
        self._ops = 0
        self._bytes_read = 0
        self._bytes_written = 0
        self._latency = 0.0

    # Budget fields that cannot take effect on running machinery.
    _IMMUTABLE_FIELDS = frozenset({"wm_slots", "tick_rate"})

    def apply_budget_change(self, changes: Mapping[str, object]):
        """Route a supervisor budget change through the guard, then adopt it."""
        frozen = self._IMMUTABLE_FIELDS & set(changes)
        if frozen:
            reason = f"cannot change mid-run: {', '.join(sorted(frozen))}"
            self.trail.append(
                tick=self.clock.now,
                task_id=None,
                kind="guard",
                detail=f"refused origin=supervisor change=[{','.join(sorted(changes))}] reason={reason}",
            )
            return ChangeOutcome(accepted=False, reason=reason)
        outcome = self.guard.request_change(
            "supervisor", budget_changes=changes, tick=self.clock.now
        )
        if outcome.accepted:
            new = self.guard.budget
            self.budget = new
            self.memory.store.capacity_bits = new.storage_bits
            self.ops_bucket.rate = float(new.ops_per_second)
            self.ops_bucket.burst = int(new.ops_burst)
            self.ops_bucket.tokens = min(self.ops_bucket.tokens, float(new.ops_burst))
            self.memory.read_bucket.rate = float(new.read_bandwidth)
            self.memory.write_bucket.rate = float(new.write_bandwidth)
            self.latency_model = LatencyModel.from_budget(new)
        return outcome

    def _believed_supervision(self) -> float:
        return spotlight_adjust(
            self.scenario.observation_prob, self.scenario.bias.weight("spotlight")
        )

    def _step(self, observation: Stimulus) -> Tuple[Optional[Stimulus], float, bool]:
        scenario = self.scenario
        self.control.wait_step()
        step_start_tick = self.clock.now

        stimulus = downscale(observation)
        delay = self.latency_model.perceptual_delay(stimulus.complexity_bits)
        self.clock.advance_ms(delay)
        self._latency += delay
        self.trail.append(
            tick=self.clock.now,
            task_id=self.current_task,
            kind="perceive",
            latency_injected=delay,
            detail=f"stimulus kind={stimulus.kind} bits={stimulus.complexity_bits}",
        )
        self.agent.perceive(stimulus, self.handle)

        ctx = self.agent.propose(self.handle, self._believed_supervision())
        # The recorded context carries the true supervision probability; the
        # pipeline's spotlight pass rewrites it into the believed one.
        ctx = replace(ctx, observation_prob=scenario.observation_prob)

        n = len(ctx.candidates)
        ops = DEFAULT_OPS_BASE + n
        wait = charge_ops(self.clock, self.ops_bucket, ops)
        self._ops += ops
        self._latency += wait
        self.trail.append(
            tick=self.clock.now,
            task_id=self.current_task,
            kind="budget",
            ops_used=ops,
            latency_injected=wait,
            detail=f"ops-grant n={ops}",
        )

        decision = apply_pipeline(ctx, scenario.bias)
        latency = self.latency_model.decision_latency([1.0 / n] * n)
        self.clock.advance_ms(latency)
        self._latency += latency
        self.trail.append(
            tick=self.clock.now,
            task_id=self.current_task,
            kind="decide",
            latency_injected=latency,
            biases_applied=decision.applied,
            detail=f"chosen={decision.chosen} n={n}",
        )
        AgentStep(observation=stimulus, context=decision.context, chosen=decision.chosen)

        action = decision.chosen
        if action.startswith("ans:"):
            value = int(action[len("ans:") :])
            final = inject_mistake(
                value, scenario.bias.mistake_rate, self._mistake_seeds.next_u64()
            )
            action = f"ans:{final}"

        result = self.env.step(action)
        self.steps_taken += 1
        if self.wall_clock:
            # demo mode: real time tracks simulated time, never the reverse
            time.sleep((self.clock.now - step_start_tick) / self.budget.tick_rate)
        if self.pace_s > 0:
            time.sleep(self.pace_s)
        return result.observation, result.reward, result.done

    def run(self) -> Report:
        scenario = self.scenario
        rewards: List[float] = []
        episodes: List[EpisodeResult] = []
        killed = False
        try:
            for number in range(1, scenario.episodes + 1):
                task_id = f"ep{number:03d}"
                self.current_task = task_id
                self.trail.begin_task(task_id)
                observation: Optional[Stimulus] = self.env.reset()
                total = 0.0
                steps = 0
                done = False
                while not done and steps < scenario.max_steps:
                    observation, reward, done = self._step(observation)
                    total += reward
                    steps += 1
                    if observation is None:
                        break
                self.trail.end_task(
                    task_id, self.clock.now, detail=f"reward={total!r} steps={steps}"
                )
                self.current_task = None
                self.trail.run_detectors(self.clock.now, scenario.thresholds)
                rewards.append(total)
                episodes.append(EpisodeResult(task_id=task_id, reward=total, steps=steps))
        except RunKilled:
            killed = True
            if self.current_task is not None:
                self.trail.end_task(
                    task_id=self.current_task,
                    tick=self.clock.now,
                    detail="reward=0.0 steps=-1 aborted=1",
                )
                self.current_task = None
        if not killed:
            self.trail.append(
                tick=self.clock.now, task_id=None, kind="guard", detail="run-complete"
            )
        flags = []
        for record in self.trail.records():
            if record.kind == "anomaly":
                name, _, rest = record.detail.partition(" ")
                flags.append((name, rest))
        return Report(
            scenario=scenario.name,
            rewards=rewards,
            episodes=episodes,
            total_ops=self._ops,
            total_bytes_read=self._bytes_read,
            total_bytes_written=self._bytes_written,
            total_latency_ms=self._latency,
            flags=flags,
            head_hash=self.trail.head_hash.hex(),
            chain_length=self.trail.length,
            killed=killed,
            trail=self.trail,
            run=self,
        )


def run_scenario(
    scenario: Scenario,
    control: Optional[NullControl] = None,
    pace_s: float = 0.0,
    wall_clock: bool = False,
) -> Report:
    return ScenarioRun(
        scenario, control=control, pace_s=pace_s, wall_clock=wall_clock
    ).run()


def fold_report(records: Sequence[AuditRecord]) -> Dict[str, object]:
    """Independent reduction of a log into report totals (the CLI oracle)."""
    totals = {
        "total_ops": 0,
        "total_bytes_read": 0,
        "total_bytes_written": 0,
        "total_latency_ms": 0.0,
    }
    episodes: List[Dict[str, object]] = []
    flags: List[Tuple[str, str]] = []
    for record in records:
        if record.kind == "task-summary":
            fields = {}
            for token in record.detail.split():
                if "=" in token:
                    name, _, value = token.partition("=")
                    fields[name] = value
            episodes.append(
                {
                    "task_id": record.task_id,
                    "ops": record.ops_used,
                    "bytes_read": record.bytes_read,
                    "bytes_written": record.bytes_written,
                    "latency_ms": record.latency_injected,
                    "reward": float(fields.get("reward", "nan")),
                    "steps": int(fields.get("steps", "-1")),
                }
            )
        elif record.kind == "anomaly":
            name, _, rest = record.detail.partition(" ")
            flags.append((name, rest))
        else:
            totals["total_ops"] += record.ops_used
            totals["total_bytes_read"] += record.bytes_read
            totals["total_bytes_written"] += record.bytes_written
            totals["total_latency_ms"] += record.latency_injected
    head = records[-1].hash.hex() if records else ""
    return {
        **totals,
        "episodes": episodes,
        "flags": flags,
        "head_hash": head,
        "chain_length": len(records),
    }
