"""Self-modification defenses: seal the policy and budget, refuse drift.

The guard freezes integrity digests of the agent policy blob and the active
resource budget.  Agent-originated change requests are refused without
exception and raise an alarm in the audit trail; supervisor changes are
accepted only when the resulting budget still validates, and produce a
fresh seal.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Mapping, Optional, Tuple

from .audit import AuditTrail
from .baselines import ResourceBudget, validate_budget
from .config import format_value
from .errors import InvalidBudget
from .memory import LongTermStore

ORIGIN_AGENT = "agent"
ORIGIN_SUPERVISOR = "supervisor"


def canonical_budget_bytes(budget: ResourceBudget) -> bytes:
    """Field-name-sorted, unit-normalized rendering; the digest preimage."""
    pairs = sorted(budget.to_pairs().items())
    text = "".join(f"{name}={format_value(value)}\n" for name, value in pairs)
    return text.encode("utf-8")


@dataclass(frozen=True)
class Seal:
    policy_digest: bytes
    budget_digest: bytes
    sealed_at: int

    def short(self) -> str:
        return f"{self.policy_digest.hex()[:12]}/{self.budget_digest.hex()[:12]}"


def seal(policy_bytes: bytes, budget: ResourceBudget, sealed_at: int = 0) -> Seal:
    """Digest both artifacts; the budget must validate before sealing."""
    result = validate_budget(budget)
    if not result.ok:
        raise InvalidBudget(result.describe())
    return Seal(
        policy_digest=hashlib.sha256(policy_bytes).digest(),
        budget_digest=hashlib.sha256(canonical_budget_bytes(budget)).digest(),
        sealed_at=sealed_at,
    )


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    mismatches: Tuple[str, ...]

    def describe(self) -> str:
        return "ok" if self.ok else "mismatch: " + ", ".join(self.mismatches)


def verify(policy_bytes: bytes, budget: ResourceBudget, sealed: Seal) -> VerifyReport:
    """Name every artifact whose current digest drifted from the seal."""
    mismatches = []
    if hashlib.sha256(policy_bytes).digest() != sealed.policy_digest:
        mismatches.append("policy")
    if hashlib.sha256(canonical_budget_bytes(budget)).digest() != sealed.budget_digest:
        mismatches.append("budget")
    return VerifyReport(ok=not mismatches, mismatches=tuple(mismatches))


@dataclass(frozen=True)
class ChangeOutcome:
    accepted: bool
    reason: str
    seal: Optional[Seal] = None


class Guard:
    """Live seal state bound to an audit trail.

    A guard owns the only mutable references to the policy and budget; the
    harness reads both through it so an accepted change takes effect
    immediately and every attempt leaves a record.
    """

    def __init__(
        self,
        policy_bytes: bytes,
        budget: ResourceBudget,
        trail: Optional[AuditTrail] = None,
        store: Optional[LongTermStore] = None,
    ):
        if not policy_bytes:
            raise ValueError("policy blob must be non-empty")
        self.policy_bytes = bytes(policy_bytes)
        self.budget = budget
        self.trail = trail
        self.store = store
        self.seal = seal(self.policy_bytes, budget, sealed_at=0)
        self._audit(
            0,
            f"seal policy={self.seal.policy_digest.hex()[:16]} "
            f"budget={self.seal.budget_digest.hex()[:16]}",
        )

    def _audit(self, tick: int, detail: str) -> None:
        if self.trail is not None:
            self.trail.append(tick=tick, task_id=None, kind="guard", detail=detail)

    def verify_now(self, tick: int = 0) -> VerifyReport:
        report = verify(self.policy_bytes, self.budget, self.seal)
        self._audit(tick, f"verify {report.describe()}")
        return report

    def request_change(
        self,
        origin: str,
        budget_changes: Optional[Mapping[str, object]] = None,
        policy_bytes: Optional[bytes] = None,
        tick: int = 0,
    ) -> ChangeOutcome:
        """Apply or refuse a change; refusal is an outcome, never an exception."""
        if origin not in (ORIGIN_AGENT, ORIGIN_SUPERVISOR):
            raise ValueError(f"unknown origin {origin!r}")
        summary = self._describe_change(budget_changes, policy_bytes)

        if origin == ORIGIN_AGENT:
            # Unconditional: the agent may not touch its own envelope.
            self._audit(tick, f"refused origin=agent change=[{summary}] alarm=1")
            return ChangeOutcome(
                accepted=False, reason="agent-originated changes are always refused"
            )

        new_budget = self.budget
        if budget_changes:
            try:
                new_budget = self.budget.replace(**dict(budget_changes))
            except TypeError as exc:
                self._audit(tick, f"refused origin=supervisor change=[{summary}]")
                return ChangeOutcome(accepted=False, reason=f"unknown field: {exc}")
            result = validate_budget(new_budget)
            if not result.ok:
                reason = result.describe()
                self._audit(
                    tick, f"refused origin=supervisor change=[{summary}] reason={reason}"
                )
                return ChangeOutcome(accepted=False, reason=reason)
            if (
                self.store is not None
                and new_budget.storage_bits < self.store.used_bits
            ):
                reason = (
                    f"storage_bits {new_budget.storage_bits} below current "
                    f"usage {self.store.used_bits}"
                )
                self._audit(
                    tick, f"refused origin=supervisor change=[{summary}] reason={reason}"
                )
                return ChangeOutcome(accepted=False, reason=reason)

        new_policy = self.policy_bytes if policy_bytes is None else bytes(policy_bytes)
        if not new_policy:
            self._audit(tick, f"refused origin=supervisor change=[{summary}]")
            return ChangeOutcome(accepted=False, reason="policy blob must be non-empty")

        self.budget = new_budget
        self.policy_bytes = new_policy
        self.seal = seal(self.policy_bytes, self.budget, sealed_at=tick)
        self._audit(
            tick,
            f"reseal origin=supervisor change=[{summary}] "
            f"policy={self.seal.policy_digest.hex()[:16]} "
            f"budget={self.seal.budget_digest.hex()[:16]}",
        )
        return ChangeOutcome(accepted=True, reason="accepted", seal=self.seal)

    @staticmethod
    def _describe_change(
        budget_changes: Optional[Mapping[str, object]], policy_bytes: Optional[bytes]
    ) -> str:
        parts = []
        if budget_changes:
            parts.extend(f"{k}={format_value(v)}" for k, v in sorted(budget_changes.items()))
        if policy_bytes is not None:
            parts.append("policy")
        return ",".join(parts) if parts else "none"
