"""Per-slot scheduling decisions for the two policies.

EB attempts a task every F-th slot with no knowledge of stored energy.
EA measures stored energy every Q-th slot (paying e_meas) and gates each
slot's attempt on a conservative estimate: the last measured value minus
the task cost of every attempt since, clamped at zero. The estimate
ignores harvesting and is therefore a lower bound on the actual energy.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum


class DecisionKind(Enum):
    IDLE = "idle"
    ATTEMPT_EXECUTION = "attempt"
    MEASURE_THEN_DECIDE = "measure"


@dataclass(frozen=True)
class EbPolicyState:
    """Stateless periodic attempts: decide from (slot mod F, buffer)."""

    period_f: int


@dataclass(frozen=True)
class EaPolicyState:
    period_q: int
    e_meas: int
    estimated: int = 0
    slots_since_measure: int = 0


def eb_decide(state: EbPolicyState, slot: int, buffer_nonempty: bool) -> DecisionKind:
    if slot % state.period_f == 0 and buffer_nonempty:
        return DecisionKind.ATTEMPT_EXECUTION
    return DecisionKind.IDLE


def ea_is_measurement_slot(state: EaPolicyState, slot: int) -> bool:
    return slot % state.period_q == 0


def ea_on_measure(state: EaPolicyState, actual_after_cost: int) -> EaPolicyState:
    """Snapshot the (post-cost) actual energy as the new estimate."""
    return replace(state, estimated=actual_after_cost, slots_since_measure=0)


def ea_decide(state: EaPolicyState, buffer_nonempty: bool, e_task: int) -> DecisionKind:
    if state.estimated >= e_task and buffer_nonempty:
        return DecisionKind.ATTEMPT_EXECUTION
    return DecisionKind.IDLE


def ea_after_attempt(state: EaPolicyState, e_task: int) -> EaPolicyState:
    """Charge the estimate for an attempt, whether or not it succeeded."""
    return replace(state, estimated=max(state.estimated - e_task, 0))


def ea_advance_slot(state: EaPolicyState) -> EaPolicyState:
    return replace(state, slots_since_measure=state.slots_since_measure + 1)


def ea_estimated_energy(measured: int, executions_since: int, e_task: int) -> int:
    """Closed-form estimate after k attempts since the last measurement.

    Cross-check for the incremental EaPolicyState; must agree exactly.
    """
    return max(measured - executions_since * e_task, 0)


def ea_actual_energy_uncapped(
    measured: int, executions_since: int, e_task: int, harvested_since: int
) -> int:
    """Closed-form actual energy, valid only while the storage cap never binds."""
    return max(measured - executions_since * e_task + harvested_since, 0)
