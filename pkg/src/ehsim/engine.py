"""Per-slot simulation pipeline and full-horizon runs.

Slot phase order (fixed): task arrival -> buffer offer/drop -> energy
packet arrival -> capped deposit -> (EA, every Q-th slot) measurement
cost + estimate snapshot -> policy decision -> execution attempt ->
advance slot. Energy arriving in slot t is usable in slot t; a failed EB
or EA attempt zeroes the storage (wasted partial execution).

run() drives the compiled kernel in _kernel.py; step() is the readable
reference used for property tests, and the two are asserted equal.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernel
from .core import (
    Counters,
    OfferOutcome,
    PolicyKind,
    SimConfig,
    TaskBuffer,
    completion_rate,
    milli_to_str,
    store_deposit,
    store_withdraw,
)
from .policies import (
    DecisionKind,
    EaPolicyState,
    EbPolicyState,
    ea_advance_slot,
    ea_after_attempt,
    ea_decide,
    ea_is_measurement_slot,
    ea_on_measure,
    eb_decide,
)
from .streams import (
    ENERGY_ARRIVALS,
    TASK_ARRIVALS,
    RandomStream,
    derive_stream,
    sample_energy_packets,
    sample_task_arrival,
)

TRACE_FIELDS = (
    "slot",
    "task_arrived",
    "task_dropped",
    "packets",
    "energy_after_harvest",
    "measured",
    "estimated_after",
    "decision",
    "executed",
    "attempt_failed",
    "energy_after",
)


@dataclass
class SlotTraceRecord:
    slot: int
    task_arrived: bool
    task_dropped: bool
    packets: int
    energy_after_harvest: int
    measured: bool
    estimated_after: Optional[int]
    decision: DecisionKind
    executed: bool
    attempt_failed: bool
    energy_after: int


@dataclass
class DeviceState:
    slot: int
    actual_energy: int
    buffer: TaskBuffer
    policy: Union[EbPolicyState, EaPolicyState]
    counters: Counters = field(default_factory=Counters)


def initial_state(config: SimConfig) -> DeviceState:
    """Cold start: zero energy, empty buffer, slot index 1."""
    if config.policy is PolicyKind.EA:
        policy = EaPolicyState(period_q=config.period, e_meas=config.e_meas)
    else:
        policy = EbPolicyState(period_f=config.period)
    return DeviceState(
        slot=1,
        actual_energy=0,
        buffer=TaskBuffer(config.buffer_cap),
        policy=policy,
    )


def step(
    state: DeviceState,
    config: SimConfig,
    task_stream: RandomStream,
    energy_stream: RandomStream,
) -> SlotTraceRecord:
    """Advance one slot in place and return its trace record."""
    slot = state.slot
    counters = state.counters
    is_ea = config.policy is PolicyKind.EA

    arrived = sample_task_arrival(task_stream, config.p)
    dropped_now = False
    if arrived:
        counters.arrived += 1
        if state.buffer.offer(slot) is OfferOutcome.DROPPED:
            counters.dropped += 1
            dropped_now = True

    packets = sample_energy_packets(energy_stream, config.lam)
    state.actual_energy = store_deposit(
        state.actual_energy, packets * config.packet_energy, config.e_cap
    )
    energy_after_harvest = state.actual_energy

    measured = False
    if is_ea and ea_is_measurement_slot(state.policy, slot):
        state.actual_energy = max(state.actual_energy - config.e_meas, 0)
        counters.measurements += 1
        state.policy = ea_on_measure(state.policy, state.actual_energy)
        measured = True

    buffer_nonempty = len(state.buffer) > 0
    if is_ea:
        decision = ea_decide(state.policy, buffer_nonempty, config.e_task)
    else:
        decision = eb_decide(state.policy, slot, buffer_nonempty)

    executed = False
    failed = False
    if decision is DecisionKind.ATTEMPT_EXECUTION:
        counters.attempts += 1
        if is_ea:
            state.policy = ea_after_attempt(state.policy, config.e_task)
        remaining = store_withdraw(state.actual_energy, config.e_task)
        if remaining is not None:
            state.actual_energy = remaining
            state.buffer.take()
            counters.executed += 1
            executed = True
        else:
            state.actual_energy = 0
            counters.failed_attempts += 1
            failed = True

    if is_ea:
        state.policy = ea_advance_slot(state.policy)
    state.slot += 1

    return SlotTraceRecord(
        slot=slot,
        task_arrived=arrived,
        task_dropped=dropped_now,
        packets=packets,
        energy_after_harvest=energy_after_harvest,
        measured=measured,
        estimated_after=state.policy.estimated if is_ea else None,
        decision=decision,
        executed=executed,
        attempt_failed=failed,
        energy_after=state.actual_energy,
    )


@dataclass
class RunResult:
    config: SimConfig
    counters: Counters
    completion_rate: float
    vacuous: bool  # no arrivals; rate is the documented 1.0 convention
    final_energy: int
    final_buffer_occupancy: int
    trace: Optional[list[SlotTraceRecord]] = None


def _streams_for(config: SimConfig) -> tuple[RandomStream, RandomStream]:
    return (
        derive_stream(config.seed, TASK_ARRIVALS),
        derive_stream(config.seed, ENERGY_ARRIVALS),
    )


def run(config: SimConfig, collect_trace: bool = False) -> RunResult:
    """Simulate slots 1..t_max from the cold-start state (compiled path)."""
    config.validate()
    task_stream, energy_stream = _streams_for(config)
    is_ea = config.policy is PolicyKind.EA
    trace_arr = np.zeros(
        (config.t_max if collect_trace else 1, _kernel.TRACE_COLS), dtype=np.int64
    )
    raw = _kernel.simulate(
        is_ea,
        float(config.p),
        float(config.lam),
        np.int64(config.packet_energy),
        np.int64(config.e_task),
        np.int64(config.e_meas),
        np.int64(config.e_cap),
        np.int64(config.buffer_cap),
        np.int64(config.period),
        np.int64(config.t_max),
        np.array(task_stream.s, dtype=np.uint64),
        np.array(energy_stream.s, dtype=np.uint64),
        collect_trace,
        trace_arr,
    )
    counters = Counters(
        arrived=int(raw[_kernel.C_ARRIVED]),
        dropped=int(raw[_kernel.C_DROPPED]),
        executed=int(raw[_kernel.C_EXECUTED]),
        attempts=int(raw[_kernel.C_ATTEMPTS]),
        failed_attempts=int(raw[_kernel.C_FAILED]),
        measurements=int(raw[_kernel.C_MEASUREMENTS]),
    )
    trace = _trace_records(trace_arr, is_ea) if collect_trace else None
    return RunResult(
        config=config,
        counters=counters,
        completion_rate=completion_rate(counters),
        vacuous=counters.arrived == 0,
        final_energy=int(raw[_kernel.C_FINAL_ENERGY]),
        final_buffer_occupancy=int(raw[_kernel.C_FINAL_OCC]),
        trace=trace,
    )


def run_state_series(config: SimConfig):
    """End-of-slot (energy, estimate, occupancy) arrays; memory-light.

    Used for empirical state-occupancy comparisons against the oracle on
    long horizons where a full trace would not fit.
    """
    config.validate()
    task_stream, energy_stream = _streams_for(config)
    energy = np.zeros(config.t_max, dtype=np.int32)
    est = np.zeros(config.t_max, dtype=np.int32)
    occ = np.zeros(config.t_max, dtype=np.int32)
    _kernel.simulate_states(
        config.policy is PolicyKind.EA,
        float(config.p),
        float(config.lam),
        np.int64(config.packet_energy),
        np.int64(config.e_task),
        np.int64(config.e_meas),
        np.int64(config.e_cap),
        np.int64(config.buffer_cap),
        np.int64(config.period),
        np.int64(config.t_max),
        np.array(task_stream.s, dtype=np.uint64),
        np.array(energy_stream.s, dtype=np.uint64),
        energy,
        est,
        occ,
    )
    return energy, est, occ


def run_reference(config: SimConfig, collect_trace: bool = False) -> RunResult:
    """Pure-Python fold of step(); must match run() exactly."""
    config.validate()
    task_stream, energy_stream = _streams_for(config)
    state = initial_state(config)
    trace: Optional[list[SlotTraceRecord]] = [] if collect_trace else None
    for _ in range(config.t_max):
        record = step(state, config, task_stream, energy_stream)
        if trace is not None:
            trace.append(record)
    return RunResult(
        config=config,
        counters=state.counters,
        completion_rate=completion_rate(state.counters),
        vacuous=state.counters.arrived == 0,
        final_energy=state.actual_energy,
        final_buffer_occupancy=len(state.buffer),
        trace=trace,
    )


def _trace_records(arr: np.ndarray, is_ea: bool) -> list[SlotTraceRecord]:
    K = _kernel
    records = []
    for row in range(arr.shape[0]):
        r = arr[row]
        records.append(
            SlotTraceRecord(
                slot=row + 1,
                task_arrived=bool(r[K.TR_ARRIVED]),
                task_dropped=bool(r[K.TR_DROPPED]),
                packets=int(r[K.TR_PACKETS]),
                energy_after_harvest=int(r[K.TR_E_HARVEST]),
                measured=bool(r[K.TR_MEASURED]),
                estimated_after=int(r[K.TR_EST_AFTER]) if is_ea else None,
                decision=(
                    DecisionKind.ATTEMPT_EXECUTION
                    if r[K.TR_DECISION]
                    else DecisionKind.IDLE
                ),
                executed=bool(r[K.TR_EXECUTED]),
                attempt_failed=bool(r[K.TR_FAILED]),
                energy_after=int(r[K.TR_E_AFTER]),
            )
        )
    return records


def write_trace_csv(out: io.TextIOBase, result: RunResult) -> None:
    """One row per slot; energies as exact decimals. Header row is fixed."""
    if result.trace is None:
        raise ValueError("run was executed without trace collection")
    for key, value in result.config.as_audit_items():
        out.write(f"# {key} = {value}\n")
    out.write(",".join(TRACE_FIELDS) + "\n")
    for rec in result.trace:
        est = "" if rec.estimated_after is None else milli_to_str(rec.estimated_after)
        out.write(
            ",".join(
                (
                    str(rec.slot),
                    str(int(rec.task_arrived)),
                    str(int(rec.task_dropped)),
                    str(rec.packets),
                    milli_to_str(rec.energy_after_harvest),
                    str(int(rec.measured)),
                    est,
                    rec.decision.value,
                    str(int(rec.executed)),
                    str(int(rec.attempt_failed)),
                    milli_to_str(rec.energy_after),
                )
            )
            + "\n"
        )
