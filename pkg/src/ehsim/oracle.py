"""Exact stationary completion rate via finite Markov-chain analysis.

The chain transcribes the one-slot dynamics independently of the engine
(this module is the ground truth the simulator is checked against, so it
deliberately does not reuse engine.step). A state is

    EB: (actual_energy, buffer_occupancy, phase)
    EA: (actual_energy, estimated_energy, buffer_occupancy, phase)

with energies in milli-units and phase = slot mod period. The reachable
set is enumerated breadth-first from the cold-start state; per-slot
Poisson packet counts beyond the count that saturates the storage cap are
pooled into one transition, which is exact because the cap makes higher
counts indistinguishable.

Phase periodicity is handled by aggregating `period` slots into one
super-step and power-iterating the (self-damped) super-kernel; damping
with the identity preserves the fixed point and guarantees aperiodicity
even for degenerate deterministic configs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .core import PolicyKind, SimConfig
from .errors import NoConvergence, StateSpaceTooLarge, ValidationError

DEFAULT_STATE_LIMIT = 5_000_000


def _poisson_pmf_pooled(lam: float, k_max: int) -> list[float]:
    """[P(0), ..., P(k_max-1), P(>= k_max)]; the tail mass is pooled."""
    if lam == 0.0:
        probs = [0.0] * (k_max + 1)
        probs[0] = 1.0
        return probs
    probs = []
    pk = math.exp(-lam)
    total = 0.0
    for k in range(k_max):
        probs.append(pk)
        total += pk
        pk = pk * lam / (k + 1)
    probs.append(max(1.0 - total, 0.0))
    return probs


@dataclass
class ChainModel:
    states: list[tuple]
    index: dict
    kernel: sp.csr_matrix  # row-stochastic one-slot transition matrix
    exec_reward: np.ndarray  # P(execution this slot | state)
    start_index: int
    config: SimConfig


def _slot_transition(state: tuple, arrived: bool, packets: int, config: SimConfig):
    """One-slot dynamics; returns (next_state, executed)."""
    is_ea = config.policy is PolicyKind.EA
    if is_ea:
        actual, est, occ, phase = state
    else:
        actual, occ, phase = state
        est = 0
    if arrived:
        if occ < config.buffer_cap:
            occ += 1
        # else dropped; occupancy unchanged
    actual = min(actual + packets * config.packet_energy, config.e_cap)
    if is_ea and phase == 0:
        actual = max(actual - config.e_meas, 0)
        est = actual
    if is_ea:
        attempt = est >= config.e_task and occ > 0
    else:
        attempt = phase == 0 and occ > 0
    executed = False
    if attempt:
        if is_ea:
            est = max(est - config.e_task, 0)
        if actual >= config.e_task:
            actual -= config.e_task
            occ -= 1
            executed = True
        else:
            actual = 0
    phase = (phase + 1) % config.period
    if is_ea:
        return (actual, est, occ, phase), executed
    return (actual, occ, phase), executed


def build_chain(config: SimConfig, state_limit: int = DEFAULT_STATE_LIMIT) -> ChainModel:
    """Enumerate the reachable state space and its sparse transition kernel."""
    config.validate()
    is_ea = config.policy is PolicyKind.EA
    start = (0, 0, 0, 1 % config.period) if is_ea else (0, 0, 1 % config.period)

    index: dict = {start: 0}
    states: list[tuple] = [start]
    rows: list[int] = []
    cols: list[int] = []
    vals: list[float] = []
    exec_reward: list[float] = []

    arrival_branches = []
    if config.p > 0.0:
        arrival_branches.append((True, config.p))
    if config.p < 1.0:
        arrival_branches.append((False, 1.0 - config.p))

    i = 0
    while i < len(states):
        state = states[i]
        actual = state[0]
        if config.lam > 0.0 and config.packet_energy > 0:
            k_max = -(-(config.e_cap - actual) // config.packet_energy)
        else:
            k_max = 0
        packet_probs = _poisson_pmf_pooled(config.lam, k_max)
        reward = 0.0
        merged: dict = {}
        for arrived, pa in arrival_branches:
            for packets, pk in enumerate(packet_probs):
                if pk == 0.0:
                    continue
                nxt, executed = _slot_transition(state, arrived, packets, config)
                prob = pa * pk
                if executed:
                    reward += prob
                j = index.get(nxt)
                if j is None:
                    j = len(states)
                    if j >= state_limit:
                        raise StateSpaceTooLarge(
                            f"state space exceeds limit of {state_limit} states"
                        )
                    index[nxt] = j
                    states.append(nxt)
                merged[j] = merged.get(j, 0.0) + prob
        exec_reward.append(reward)
        for j, prob in merged.items():
            rows.append(i)
            cols.append(j)
            vals.append(prob)
        i += 1

    n = len(states)
    kernel = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    row_sums = np.asarray(kernel.sum(axis=1)).ravel()
    if not np.allclose(row_sums, 1.0, rtol=0.0, atol=1e-12):
        worst = float(np.abs(row_sums - 1.0).max())
        raise AssertionError(f"kernel rows must sum to 1 (max deviation {worst:.3e})")
    return ChainModel(
        states=states,
        index=index,
        kernel=kernel,
        exec_reward=np.array(exec_reward),
        start_index=0,
        config=config,
    )


@dataclass
class StationaryResult:
    occupancy: np.ndarray  # long-run per-slot state occupancy, all phases
    iterations: int
    residual: float


def stationary(
    model: ChainModel, tol: float = 1e-12, max_iter: int = 10**6
) -> StationaryResult:
    """Long-run state occupancy from the cold-start state.

    Power iteration runs on the period-aggregated chain (one super-step =
    `period` slots), blended 50/50 with the previous iterate; the blend
    keeps the fixed point and removes any residual periodicity.
    """
    PT = model.kernel.T.tocsr()
    period = model.config.period
    n = PT.shape[0]
    v = np.zeros(n)
    v[model.start_index] = 1.0
    residual = np.inf
    iterations = 0
    for iterations in range(1, max_iter + 1):
        w = v
        for _ in range(period):
            w = PT @ w
        w = 0.5 * w + 0.5 * v
        w /= w.sum()
        residual = float(np.abs(w - v).max())
        v = w
        if residual <= tol:
            break
    else:
        raise NoConvergence(residual, max_iter)
    # Average the phase slices to get per-slot occupancy across one period.
    occ = np.zeros(n)
    w = v
    for _ in range(period):
        occ += w
        w = PT @ w
    occ /= period
    occ /= occ.sum()
    return StationaryResult(occupancy=occ, iterations=iterations, residual=residual)


@dataclass
class OracleResult:
    rate: float
    state_count: int
    iterations: int
    residual: float


def analyze(config: SimConfig, state_limit: int = DEFAULT_STATE_LIMIT) -> OracleResult:
    """Exact stationary completion rate plus solver diagnostics."""
    if config.p <= 0.0:
        raise ValidationError("p", "oracle requires p > 0 (no arrivals otherwise)")
    model = build_chain(config, state_limit=state_limit)
    sol = stationary(model)
    exec_per_slot = float(sol.occupancy @ model.exec_reward)
    rate = exec_per_slot / config.p
    # Numerical noise can push the ratio epsilon outside [0, 1].
    rate = min(max(rate, 0.0), 1.0)
    return OracleResult(
        rate=rate,
        state_count=len(model.states),
        iterations=sol.iterations,
        residual=sol.residual,
    )


def oracle_completion_rate(config: SimConfig) -> float:
    return analyze(config).rate
