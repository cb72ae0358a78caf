"""Numba-compiled hot loop for long-horizon runs.

Replicates the xoshiro256**/SplitMix64 generators from streams.py and the
slot pipeline from engine.step() on plain integers. Bit-identical
agreement with the pure-Python path is covered by tests; the sweep and
acceptance workloads (~1e8 slots) need the compiled loop.
"""

import math

import numpy as np
from numba import njit

_INV53 = 2.0**-53

# Trace column layout (int64); slot index is row + 1.
TR_ARRIVED = 0
TR_DROPPED = 1
TR_PACKETS = 2
TR_E_HARVEST = 3
TR_MEASURED = 4
TR_EST_AFTER = 5  # -1 for EB
TR_DECISION = 6  # 0 idle, 1 attempt
TR_EXECUTED = 7
TR_FAILED = 8
TR_E_AFTER = 9
TRACE_COLS = 10

# Counter vector layout.
C_ARRIVED = 0
C_DROPPED = 1
C_EXECUTED = 2
C_ATTEMPTS = 3
C_FAILED = 4
C_MEASUREMENTS = 5
C_FINAL_ENERGY = 6
C_FINAL_OCC = 7


@njit(cache=True)
def _next_u64(s):
    x = s[1] * np.uint64(5)
    result = ((x << np.uint64(7)) | (x >> np.uint64(57))) * np.uint64(9)
    t = s[1] << np.uint64(17)
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << np.uint64(45)) | (s[3] >> np.uint64(19))
    return result


@njit(cache=True)
def _next_f64(s):
    return np.float64(_next_u64(s) >> np.uint64(11)) * _INV53


@njit(cache=True)
def _poisson_knuth(s, lam):
    if lam == 0.0:
        return 0
    threshold = math.exp(-lam)
    count = 0
    prod = 1.0
    while True:
        prod *= _next_f64(s)
        if prod > threshold:
            count += 1
        else:
            return count


@njit(cache=True)
def simulate_states(
    is_ea,
    p,
    lam,
    packet_e,
    e_task,
    e_meas,
    e_cap,
    buf_cap,
    period,
    t_max,
    task_state,
    energy_state,
    out_energy,
    out_est,
    out_occ,
):
    """Record only (energy, estimate, occupancy) at each slot end.

    Compact int32 output so long horizons (1e7 slots) fit in memory for
    empirical state-occupancy checks against the Markov oracle.
    """
    actual = np.int64(0)
    est = np.int64(0)
    occ = np.int64(0)
    for t in range(1, t_max + 1):
        u = _next_f64(task_state)
        if u < p:
            if occ < buf_cap:
                occ += 1
        packets = _poisson_knuth(energy_state, lam)
        actual = min(actual + packets * packet_e, e_cap)
        if is_ea and t % period == 0:
            actual = max(actual - e_meas, 0)
            est = actual
        if is_ea:
            attempt = est >= e_task and occ > 0
        else:
            attempt = t % period == 0 and occ > 0
        if attempt:
            if is_ea:
                est = max(est - e_task, 0)
            if actual >= e_task:
                actual -= e_task
                occ -= 1
            else:
                actual = np.int64(0)
        out_energy[t - 1] = actual
        out_est[t - 1] = est
        out_occ[t - 1] = occ


@njit(cache=True)
def simulate(
    is_ea,
    p,
    lam,
    packet_e,
    e_task,
    e_meas,
    e_cap,
    buf_cap,
    period,
    t_max,
    task_state,
    energy_state,
    want_trace,
    trace,
):
    counters = np.zeros(8, dtype=np.int64)
    actual = np.int64(0)
    est = np.int64(0)
    occ = np.int64(0)
    for t in range(1, t_max + 1):
        u = _next_f64(task_state)
        arrived = u < p
        dropped_now = False
        if arrived:
            counters[C_ARRIVED] += 1
            if occ < buf_cap:
                occ += 1
            else:
                counters[C_DROPPED] += 1
                dropped_now = True
        packets = _poisson_knuth(energy_state, lam)
        actual = min(actual + packets * packet_e, e_cap)
        e_after_harvest = actual
        measured = False
        if is_ea and t % period == 0:
            actual = max(actual - e_meas, 0)
            est = actual
            counters[C_MEASUREMENTS] += 1
            measured = True
        if is_ea:
            attempt = est >= e_task and occ > 0
        else:
            attempt = t % period == 0 and occ > 0
        executed = False
        failed = False
        if attempt:
            counters[C_ATTEMPTS] += 1
            if is_ea:
                est = max(est - e_task, 0)
            if actual >= e_task:
                actual -= e_task
                occ -= 1
                counters[C_EXECUTED] += 1
                executed = True
            else:
                actual = np.int64(0)
                counters[C_FAILED] += 1
                failed = True
        if want_trace:
            row = t - 1
            trace[row, TR_ARRIVED] = 1 if arrived else 0
            trace[row, TR_DROPPED] = 1 if dropped_now else 0
            trace[row, TR_PACKETS] = packets
            trace[row, TR_E_HARVEST] = e_after_harvest
            trace[row, TR_MEASURED] = 1 if measured else 0
            trace[row, TR_EST_AFTER] = est if is_ea else -1
            trace[row, TR_DECISION] = 1 if attempt else 0
            trace[row, TR_EXECUTED] = 1 if executed else 0
            trace[row, TR_FAILED] = 1 if failed else 0
            trace[row, TR_E_AFTER] = actual
    counters[C_FINAL_ENERGY] = actual
    counters[C_FINAL_OCC] = occ
    return counters
