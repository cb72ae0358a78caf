import random

import pytest

from ehsim.core import Counters, PolicyKind, SimConfig
from ehsim.engine import run, run_reference
from ehsim.errors import ValidationError

from _checks import audit_trace, random_config

# Pinned once from this implementation (see also the oracle cross-check in
# test_acceptance.py, criterion 1).
GOLDEN_EB_CONFIG = SimConfig(
    policy=PolicyKind.EB, period=6, p=0.35, lam=0.5,
    e_cap=5000, buffer_cap=2, e_task=2000, seed=1, t_max=100_000,
)
GOLDEN_EB_RATE = 0.4630396550746015


def test_energy_never_binds_executes_everything():
    config = SimConfig(
        policy=PolicyKind.EB, period=1, e_task=0, p=1.0, lam=0.0,
        buffer_cap=1, t_max=100, seed=5,
    )
    result = run(config)
    assert result.counters.arrived == 100
    assert result.counters.executed == 100
    assert result.completion_rate == 1.0


@pytest.mark.parametrize("policy", [PolicyKind.EB, PolicyKind.EA])
def test_no_energy_no_executions(policy):
    config = SimConfig(policy=policy, lam=0.0, period=3, t_max=2000, seed=8)
    result = run(config)
    assert result.counters.executed == 0


def test_golden_rate_pinned():
    assert run(GOLDEN_EB_CONFIG).completion_rate == GOLDEN_EB_RATE


def test_no_arrivals_is_vacuous():
    result = run(SimConfig(p=0.0, t_max=1000, seed=2))
    assert result.counters.arrived == 0
    assert result.completion_rate == 1.0
    assert result.vacuous


def test_determinism_same_seed():
    config = SimConfig(policy=PolicyKind.EA, period=4, t_max=5000, seed=77)
    a = run(config, collect_trace=True)
    b = run(config, collect_trace=True)
    assert a.counters == b.counters
    assert a.trace == b.trace


def test_trace_on_off_identical_counters():
    config = SimConfig(policy=PolicyKind.EA, period=3, t_max=5000, seed=13)
    assert run(config).counters == run(config, collect_trace=True).counters


def test_rejects_invalid_config():
    with pytest.raises(ValidationError):
        run(SimConfig(p=1.5))
    with pytest.raises(ValidationError):
        run(SimConfig(period=0))


def test_kernel_matches_reference_implementation():
    rng = random.Random(31337)
    for _ in range(25):
        config = random_config(rng, t_max=2000)
        fast = run(config, collect_trace=True)
        ref = run_reference(config, collect_trace=True)
        assert fast.counters == ref.counters
        assert fast.final_energy == ref.final_energy
        assert fast.final_buffer_occupancy == ref.final_buffer_occupancy
        assert fast.trace == ref.trace


def test_trace_invariants_on_random_configs():
    rng = random.Random(202)
    for _ in range(40):
        config = random_config(rng, t_max=1000)
        result = run(config, collect_trace=True)
        audit_trace(config, result)


def test_ea_costless_per_slot_measurement_is_greedy():
    """E_m = 0 and Q = 1: estimate equals actual every slot, no failures."""
    config = SimConfig(
        policy=PolicyKind.EA, period=1, e_meas=0, p=0.5, lam=0.5,
        t_max=5000, seed=21,
    )
    result = run(config, collect_trace=True)
    assert result.counters.failed_attempts == 0
    for rec in result.trace:
        assert rec.estimated_after == rec.energy_after


def test_counters_identity():
    config = SimConfig(policy=PolicyKind.EB, period=5, t_max=20_000, seed=4)
    result = run(config)
    c = result.counters
    assert c.arrived == c.dropped + c.executed + result.final_buffer_occupancy
    assert c.executed == c.attempts - c.failed_attempts
