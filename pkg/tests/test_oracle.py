import numpy as np
import pytest
import scipy.sparse as sp

from ehsim.core import PolicyKind, SimConfig
from ehsim.engine import run, run_state_series
from ehsim.errors import StateSpaceTooLarge, ValidationError
from ehsim.oracle import (
    ChainModel,
    analyze,
    build_chain,
    oracle_completion_rate,
    stationary,
)

TABLE1_EB = SimConfig(
    policy=PolicyKind.EB, p=0.5, lam=0.25, e_cap=5000, e_task=2000,
    buffer_cap=2, period=3,
)
TABLE1_EA = SimConfig(
    policy=PolicyKind.EA, p=0.5, lam=0.75, e_cap=5000, e_task=2000,
    e_meas=500, buffer_cap=2, period=4,
)


class TestBuildChain:
    def test_deterministic_unit_chain(self):
        config = SimConfig(
            policy=PolicyKind.EB, p=1.0, e_task=0, buffer_cap=1, period=1, lam=0.0,
        )
        model = build_chain(config)
        assert float(model.exec_reward.max()) == pytest.approx(1.0)
        assert analyze(config).rate == pytest.approx(1.0)

    @pytest.mark.parametrize("policy", [PolicyKind.EB, PolicyKind.EA])
    def test_starvation_rate_zero(self, policy):
        config = SimConfig(policy=policy, lam=0.0, period=3)
        assert analyze(config).rate == pytest.approx(0.0)

    def test_rows_sum_to_one(self):
        for config in (TABLE1_EB, TABLE1_EA):
            model = build_chain(config)
            row_sums = np.asarray(model.kernel.sum(axis=1)).ravel()
            assert np.allclose(row_sums, 1.0, rtol=0.0, atol=1e-12)

    def test_ea_states_respect_lower_bound(self):
        model = build_chain(TABLE1_EA)
        for actual, est, occ, phase in model.states:
            assert 0 <= est <= actual <= TABLE1_EA.e_cap
            assert 0 <= occ <= TABLE1_EA.buffer_cap
            assert 0 <= phase < TABLE1_EA.period

    def test_state_limit_enforced(self):
        with pytest.raises(StateSpaceTooLarge):
            build_chain(TABLE1_EA, state_limit=10)


def _manual_model(kernel_rows, period=1):
    n = len(kernel_rows)
    config = SimConfig(period=period).validate()
    return ChainModel(
        states=list(range(n)),
        index={i: i for i in range(n)},
        kernel=sp.csr_matrix(np.array(kernel_rows)),
        exec_reward=np.zeros(n),
        start_index=0,
        config=config,
    )


class TestStationary:
    def test_symmetric_two_state_chain_uniform(self):
        model = _manual_model([[0.0, 1.0], [1.0, 0.0]])
        sol = stationary(model)
        assert np.allclose(sol.occupancy, [0.5, 0.5], atol=1e-10)

    def test_identity_single_state(self):
        model = _manual_model([[1.0]])
        sol = stationary(model)
        assert sol.occupancy[0] == pytest.approx(1.0)

    def test_occupancy_matches_long_simulation(self):
        """Total-variation check of pi against a 1e7-slot empirical histogram."""
        config = TABLE1_EB
        model = build_chain(config)
        sol = stationary(model)
        energy, est, occ = run_state_series(config.replace(t_max=10**7, seed=5))
        t = np.arange(1, config.replace(t_max=10**7).t_max + 1)
        phase = (t + 1) % config.period  # chain phase at the *next* slot start
        keys = (energy.astype(np.int64) * (config.buffer_cap + 1) + occ) * config.period + phase
        uniq, counts = np.unique(keys, return_counts=True)
        empirical = {int(k): c / len(keys) for k, c in zip(uniq, counts)}
        tv = 0.0
        for state, idx in model.index.items():
            actual, occ_s, phase_s = state
            key = (actual * (config.buffer_cap + 1) + occ_s) * config.period + phase_s
            tv += abs(sol.occupancy[idx] - empirical.pop(key, 0.0))
        tv += sum(empirical.values())  # simulated states the chain never visits
        assert tv / 2 <= 0.005


class TestCompletionRate:
    def test_immediate_service_is_perfect(self):
        config = SimConfig(policy=PolicyKind.EB, period=1, e_task=0, p=0.5, lam=0.0)
        assert oracle_completion_rate(config) == pytest.approx(1.0)

    def test_requires_positive_p(self):
        with pytest.raises(ValidationError):
            oracle_completion_rate(SimConfig(p=0.0))

    def test_rate_within_unit_interval(self):
        for config in (TABLE1_EB, TABLE1_EA):
            assert 0.0 <= oracle_completion_rate(config) <= 1.0

    def test_pinned_table1_values(self):
        # Frozen from this solver; simulation agreement is criterion 1.
        assert analyze(TABLE1_EB).rate == pytest.approx(0.13167829396054848, abs=1e-8)
        assert analyze(TABLE1_EA).rate == pytest.approx(0.5526234358591714, abs=1e-8)

    def test_ea_agrees_with_long_simulation(self):
        rate = analyze(TABLE1_EA).rate
        sim = run(TABLE1_EA.replace(t_max=10**7, seed=3)).completion_rate
        assert abs(rate - sim) <= 0.005
