import pytest

from ehsim.core import PolicyKind, SimConfig
from ehsim.engine import run
from ehsim.errors import ValidationError
from ehsim.streams import derive_subseed
from ehsim.sweep import (
    SweepCurve,
    SweepPoint,
    SweepSpec,
    compare_policies,
    find_optimum,
    run_sweep,
)

EA_BASE = SimConfig(
    policy=PolicyKind.EA, p=0.5, lam=0.25, e_meas=500, e_cap=5000, buffer_cap=2,
)
EB_BASE = SimConfig(policy=PolicyKind.EB, p=0.5, lam=0.25, e_cap=5000, buffer_cap=2)


def _curve(points):
    return SweepCurve("F", [SweepPoint(v, r, 0.0, 1) for v, r in points])


class TestFindOptimum:
    def test_strict_maximum(self):
        assert find_optimum(_curve([(1, 0.4), (2, 0.6), (3, 0.5)])) == (2, 0.6)

    def test_tie_breaks_smallest(self):
        assert find_optimum(_curve([(1, 0.5), (2, 0.5)])) == (1, 0.5)

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            find_optimum(SweepCurve("F", []))


class TestSweepSpecValidation:
    def test_param_policy_mismatch(self):
        with pytest.raises(ValidationError):
            SweepSpec(EA_BASE, "F").validate()

    def test_values_must_increase(self):
        with pytest.raises(ValidationError):
            SweepSpec(EB_BASE, "F", values=[3, 2]).validate()

    def test_replicates_positive(self):
        with pytest.raises(ValidationError):
            SweepSpec(EB_BASE, "F", replicates=0).validate()


class TestRunSweep:
    def test_degenerate_sweep_equals_single_run(self):
        spec = SweepSpec(EB_BASE.replace(t_max=20_000), "F", values=[4],
                         replicates=1, master_seed=9)
        curve = run_sweep(spec)
        assert len(curve.points) == 1
        seed = derive_subseed(9, 4 * 1 + 0)
        expected = run(EB_BASE.replace(t_max=20_000, period=4, seed=seed))
        point = curve.points[0]
        assert point.mean_rate == expected.completion_rate
        assert point.std_error == 0.0

    def test_starvation_curve_is_flat_zero(self):
        spec = SweepSpec(
            EB_BASE.replace(lam=0.0, t_max=5000), "F",
            values=[1, 5, 10], replicates=2,
        )
        curve = run_sweep(spec)
        assert all(p.mean_rate == 0.0 for p in curve.points)

    def test_reproducible(self):
        spec = SweepSpec(EB_BASE.replace(t_max=10_000), "F",
                         values=[2, 4, 6], replicates=3, master_seed=5)
        assert run_sweep(spec) == run_sweep(spec)

    def test_stderr_shrinks_with_replicates(self):
        base = EB_BASE.replace(t_max=10_000, lam=0.5, period=6)
        small = run_sweep(SweepSpec(base, "F", values=[6], replicates=5))
        large = run_sweep(SweepSpec(base, "F", values=[6], replicates=20))
        assert large.points[0].std_error < small.points[0].std_error


class TestComparePolicies:
    def test_eb_against_itself_is_zero(self):
        base = EB_BASE.replace(t_max=10_000)
        report = compare_policies(base, [3, 6], replicates=2, master_seed=4)
        for row in report.rows:
            eb_seed_rates = [
                run(base.replace(period=row.value,
                                 seed=derive_subseed(4, row.value * 2 + r))).completion_rate
                for r in range(2)
            ]
            assert row.eb_rate == pytest.approx(sum(eb_seed_rates) / 2)

    def test_costless_per_slot_ea_dominates(self):
        base = EB_BASE.replace(e_meas=0, t_max=50_000)
        report = compare_policies(base, [1], replicates=5, master_seed=2)
        row = report.rows[0]
        combined = (row.eb_stderr**2 + row.ea_stderr**2) ** 0.5
        assert row.ea_rate >= row.eb_rate - 2 * combined

    def test_simulated_optimum_matches_oracle_scan(self):
        from ehsim.oracle import analyze

        spec = SweepSpec(EA_BASE, "Q", list(range(1, 31)), replicates=5,
                         master_seed=1)
        value, _ = find_optimum(run_sweep(spec))
        oracle_rates = {
            q: analyze(EA_BASE.replace(period=q)).rate for q in range(1, 31)
        }
        oracle_best = min(
            (q for q in oracle_rates if oracle_rates[q] == max(oracle_rates.values()))
        )
        assert value == oracle_best
