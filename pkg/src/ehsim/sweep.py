"""Parameter sweeps over F (EB) or Q (EA) with replicate statistics.

Replicate seeds follow a deterministic schedule derived from the master
seed: the run for sweep value v, replicate r uses
derive_subseed(master_seed, v * replicates + r). Comparison grids reuse
the same schedule for both policies so curves are seed-matched.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

from .core import PolicyKind, SimConfig
from .errors import ValidationError
from .engine import run
from .streams import derive_subseed


@dataclass
class SweepPoint:
    value: int
    mean_rate: float
    std_error: float
    replicates: int


@dataclass
class SweepCurve:
    swept_param: str  # "F" or "Q"
    points: list[SweepPoint] = field(default_factory=list)


@dataclass
class SweepSpec:
    base_config: SimConfig
    swept_param: str  # "F" (EB period) or "Q" (EA period)
    values: list[int] = field(default_factory=lambda: list(range(1, 31)))
    replicates: int = 5
    master_seed: int = 1

    def validate(self) -> "SweepSpec":
        if self.swept_param not in ("F", "Q"):
            raise ValidationError("swept_param", "must be 'F' or 'Q'")
        expected = PolicyKind.EB if self.swept_param == "F" else PolicyKind.EA
        if self.base_config.policy is not expected:
            raise ValidationError(
                "swept_param",
                f"'{self.swept_param}' requires policy {expected.value}",
            )
        if not self.values:
            raise ValidationError("values", "must be non-empty")
        if any(b <= a for a, b in zip(self.values, self.values[1:])):
            raise ValidationError("values", "must be strictly increasing")
        if any(v < 1 for v in self.values):
            raise ValidationError("values", "periods must be >= 1")
        if self.replicates < 1:
            raise ValidationError("replicates", "must be >= 1")
        return self


def _mean_stderr(rates: list[float]) -> tuple[float, float]:
    n = len(rates)
    mean = sum(rates) / n
    if n < 2:
        return mean, 0.0
    var = sum((r - mean) ** 2 for r in rates) / (n - 1)
    return mean, math.sqrt(var / n)


def _replicate_rates(
    config: SimConfig, value: int, replicates: int, master_seed: int
) -> list[float]:
    rates = []
    for r in range(replicates):
        seed = derive_subseed(master_seed, value * replicates + r)
        result = run(config.replace(period=value, seed=seed))
        rates.append(result.completion_rate)
    return rates


def run_sweep(spec: SweepSpec) -> SweepCurve:
    spec.validate()
    spec.base_config.validate()
    curve = SweepCurve(swept_param=spec.swept_param)
    for value in spec.values:
        rates = _replicate_rates(
            spec.base_config, value, spec.replicates, spec.master_seed
        )
        mean, stderr = _mean_stderr(rates)
        curve.points.append(SweepPoint(value, mean, stderr, spec.replicates))
    return curve


def find_optimum(curve: SweepCurve) -> tuple[int, float]:
    """Argmax of mean rate; ties break toward the smallest parameter value."""
    if not curve.points:
        raise ValidationError("curve", "must be non-empty")
    best = curve.points[0]
    for point in curve.points[1:]:
        if point.mean_rate > best.mean_rate:
            best = point
    return best.value, best.mean_rate


@dataclass
class ComparisonRow:
    value: int
    eb_rate: float
    eb_stderr: float
    ea_rate: float
    ea_stderr: float
    difference: float  # eb - ea
    significant: bool  # |difference| > 2 * combined stderr


@dataclass
class ComparisonReport:
    base_config: SimConfig
    rows: list[ComparisonRow] = field(default_factory=list)


def compare_policies(
    base_config: SimConfig,
    values: list[int],
    replicates: int = 5,
    master_seed: int = 1,
) -> ComparisonReport:
    """EB with F = v against EA with Q = v on matched seed schedules."""
    base_config.validate()
    if not values:
        raise ValidationError("values", "must be non-empty")
    eb_base = base_config.replace(policy=PolicyKind.EB)
    ea_base = base_config.replace(policy=PolicyKind.EA)
    report = ComparisonReport(base_config=base_config)
    for value in values:
        eb_rates = _replicate_rates(eb_base, value, replicates, master_seed)
        ea_rates = _replicate_rates(ea_base, value, replicates, master_seed)
        eb_mean, eb_se = _mean_stderr(eb_rates)
        ea_mean, ea_se = _mean_stderr(ea_rates)
        diff = eb_mean - ea_mean
        combined = math.hypot(eb_se, ea_se)
        report.rows.append(
            ComparisonRow(
                value=value,
                eb_rate=eb_mean,
                eb_stderr=eb_se,
                ea_rate=ea_mean,
                ea_stderr=ea_se,
                difference=diff,
                significant=abs(diff) > 2.0 * combined,
            )
        )
    return report


def _fmt(x: float) -> str:
    return format(x, ".10g")


def write_sweep_csv(out: io.TextIOBase, spec: SweepSpec, curve: SweepCurve) -> None:
    for key, value in spec.base_config.as_audit_items():
        out.write(f"# {key} = {value}\n")
    out.write(f"# swept_param = {spec.swept_param}\n")
    out.write(f"# replicates = {spec.replicates}\n")
    out.write(f"# master_seed = {spec.master_seed}\n")
    out.write("value,mean_rate,std_error,replicates\n")
    for pt in curve.points:
        out.write(
            f"{pt.value},{_fmt(pt.mean_rate)},{_fmt(pt.std_error)},{pt.replicates}\n"
        )


def write_comparison_csv(
    out: io.TextIOBase, report: ComparisonReport, replicates: int, master_seed: int
) -> None:
    for key, value in report.base_config.as_audit_items():
        out.write(f"# {key} = {value}\n")
    out.write(f"# replicates = {replicates}\n")
    out.write(f"# master_seed = {master_seed}\n")
    out.write("value,eb_rate,eb_se,ea_rate,ea_se,diff,significant\n")
    for row in report.rows:
        out.write(
            f"{row.value},{_fmt(row.eb_rate)},{_fmt(row.eb_stderr)},"
            f"{_fmt(row.ea_rate)},{_fmt(row.ea_stderr)},{_fmt(row.difference)},"
            f"{int(row.significant)}\n"
        )
