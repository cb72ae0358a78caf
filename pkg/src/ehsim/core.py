"""Domain types: fixed-point energy, task buffer, counters, run configuration.

Energy is stored as a non-negative integer count of milli-units
(1 energy unit = 1000 milli-units) so that every arithmetic step is exact
and the Markov oracle can enumerate states directly.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Optional

from .errors import InexactEnergy, ValidationError

MILLI = 1000  # milli-units per energy unit


def to_milli(value) -> int:
    """Convert an energy expressed in units to exact milli-units.

    Accepts ints, decimal strings ("0.5"), floats with a short decimal
    representation, and Fractions. Raises InexactEnergy if the value is
    negative or not a whole number of milli-units.
    """
    if isinstance(value, Fraction):
        frac = value
    elif isinstance(value, int):
        frac = Fraction(value)
    else:
        try:
            frac = Fraction(str(value))
        except (ValueError, ZeroDivisionError) as exc:
            raise InexactEnergy(f"cannot parse energy value {value!r}") from exc
    mu = frac * MILLI
    if mu.denominator != 1:
        raise InexactEnergy(f"{value} is not a whole number of milli-units")
    if mu < 0:
        raise InexactEnergy(f"energy must be non-negative, got {value}")
    return int(mu)


def milli_to_str(milli_units: int) -> str:
    """Exact decimal rendering of a milli-unit amount, e.g. 500 -> "0.5"."""
    units, rem = divmod(milli_units, MILLI)
    if rem == 0:
        return str(units)
    return f"{units}.{rem:03d}".rstrip("0")


class PolicyKind(Enum):
    EB = "eb"
    EA = "ea"


@dataclass
class SimConfig:
    """All parameters of one simulation run; the single source of truth.

    Energies (packet_energy, e_task, e_meas, e_cap) are in milli-units.
    """

    p: float = 0.35
    lam: float = 0.5
    packet_energy: int = 1000
    e_task: int = 2000
    e_meas: int = 500
    e_cap: int = 5000
    buffer_cap: int = 2
    period: int = 6
    policy: PolicyKind = PolicyKind.EB
    t_max: int = 100_000
    seed: int = 1

    def validate(self) -> "SimConfig":
        if not (0.0 <= self.p <= 1.0):
            raise ValidationError("p", f"must be in [0, 1], got {self.p}")
        if self.lam < 0.0:
            raise ValidationError("lambda", f"must be >= 0, got {self.lam}")
        if self.period < 1:
            raise ValidationError("period", f"must be >= 1, got {self.period}")
        if self.t_max < 1:
            raise ValidationError("t_max", f"must be >= 1, got {self.t_max}")
        if self.buffer_cap < 1:
            raise ValidationError("buffer_cap", f"must be >= 1, got {self.buffer_cap}")
        for name in ("packet_energy", "e_task", "e_meas", "e_cap"):
            if getattr(self, name) < 0:
                raise ValidationError(name, "must be non-negative")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("seed", "must fit in 64 unsigned bits")
        return self

    def replace(self, **kwargs) -> "SimConfig":
        from dataclasses import replace

        return replace(self, **kwargs)

    def as_audit_items(self):
        """Resolved (key, printable value) pairs, energies in decimal units."""
        return [
            ("p", repr(self.p)),
            ("lambda", repr(self.lam)),
            ("packet_energy", milli_to_str(self.packet_energy)),
            ("e_task", milli_to_str(self.e_task)),
            ("e_meas", milli_to_str(self.e_meas)),
            ("e_cap", milli_to_str(self.e_cap)),
            ("buffer_cap", str(self.buffer_cap)),
            ("period", str(self.period)),
            ("policy", self.policy.value),
            ("t_max", str(self.t_max)),
            ("seed", str(self.seed)),
        ]


@dataclass
class Counters:
    arrived: int = 0
    dropped: int = 0
    executed: int = 0
    attempts: int = 0
    failed_attempts: int = 0
    measurements: int = 0


def completion_rate(counters: Counters) -> float:
    """Executed / arrived; 1.0 when nothing arrived (vacuous success)."""
    if counters.arrived == 0:
        return 1.0
    return counters.executed / counters.arrived


class OfferOutcome(Enum):
    ACCEPTED = "accepted"
    DROPPED = "dropped"


class TaskBuffer:
    """Bounded FIFO of pending tasks; each entry is its arrival slot index."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValidationError("buffer_cap", "must be >= 1")
        self.capacity = capacity
        self._queue: deque[int] = deque()

    def __len__(self) -> int:
        return len(self._queue)

    def offer(self, slot: int) -> OfferOutcome:
        if len(self._queue) < self.capacity:
            self._queue.append(slot)
            return OfferOutcome.ACCEPTED
        return OfferOutcome.DROPPED

    def take(self) -> Optional[int]:
        if self._queue:
            return self._queue.popleft()
        return None

    def peek_all(self) -> tuple[int, ...]:
        return tuple(self._queue)


def store_deposit(level: int, amount: int, cap: int) -> int:
    """Add harvested energy, saturating at the storage capacity."""
    return min(level + amount, cap)


def store_withdraw(level: int, amount: int) -> Optional[int]:
    """Withdraw `amount`; None signals insufficient energy (level unchanged)."""
    if level >= amount:
        return level - amount
    return None
