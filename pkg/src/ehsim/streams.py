"""Seedable random streams and the two arrival processes.

Seed derivation: the master seed is combined with a per-stream label code
through a SplitMix64 avalanche mixer; four successive SplitMix64 outputs
fill the 256-bit state of a xoshiro256** generator. Task and energy
arrivals use separately derived streams, so changing p never perturbs the
energy trace and vice versa.

The numba simulation kernel (_kernel.py) reimplements the exact same
generator on uint64 arrays; the two are asserted bit-identical in tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_INV53 = 2.0**-53


def _mix64(z: int) -> int:
    """SplitMix64 finalizer (Stafford mix13 avalanche)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def _splitmix_next(x: int) -> tuple[int, int]:
    x = (x + GOLDEN) & MASK64
    return x, _mix64(x)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


@dataclass(frozen=True)
class StreamLabel:
    """Identifies an independent sub-stream of a master seed."""

    code: int
    name: str = "derived"


TASK_ARRIVALS = StreamLabel(0, "task-arrivals")
ENERGY_ARRIVALS = StreamLabel(1, "energy-arrivals")


def derived(index: int) -> StreamLabel:
    if index < 0:
        raise ValueError("derived stream index must be non-negative")
    return StreamLabel(2 + index)


class RandomStream:
    """xoshiro256** generator; single-owner, advanced in place."""

    __slots__ = ("s", "label")

    def __init__(self, state, label: StreamLabel):
        self.s = list(state)
        self.label = label

    def next_u64(self) -> int:
        s = self.s
        result = (_rotl((s[1] * 5) & MASK64, 7) * 9) & MASK64
        t = (s[1] << 17) & MASK64
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = _rotl(s[3], 45)
        return result

    def next_float(self) -> float:
        """Uniform in [0, 1) with 53 bits of precision."""
        return (self.next_u64() >> 11) * _INV53


def derive_stream(master_seed: int, label: StreamLabel) -> RandomStream:
    """Deterministically derive an independent stream for (seed, label)."""
    x = _mix64((master_seed & MASK64) ^ _mix64(label.code ^ GOLDEN))
    state = []
    for _ in range(4):
        x, word = _splitmix_next(x)
        state.append(word)
    if not any(state):  # all-zero is the one invalid xoshiro state
        state[0] = GOLDEN
    return RandomStream(state, label)


def derive_subseed(master_seed: int, index: int) -> int:
    """64-bit sub-seed for replicate `index`; used by the sweep harness."""
    return derive_stream(master_seed, derived(index)).next_u64()


def sample_task_arrival(stream: RandomStream, p: float) -> bool:
    """Bernoulli(p) draw; always consumes exactly one uniform."""
    return stream.next_float() < p


def sample_energy_packets(stream: RandomStream, lam: float) -> int:
    """Poisson(lam) packet count via Knuth's multiplicative method.

    Consumes a variable number of uniforms; zero draws when lam == 0.
    """
    if lam == 0.0:
        return 0
    threshold = math.exp(-lam)
    count = 0
    prod = 1.0
    while True:
        prod *= stream.next_float()
        if prod > threshold:
            count += 1
        else:
            return count
