"""Send policies: who transmits when several queues hold packets.

Every policy is a chooser over non-empty queues; acceptance and idling
are engine business.  Stateful choosers (round robin, random, replay)
keep their state in a closure, so each factory call yields a fresh
policy that must not be shared between simulations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from .engine import QueueState, parse_decisions, schedule_policy
from .model import SwitchConfig

Chooser = Callable[[SwitchConfig, QueueState], int]

_MASK64 = (1 << 64) - 1


def _splitmix64(x: int) -> int:
    # Seed scrambler; keeps short seeds (0, 1, 2, ...) well spread.
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


class Xorshift64Star:
    """Small 64-bit xorshift* generator: portable, fast, reproducible."""

    def __init__(self, seed: int):
        self._s = _splitmix64(seed & _MASK64) or 0x9E3779B97F4A7C15

    def next_u64(self) -> int:
        s = self._s
        s ^= s >> 12
        s = (s ^ (s << 25)) & _MASK64
        s ^= s >> 27
        self._s = s
        return (s * 0x2545F4914F6CDD1D) & _MASK64

    def below(self, n: int) -> int:
        """Uniform draw from range(n), bias-free via rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n


@dataclass(frozen=True)
class Policy:
    """A named send chooser.  deterministic=False marks seeded policies
    whose decisions depend on a PRNG stream rather than state alone."""

    name: str
    choose: Chooser
    deterministic: bool = True


def greedy_choose(config: SwitchConfig, state: QueueState) -> int:
    """Highest-value non-empty queue; ties go to the lowest queue index.

    Precondition (engine-checked): some queue is non-empty.
    """
    best = -1
    best_value = -1
    for k, occ in enumerate(state.occupancy):
        if occ > 0:
            v = config.values[config.queues[k].value_index]
            if v > best_value:
                best, best_value = k, v
    return best


def greedy() -> Policy:
    return Policy("greedy", greedy_choose)


def lowest_value_first() -> Policy:
    """Mirror image of greedy: always transmit the cheapest packet."""

    def choose(config: SwitchConfig, state: QueueState) -> int:
        best = -1
        best_value = None
        for k, occ in enumerate(state.occupancy):
            if occ > 0:
                v = config.values[config.queues[k].value_index]
                if best_value is None or v < best_value:
                    best, best_value = k, v
        return best

    return Policy("lowest-first", choose)


def round_robin() -> Policy:
    """Cycle over queue indices, skipping empty queues."""
    last = -1

    def choose(config: SwitchConfig, state: QueueState) -> int:
        nonlocal last
        n = len(state.occupancy)
        for off in range(1, n + 1):
            k = (last + off) % n
            if state.occupancy[k] > 0:
                last = k
                return k
        return -1  # unreachable under the engine's non-empty precondition

    return Policy("round-robin", choose)


def seeded_random(seed: int) -> Policy:
    """Uniform choice over non-empty queues from a seeded xorshift stream."""
    rng = Xorshift64Star(seed)

    def choose(config: SwitchConfig, state: QueueState) -> int:
        nonempty = [k for k, occ in enumerate(state.occupancy) if occ > 0]
        return nonempty[rng.below(len(nonempty))]

    return Policy(f"random:{seed}", choose, deterministic=False)


def replay_schedule(log, name: str = "replay") -> Policy:
    """Policy that re-issues a recorded decision log, step by step."""
    inner = schedule_policy(tuple(log), name)
    return Policy(name, inner.choose)


def make_policy(spec: str) -> Policy:
    """Resolve a policy name from the command-line vocabulary.

    Accepted: greedy | round-robin | lowest-first | random:<seed>
    | replay:<logfile>.  Returns a fresh instance each call; stateful
    policies must not be reused across simulations.
    """
    if spec == "greedy":
        return greedy()
    if spec == "round-robin":
        return round_robin()
    if spec == "lowest-first":
        return lowest_value_first()
    if spec.startswith("random:"):
        raw = spec.split(":", 1)[1]
        try:
            seed = int(raw)
        except ValueError:
            raise ValueError(f"policy {spec!r}: seed must be an integer") from None
        return seeded_random(seed)
    if spec.startswith("replay:"):
        path = spec.split(":", 1)[1]
        if not path:
            raise ValueError("policy 'replay:' needs a log file path")
        with open(path, "r", encoding="utf-8") as fh:
            log = parse_decisions(fh.read())
        return replay_schedule(log, name=spec)
    raise ValueError(f"unknown policy {spec!r}")
