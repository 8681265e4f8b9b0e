"""Adaptive lower-bound construction and seeded workload generators.

The lower-bound builder plays a fixed game against any deterministic
online policy.  It uses the one-queue-per-value, unit-capacity
configuration (the construction's argument needs every queue to refill
only after its packet leaves, which unit capacities give for free; no
claim is made for larger capacities).  Round t offers one packet of
every value the policy has not yet transmitted, watches which value the
policy sends, and removes it from the next round's offer.  The policy
ends up with one packet of each value, while the reference schedule
transmits the policy's *next* pick one round early, re-collects it, and
drains a full buffer afterwards.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .engine import Decision, SimulationCursor, replay
from .model import (
    SEND_EVENT,
    SwitchConfig,
    Trace,
    arrival,
    drain_extend,
    restricted_config,
)


@dataclass(frozen=True, slots=True)
class AdversaryTranscript:
    """Full record of one adversarial game.

    observed_sends holds the value indices the policy transmitted in
    rounds 1..m; value_sets holds the offer of each round (value
    indices, ascending).  Both schedules are engine decision logs over
    the same trace.
    """

    config: SwitchConfig
    trace: Trace
    observed_sends: tuple[int, ...]
    value_sets: tuple[tuple[int, ...], ...]
    alg_schedule: tuple[Decision, ...]
    adv_schedule: tuple[Decision, ...]
    alg_benefit: int
    adv_benefit: int

    @property
    def ratio(self) -> Fraction:
        return Fraction(self.adv_benefit, self.alg_benefit)


def build_lower_bound_instance(values, policy) -> AdversaryTranscript:
    """Run the adaptive game against a deterministic policy.

    Returns a verified transcript: the constructed trace, the policy's
    observed sends, and a reference schedule whose benefit is exactly
    2 * sum(values) - (first value the policy sent).  The ratio is
    therefore at least 2 - max(values) / sum(values).
    """
    if not getattr(policy, "deterministic", False):
        raise ValueError(
            f"policy {getattr(policy, 'name', policy)!r} is not deterministic; "
            "the adaptive construction needs reproducible reactions"
        )
    config = restricted_config(values, 1)
    m = config.num_values
    cursor = SimulationCursor(config, policy)
    events = []
    remaining = list(range(m))
    value_sets = []
    observed = []
    for t in range(1, m + 1):
        value_sets.append(tuple(remaining))
        for vi in remaining:
            accepted = cursor.arrive(vi)  # queue vi stores value vi
            events.append(arrival(vi))
            if t == 1:
                assert accepted, "round 1 arrivals fill empty unit queues"
            else:
                assert not accepted, "rounds 2..m only re-offer buffered values"
        served = cursor.send()
        events.append(SEND_EVENT)
        assert served is not None, "the policy holds a packet in every round"
        sent_vi = config.queues[served].value_index
        assert sent_vi in remaining
        observed.append(sent_vi)
        remaining.remove(sent_vi)
    for _ in range(m - 1):
        served = cursor.send()
        events.append(SEND_EVENT)
        assert served is None, "the policy is empty after round m"
    trace = Trace(tuple(events))
    alg_result = cursor.result()
    assert alg_result.benefit == sum(config.values)

    # Reference schedule: rounds 1..m-1 pre-send the policy's next pick,
    # then drain one packet of every value, highest first.
    adv_schedule: list[Decision] = [observed[t] for t in range(1, m)]
    adv_schedule.extend(range(m - 1, -1, -1))
    adv_result = replay(config, trace, tuple(adv_schedule))
    expected = 2 * sum(config.values) - config.values[observed[0]]
    assert adv_result.benefit == expected, (
        f"reference schedule yields {adv_result.benefit}, construction predicts {expected}"
    )
    return AdversaryTranscript(
        config=config,
        trace=trace,
        observed_sends=tuple(observed),
        value_sets=tuple(value_sets),
        alg_schedule=alg_result.decision_log,
        adv_schedule=tuple(adv_schedule),
        alg_benefit=alg_result.benefit,
        adv_benefit=adv_result.benefit,
    )


def gen_random(config: SwitchConfig, steps: int, arrivals_per_step_max: int, seed: int) -> Trace:
    """Random drained trace: each step gets 0..max arrivals, then a send.

    Identical arguments yield an identical trace.
    """
    if config.num_queues == 0:
        raise ValueError("gen_random needs at least one queue")
    rng = random.Random(seed)
    events = []
    n = config.num_queues
    for _ in range(steps):
        for _ in range(rng.randint(0, arrivals_per_step_max)):
            events.append(arrival(rng.randrange(n)))
        events.append(SEND_EVENT)
    return drain_extend(config, Trace(tuple(events)))


def gen_bursty(config: SwitchConfig, steps: int, burst_len: int, burst_size: int, seed: int) -> Trace:
    """Alternating quiet and burst phases, each burst_len steps long.

    The trace starts quiet.  Entering a burst phase picks a fresh random
    non-empty subset of queues; every step of the phase then delivers
    burst_size packets to each targeted queue before the send.  With
    burst_len 0 there are no bursts at all.  Drained; seed-reproducible.
    """
    if config.num_queues == 0:
        raise ValueError("gen_bursty needs at least one queue")
    rng = random.Random(seed)
    events = []
    n = config.num_queues
    targets: list[int] = []
    for step in range(steps):
        in_burst = burst_len > 0 and (step // burst_len) % 2 == 1
        if in_burst:
            if step % burst_len == 0:
                targets = sorted(rng.sample(range(n), rng.randint(1, n)))
            for q in targets:
                events.extend([arrival(q)] * burst_size)
        events.append(SEND_EVENT)
    return drain_extend(config, Trace(tuple(events)))
