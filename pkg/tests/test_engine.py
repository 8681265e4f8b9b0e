"""Switch simulation: acceptance, diligence enforcement, replay."""
import random

import pytest
from hypothesis import given, settings, strategies as st

from segbuf import (
    DiligenceViolation,
    Policy,
    QueueSpec,
    SimulationCursor,
    SwitchConfig,
    Trace,
    TraceError,
    brute_force_benefit,
    gen_random,
    greedy,
    lowest_value_first,
    parse_decisions,
    replay,
    replay_schedule,
    restricted_config,
    serialize_decisions,
    simulate,
)
from segbuf.harness import tight_two_valued_instance
from segbuf.model import SEND_EVENT, arrival


def test_empty_trace():
    cfg = restricted_config((1, 2), 1)
    res = simulate(cfg, Trace(()), greedy())
    assert res.benefit == 0
    assert res.accepted_per_value == (0, 0)
    assert res.sent_per_value == (0, 0)
    assert res.rejected_count == 0
    assert res.decision_log == ()
    assert res.occupancy_timeline == ()


def test_tight_instance_frozen_values():
    # cap-1 queues holding 1 and 2; the myopic choice burns the slot
    cfg, trace = tight_two_valued_instance()
    res = simulate(cfg, trace, greedy())
    assert res.benefit == 3
    assert res.decision_log == (1, 0, None, None)
    assert res.rejected_count == 1

    patient = simulate(cfg, trace, lowest_value_first())
    assert patient.benefit == 4
    assert patient.rejected_count == 0
    # cross-check the 4 against exhaustive enumeration
    assert brute_force_benefit(cfg, trace) == 4


def test_forced_acceptance_and_rejection():
    cfg = restricted_config((3,), 2)
    trace = Trace((arrival(0), arrival(0), arrival(0), SEND_EVENT, arrival(0)))
    res = simulate(cfg, trace, greedy())
    # third arrival bounces off the full queue, fifth lands in the freed slot
    assert res.accepted_per_value == (3,)
    assert res.rejected_count == 1
    assert res.occupancy_timeline == (1, 2, 2, 1, 2)


def test_benefit_is_value_weighted_sends():
    cfg = SwitchConfig((2, 5), (QueueSpec(0, 1), QueueSpec(1, 1), QueueSpec(0, 2)))
    trace = Trace((arrival(0), arrival(1), arrival(2), SEND_EVENT, SEND_EVENT))
    res = simulate(cfg, trace, greedy())
    assert res.decision_log == (1, 0)
    assert res.sent_per_value == (1, 1)
    assert res.benefit == 2 + 5


def test_arrival_out_of_range():
    cfg = restricted_config((1,), 1)
    with pytest.raises(TraceError, match="queue 3"):
        simulate(cfg, Trace((arrival(3),)), greedy())


def test_policy_cannot_idle_while_loaded():
    lazy = Policy("lazy", lambda cfg, state: None)
    cfg = restricted_config((1,), 1)
    with pytest.raises(DiligenceViolation, match="step 1"):
        simulate(cfg, Trace((arrival(0), SEND_EVENT)), lazy)


def test_policy_cannot_send_from_empty_or_unknown_queue():
    cfg = restricted_config((1, 2), 1)
    trace = Trace((arrival(0), SEND_EVENT))
    with pytest.raises(DiligenceViolation, match="empty queue 1"):
        simulate(cfg, trace, Policy("bad", lambda c, s: 1))
    with pytest.raises(DiligenceViolation, match="queue 9"):
        simulate(cfg, trace, Policy("bad", lambda c, s: 9))


def test_cursor_incremental_matches_batch():
    cfg = restricted_config((1, 2, 4), 2)
    trace = gen_random(cfg, steps=8, arrivals_per_step_max=3, seed=11)
    cursor = SimulationCursor(cfg, greedy())
    cursor.feed(trace)
    assert cursor.result() == simulate(cfg, trace, greedy())


@st.composite
def st_sim_cases(draw):
    m = draw(st.integers(1, 4))
    values = tuple(sorted(draw(
        st.lists(st.integers(1, 30), min_size=m, max_size=m, unique=True))))
    cfg = restricted_config(values, draw(st.integers(1, 3)))
    trace = gen_random(cfg, steps=draw(st.integers(0, 12)),
                       arrivals_per_step_max=3, seed=draw(st.integers(0, 2**32)))
    return cfg, trace


@given(st_sim_cases())
@settings(max_examples=150, deadline=None)
def test_conservation_and_capacity(case):
    cfg, trace = case
    cursor = SimulationCursor(cfg, greedy())
    for event in trace.events:
        if event.kind == "arrive":
            cursor.arrive(event.queue)
        else:
            cursor.send()
        # per-queue capacity holds after every event
        occ = cursor.occupancy
        assert all(0 <= occ[k] <= cfg.queues[k].capacity
                   for k in range(cfg.num_queues))
    res = cursor.result()
    assert sum(res.accepted_per_value) + res.rejected_count == trace.arrival_count
    # generator output is drained, so everything accepted is sent
    assert res.accepted_per_value == res.sent_per_value
    if trace.events:
        assert res.occupancy_timeline[-1] == 0
    assert res.benefit == sum(
        cfg.values[i] * res.sent_per_value[i] for i in range(cfg.num_values))


@given(st_sim_cases())
@settings(max_examples=80, deadline=None)
def test_simulation_is_deterministic(case):
    cfg, trace = case
    assert simulate(cfg, trace, greedy()) == simulate(cfg, trace, greedy())


@given(st_sim_cases())
@settings(max_examples=80, deadline=None)
def test_replay_reproduces_run(case):
    cfg, trace = case
    res = simulate(cfg, trace, greedy())
    again = replay(cfg, trace, res.decision_log)
    assert again == res


def test_replay_rejects_wrong_length():
    cfg, trace = tight_two_valued_instance()
    with pytest.raises(DiligenceViolation, match="2 entries for 4 send events"):
        replay(cfg, trace, (1, 0))


def test_replay_rejects_infeasible_schedule():
    cfg, trace = tight_two_valued_instance()
    with pytest.raises(DiligenceViolation, match="step 2"):
        replay(cfg, trace, (1, 1, None, None))  # queue 1 already empty
    with pytest.raises(DiligenceViolation, match="idles"):
        replay(cfg, trace, (1, None, 0, None))


def test_schedule_policy_drives_engine():
    cfg, trace = tight_two_valued_instance()
    res = simulate(cfg, trace, replay_schedule((0, 0, 1, None), name="manual"))
    assert res.benefit == 4


def test_decision_log_round_trip():
    log = (2, None, 0, None, 1)
    assert parse_decisions(serialize_decisions(log)) == log
    assert parse_decisions("") == ()
    with pytest.raises(TraceError, match="line 1"):
        parse_decisions('{"send":-2}')
    with pytest.raises(TraceError, match="line 2"):
        parse_decisions('{"send":0}\n{"oops":1}')


def test_timeline_records_every_event():
    cfg = restricted_config((1,), 1)
    rng = random.Random(3)
    for _ in range(50):
        trace = gen_random(cfg, steps=rng.randint(0, 9), arrivals_per_step_max=2,
                           seed=rng.randrange(2**32))
        res = simulate(cfg, trace, greedy())
        assert len(res.occupancy_timeline) == len(trace.events)
