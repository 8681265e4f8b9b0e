"""Offline optimum: dynamic program vs exhaustive enumeration."""
import functools
import random

import pytest
from hypothesis import given, settings, strategies as st

import segbuf.oracle as oracle_mod
from segbuf import (
    OracleLimitError,
    Trace,
    TraceError,
    brute_force_benefit,
    build_lower_bound_instance,
    gen_random,
    greedy,
    max_count_for_value,
    optimal_benefit,
    replay,
    restricted_config,
    simulate,
)
from segbuf.harness import tight_two_valued_instance
from segbuf.model import SEND_EVENT, arrival


def all_diligent_runs(cfg, trace):
    """Enumerate every diligent schedule as (benefit, top_sends, log).

    Test-local reference, kept independent of the package's own
    enumerator: no pruning, no memoization, value-blind branching.
    """
    caps = cfg.capacities
    vi = tuple(q.value_index for q in cfg.queues)
    top = cfg.num_values - 1
    out = []

    def walk(idx, occ, benefit, tops, log):
        if idx == len(trace.events):
            out.append((benefit, tops, tuple(log)))
            return
        ev = trace.events[idx]
        if ev.kind == "arrive":
            q = ev.queue
            if occ[q] < caps[q]:
                occ[q] += 1
                walk(idx + 1, occ, benefit, tops, log)
                occ[q] -= 1
            else:
                walk(idx + 1, occ, benefit, tops, log)
            return
        loaded = [k for k in range(len(occ)) if occ[k] > 0]
        if not loaded:
            log.append(None)
            walk(idx + 1, occ, benefit, tops, log)
            log.pop()
            return
        for k in loaded:
            occ[k] -= 1
            log.append(k)
            walk(idx + 1, occ, benefit + cfg.values[vi[k]],
                 tops + (vi[k] == top), log)
            log.pop()
            occ[k] += 1

    walk(0, [0] * cfg.num_queues, 0, 0, [])
    return out


def first_difference_min(logs):
    def cmp(a, b):
        for x, y in zip(a, b):
            if x != y:
                return -1 if x < y else 1  # ints on both sides, see note
        return 0
    # schedules over one trace have equal length; the first divergence
    # happens in identical states, so neither side can be None there
    return min(logs, key=functools.cmp_to_key(cmp))


def test_frozen_tight_instance():
    cfg, trace = tight_two_valued_instance()
    res = optimal_benefit(cfg, trace)
    assert res.optimal_benefit == 4
    assert res.schedule == (0, 0, 1, None)
    assert res.accepted_per_value == (2, 1)


def test_frozen_adversary_trace():
    t = build_lower_bound_instance((1, 2, 4), greedy())
    res = optimal_benefit(t.config, t.trace)
    assert res.optimal_benefit == 10
    assert t.adv_benefit == 10


def test_empty_trace():
    cfg = restricted_config((1, 2), 1)
    res = optimal_benefit(cfg, Trace(()))
    assert res.optimal_benefit == 0
    assert res.schedule == ()


def test_oracle_validates_trace():
    cfg = restricted_config((1,), 1)
    with pytest.raises(TraceError):
        optimal_benefit(cfg, Trace((arrival(5),)))


@st.composite
def st_tiny_cases(draw):
    m = draw(st.integers(1, 3))
    values = tuple(sorted(draw(
        st.lists(st.integers(1, 20), min_size=m, max_size=m, unique=True))))
    cfg = restricted_config(values, draw(st.integers(1, 2)))
    trace = gen_random(cfg, steps=draw(st.integers(0, 5)),
                       arrivals_per_step_max=2, seed=draw(st.integers(0, 2**32)))
    return cfg, trace


@given(st_tiny_cases())
@settings(max_examples=120, deadline=None)
def test_dp_matches_brute_force(case):
    cfg, trace = case
    assert optimal_benefit(cfg, trace).optimal_benefit == brute_force_benefit(cfg, trace)


@given(st_tiny_cases())
@settings(max_examples=60, deadline=None)
def test_dp_matches_blind_enumeration(case):
    cfg, trace = case
    runs = all_diligent_runs(cfg, trace)
    best = max(b for b, _, _ in runs)
    res = optimal_benefit(cfg, trace)
    assert res.optimal_benefit == best
    # canonical tie-break: lowest queue index at the earliest divergence
    optimal_logs = [log for b, _, log in runs if b == best]
    assert res.schedule == first_difference_min(optimal_logs)


@given(st_tiny_cases())
@settings(max_examples=60, deadline=None)
def test_max_count_matches_blind_enumeration(case):
    cfg, trace = case
    runs = all_diligent_runs(cfg, trace)
    want = max(t for _, t, _ in runs)
    assert max_count_for_value(cfg, trace, cfg.num_values - 1) == want


def test_schedule_replays_to_claimed_benefit():
    rng = random.Random(202)
    for _ in range(40):
        cfg = restricted_config((1, 3, 9), rng.randint(1, 3))
        trace = gen_random(cfg, steps=rng.randint(0, 10), arrivals_per_step_max=3,
                           seed=rng.randrange(2**32))
        res = optimal_benefit(cfg, trace)
        assert replay(cfg, trace, res.schedule).benefit == res.optimal_benefit
        assert res.optimal_benefit >= simulate(cfg, trace, greedy()).benefit


def test_appending_work_never_hurts():
    rng = random.Random(55)
    for _ in range(40):
        cfg = restricted_config((2, 5), 2)
        trace = gen_random(cfg, steps=rng.randint(0, 6), arrivals_per_step_max=2,
                           seed=rng.randrange(2**32))
        base = optimal_benefit(cfg, trace).optimal_benefit
        plus_send = Trace(trace.events + (SEND_EVENT,))
        plus_arrival = Trace(trace.events + (arrival(rng.randrange(2)),))
        assert optimal_benefit(cfg, plus_send).optimal_benefit >= base
        assert optimal_benefit(cfg, plus_arrival).optimal_benefit >= base


def test_sparse_agrees_with_dense(monkeypatch):
    rng = random.Random(77)
    cases = []
    for _ in range(25):
        cfg = restricted_config(tuple(sorted(rng.sample(range(1, 30), 3))),
                                rng.randint(1, 3))
        trace = gen_random(cfg, steps=rng.randint(1, 8), arrivals_per_step_max=3,
                           seed=rng.randrange(2**32))
        cases.append((cfg, trace, optimal_benefit(cfg, trace)))
    monkeypatch.setattr(oracle_mod, "DENSE_STATE_THRESHOLD", 0)  # force sparse
    for cfg, trace, dense in cases:
        sparse = optimal_benefit(cfg, trace)
        assert sparse.optimal_benefit == dense.optimal_benefit
        assert sparse.schedule == dense.schedule


def test_huge_values_use_exact_arithmetic():
    # beyond int64: the sparse path must carry exact Python ints
    big = 10**19
    cfg = restricted_config((1, big), 1)
    trace = Trace((arrival(0), arrival(1), SEND_EVENT,
                   arrival(1), SEND_EVENT, SEND_EVENT))
    res = optimal_benefit(cfg, trace)
    assert res.optimal_benefit == 2 * big + 1
    assert brute_force_benefit(cfg, trace) == 2 * big + 1


def test_state_budget_is_enforced():
    cfg = restricted_config((1, 2), 2)
    trace = Trace((arrival(0), arrival(1), SEND_EVENT, SEND_EVENT))
    with pytest.raises(OracleLimitError, match="state-event cap"):
        optimal_benefit(cfg, trace, max_states=3)
    # exactly at the product is still allowed
    events, states = len(trace.events), 3 * 3
    assert optimal_benefit(cfg, trace, max_states=events * states).optimal_benefit == 3


def test_brute_force_refuses_big_inputs():
    cfg = restricted_config((1,), 1)
    too_many_sends = Trace((arrival(0),) + (SEND_EVENT,) * 13)
    with pytest.raises(OracleLimitError, match="send"):
        brute_force_benefit(cfg, too_many_sends)
    wide = restricted_config((1, 2, 3, 4, 5), 1)
    with pytest.raises(OracleLimitError, match="queue"):
        brute_force_benefit(wide, Trace((SEND_EVENT,)))
