"""Exact offline optimum for a configuration and trace.

The optimum is taken over every work-conserving send schedule:
acceptance is forced by residual capacity (so arrivals are deterministic
transitions), and a send event must transmit whenever some queue holds a
packet.  The solver walks the event list backward over the space of
occupancy vectors, encoded as mixed-radix integers with radix
capacity+1 per queue, computing the best achievable benefit-to-go for
every (event, occupancy) pair.  A forward pass then reconstructs the
canonical optimal schedule: among all optimal schedules, the one that
transmits from the lowest queue index at the earliest send where
optimal schedules differ.

Two interchangeable backward passes exist: a dense numpy one (fast, used
while the occupancy space fits DENSE_STATE_THRESHOLD and benefits fit
int64) and a sparse dict one over forward-reachable states (unbounded
integers, used for huge capacities).  Both feed the same reconstruction.

brute_force_benefit enumerates send schedules outright and shares no
code with the DP; it exists to cross-check the solver on small inputs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .engine import Decision, replay
from .model import ARRIVE, SegbufError, SwitchConfig, Trace, TraceError, validate_trace

DEFAULT_MAX_STATES = 10**8
# Above this many occupancy states the dense layers would not pay off.
DENSE_STATE_THRESHOLD = 1 << 20

_NEG = np.iinfo(np.int64).min // 4


class OracleLimitError(SegbufError):
    """The instance exceeds the configured state or enumeration budget."""


@dataclass(frozen=True, slots=True)
class OracleResult:
    """Optimal benefit plus one canonical schedule achieving it."""

    optimal_benefit: int
    schedule: tuple[Decision, ...]
    accepted_per_value: tuple[int, ...]
    state_count: int


def _strides(radices: tuple[int, ...]) -> list[int]:
    out = []
    stride = 1
    for r in radices:
        out.append(stride)
        stride *= r
    return out


@lru_cache(maxsize=64)
def _dense_maps(radices: tuple[int, ...]):
    """Per-queue transition index arrays over the full occupancy space."""
    size = math.prod(radices)
    idx = np.arange(size, dtype=np.int64)
    maps = []
    stride = 1
    for r in radices:
        digit = (idx // stride) % r
        acc_src = np.flatnonzero(digit < r - 1)
        send_src = np.flatnonzero(digit > 0)
        maps.append((stride, acc_src, acc_src + stride, send_src, send_src - stride))
        stride *= r
    return maps


def _backward_dense(radices, events, reward):
    maps = _dense_maps(radices)
    size = math.prod(radices)
    count = len(events)
    layers = np.empty((count + 1, size), dtype=np.int64)
    layers[count].fill(0)
    for k in range(count - 1, -1, -1):
        event = events[k]
        nxt = layers[k + 1]
        cur = layers[k]
        if event.kind == ARRIVE:
            _, acc_src, acc_tgt, _, _ = maps[event.queue]
            np.copyto(cur, nxt)
            if acc_src.size:
                cur[acc_src] = nxt[acc_tgt]
        else:
            cur.fill(_NEG)
            for q in range(len(radices)):
                _, _, _, send_src, send_tgt = maps[q]
                cand = nxt[send_tgt]
                if reward[q]:
                    cand = cand + reward[q]
                np.maximum(cur[send_src], cand, out=cand)
                cur[send_src] = cand
            cur[0] = nxt[0]
    return layers, count * size


def _backward_sparse(radices, events, reward):
    """Dict-based twin of the dense pass, restricted to reachable states."""
    strides = _strides(radices)
    n = len(radices)
    count = len(events)
    reach: list[set[int]] = [set() for _ in range(count + 1)]
    cur = {0}
    reach[0] = cur
    for k, event in enumerate(events):
        nxt: set[int] = set()
        if event.kind == ARRIVE:
            q = event.queue
            stride, radix = strides[q], radices[q]
            for s in cur:
                nxt.add(s + stride if (s // stride) % radix < radix - 1 else s)
        else:
            for s in cur:
                if s == 0:
                    nxt.add(0)
                    continue
                for q in range(n):
                    if (s // strides[q]) % radices[q] > 0:
                        nxt.add(s - strides[q])
        reach[k + 1] = nxt
        cur = nxt
    layers: list[dict[int, int]] = [dict() for _ in range(count + 1)]
    layers[count] = {s: 0 for s in reach[count]}
    for k in range(count - 1, -1, -1):
        event = events[k]
        nxt_layer = layers[k + 1]
        cur_layer = layers[k]
        if event.kind == ARRIVE:
            q = event.queue
            stride, radix = strides[q], radices[q]
            for s in reach[k]:
                cur_layer[s] = nxt_layer[s + stride if (s // stride) % radix < radix - 1 else s]
        else:
            for s in reach[k]:
                if s == 0:
                    cur_layer[0] = nxt_layer[0]
                    continue
                best = None
                for q in range(n):
                    if (s // strides[q]) % radices[q] > 0:
                        got = reward[q] + nxt_layer[s - strides[q]]
                        if best is None or got > best:
                            best = got
                cur_layer[s] = best  # type: ignore[assignment]
    return layers, sum(len(reach[k]) for k in range(count))


def _canonical_walk(radices, events, reward, layers):
    """Forward pass picking the lowest-index optimal move at each send."""
    strides = _strides(radices)
    n = len(radices)
    s = 0
    schedule: list[Decision] = []
    for k, event in enumerate(events):
        if event.kind == ARRIVE:
            q = event.queue
            stride, radix = strides[q], radices[q]
            if (s // stride) % radix < radix - 1:
                s += stride
        else:
            if s == 0:
                schedule.append(None)
                continue
            target = int(layers[k][s])
            chosen = -1
            for q in range(n):
                stride = strides[q]
                if (s // stride) % radices[q] > 0 and reward[q] + int(layers[k + 1][s - stride]) == target:
                    chosen = q
                    break
            if chosen < 0:
                raise AssertionError("DP inconsistency: no move matches the layer value")
            schedule.append(chosen)
            s -= strides[chosen]
    return tuple(schedule)


def _solve(config: SwitchConfig, trace: Trace, reward, max_states: int):
    check = validate_trace(config, trace)
    if not check.ok:
        raise TraceError(check.violations[0])
    radices = tuple(c + 1 for c in config.capacities)
    size = math.prod(radices)
    events = trace.events
    if len(events) * size > max_states:
        raise OracleLimitError(
            f"instance too large: {len(events)} events over {size} occupancy states "
            f"exceeds the {max_states} state-event cap"
        )
    if not events:
        return 0, (), 0
    huge_benefit = trace.arrival_count * max(config.values) > 2**62
    if size <= DENSE_STATE_THRESHOLD and not huge_benefit:
        layers, state_count = _backward_dense(radices, events, reward)
    else:
        layers, state_count = _backward_sparse(radices, events, reward)
    schedule = _canonical_walk(radices, events, reward, layers)
    return int(layers[0][0]), schedule, state_count


def optimal_benefit(config: SwitchConfig, trace: Trace, max_states: int = DEFAULT_MAX_STATES) -> OracleResult:
    """Best achievable benefit over all work-conserving schedules.

    The returned schedule is replayed through the engine before this
    function returns; a mismatch with the DP value raises, so a result
    in hand is always engine-verified.  Comparisons against online runs
    are meaningful on drained traces (everything buffered gets a send
    slot); the solver itself accepts any trace.

    Memory grows with events x occupancy states; shrink max_states to
    refuse sooner.
    """
    reward = tuple(config.queue_value(k) for k in range(config.num_queues))
    best, schedule, state_count = _solve(config, trace, reward, max_states)
    replayed = replay(config, trace, schedule)
    if replayed.benefit != best:
        raise AssertionError(
            f"oracle self-check failed: schedule replays to {replayed.benefit}, DP claims {best}"
        )
    return OracleResult(best, schedule, replayed.accepted_per_value, state_count)


def max_count_for_value(config: SwitchConfig, trace: Trace, value_index: int,
                        max_states: int = DEFAULT_MAX_STATES) -> int:
    """Most packets of one value any work-conserving schedule can transmit."""
    if not 0 <= value_index < config.num_values:
        raise ValueError(f"value_index {value_index} out of range for {config.num_values} values")
    reward = tuple(1 if q.value_index == value_index else 0 for q in config.queues)
    best, schedule, _ = _solve(config, trace, reward, max_states)
    replayed = replay(config, trace, schedule)
    if replayed.sent_per_value[value_index] != best:
        raise AssertionError(
            f"count self-check failed: schedule sends {replayed.sent_per_value[value_index]}, "
            f"DP claims {best}"
        )
    return best


_BRUTE_MAX_SENDS = 12
_BRUTE_MAX_QUEUES = 4


def brute_force_benefit(config: SwitchConfig, trace: Trace) -> int:
    """Exhaustive enumeration of send schedules; no shared code with the DP.

    Refuses instances beyond 12 send events or 4 queues, where the
    enumeration tree stops being a sane cross-check.
    """
    if trace.send_count > _BRUTE_MAX_SENDS:
        raise OracleLimitError(
            f"brute force refuses {trace.send_count} send events (cap {_BRUTE_MAX_SENDS})"
        )
    if config.num_queues > _BRUTE_MAX_QUEUES:
        raise OracleLimitError(
            f"brute force refuses {config.num_queues} queues (cap {_BRUTE_MAX_QUEUES})"
        )
    check = validate_trace(config, trace)
    if not check.ok:
        raise TraceError(check.violations[0])
    caps = config.capacities
    qvals = tuple(config.queue_value(k) for k in range(config.num_queues))
    # Arrival batches preceding each send; arrivals after the last send
    # can never be transmitted and are irrelevant to the maximum.
    batches: list[list[int]] = [[]]
    for event in trace.events:
        if event.kind == ARRIVE:
            batches[-1].append(event.queue)  # type: ignore[arg-type]
        else:
            batches.append([])
    batches.pop()

    def admit(occ: tuple[int, ...], queue_ids) -> tuple[int, ...]:
        buf = list(occ)
        for q in queue_ids:
            if buf[q] < caps[q]:
                buf[q] += 1
        return tuple(buf)

    def explore(i: int, occ: tuple[int, ...]) -> int:
        if i == len(batches):
            return 0
        occ = admit(occ, batches[i])
        if all(b == 0 for b in occ):
            return explore(i + 1, occ)
        best = 0
        for q, held in enumerate(occ):
            if held > 0:
                after = list(occ)
                after[q] -= 1
                got = qvals[q] + explore(i + 1, tuple(after))
                if got > best:
                    best = got
        return best

    return explore(0, (0,) * config.num_queues)
