"""Event-driven simulation core.

The engine owns the buffer rules so that policies cannot break them:
arrivals are accepted whenever the destination queue has room (the
policy is never consulted), and a packet must be transmitted at every
send event where some queue is non-empty.  A policy only ever picks
*which* non-empty queue transmits.

The cursor is resumable on purpose: adaptive workloads feed events one
at a time and inspect the policy's reaction before deciding what
arrives next.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

from .model import ARRIVE, SegbufError, SwitchConfig, Trace, TraceError

# A decision log entry: queue index that transmitted, or None for an
# idle send event (all queues empty).
Decision = int | None


class DiligenceViolation(SegbufError):
    """A schedule or policy broke the work-conserving send rules."""

    def __init__(self, step: int, message: str):
        super().__init__(f"step {step}: {message}")
        self.step = step


@dataclass(slots=True)
class QueueState:
    """Live view handed to policies: occupancy per queue, current step.

    step is 1-based; the send event closing step k is the k-th send.
    Policies must treat this as read-only.
    """

    occupancy: list[int]
    step: int


@dataclass(frozen=True, slots=True)
class SimulationResult:
    """Everything observable about one finished run."""

    benefit: int
    accepted_per_value: tuple[int, ...]
    sent_per_value: tuple[int, ...]
    rejected_count: int
    decision_log: tuple[Decision, ...]
    occupancy_timeline: tuple[int, ...]  # total buffered packets after each event


class SimulationCursor:
    """Step-by-step simulation of one policy on one configuration.

    Feed events with arrive()/send(); read the outcome at any point via
    result().  A cursor is single-use: driving two traces through one
    cursor concatenates them.
    """

    def __init__(self, config: SwitchConfig, policy) -> None:
        self.config = config
        self.policy = policy
        self.state = QueueState([0] * config.num_queues, 1)
        self._queue_values = tuple(config.queue_value(k) for k in range(config.num_queues))
        self._capacities = config.capacities
        self._value_index = tuple(q.value_index for q in config.queues)
        self.benefit = 0
        self.accepted = [0] * config.num_values
        self.sent = [0] * config.num_values
        self.rejected = 0
        self.decisions: list[Decision] = []
        self.timeline: list[int] = []
        self._total = 0

    @property
    def occupancy(self) -> tuple[int, ...]:
        return tuple(self.state.occupancy)

    def arrive(self, queue_id: int) -> bool:
        """Deliver one packet to a queue; returns True when accepted.

        Acceptance is forced by residual capacity; the policy has no say.
        """
        if not 0 <= queue_id < self.config.num_queues:
            raise TraceError(
                f"arrive queue {queue_id} out of range (n={self.config.num_queues})"
            )
        occ = self.state.occupancy
        if occ[queue_id] < self._capacities[queue_id]:
            occ[queue_id] += 1
            self.accepted[self._value_index[queue_id]] += 1
            self._total += 1
            accepted = True
        else:
            self.rejected += 1
            accepted = False
        self.timeline.append(self._total)
        return accepted

    def send(self) -> Decision:
        """Close the current step: transmit from the policy's queue.

        Returns the queue index served, or None when every queue was
        empty (recorded as an idle send).
        """
        state = self.state
        occ = state.occupancy
        if self._total == 0:
            self.decisions.append(None)
            self.timeline.append(0)
            state.step += 1
            return None
        choice = self.policy.choose(self.config, state)
        if not isinstance(choice, int) or not 0 <= choice < len(occ):
            raise DiligenceViolation(
                state.step, f"policy {self.policy.name!r} chose out-of-range queue {choice!r}"
            )
        if occ[choice] == 0:
            raise DiligenceViolation(
                state.step, f"policy {self.policy.name!r} chose empty queue {choice}"
            )
        occ[choice] -= 1
        self._total -= 1
        vi = self._value_index[choice]
        self.sent[vi] += 1
        self.benefit += self.config.values[vi]
        self.decisions.append(choice)
        self.timeline.append(self._total)
        state.step += 1
        return choice

    def feed(self, trace: Trace) -> None:
        for event in trace.events:
            if event.kind == ARRIVE:
                self.arrive(event.queue)  # type: ignore[arg-type]
            else:
                self.send()

    def result(self) -> SimulationResult:
        return SimulationResult(
            benefit=self.benefit,
            accepted_per_value=tuple(self.accepted),
            sent_per_value=tuple(self.sent),
            rejected_count=self.rejected,
            decision_log=tuple(self.decisions),
            occupancy_timeline=tuple(self.timeline),
        )


def simulate(config: SwitchConfig, trace: Trace, policy) -> SimulationResult:
    """Run a policy over a full trace.  Deterministic for a fixed policy."""
    cursor = SimulationCursor(config, policy)
    cursor.feed(trace)
    return cursor.result()


class _SchedulePolicy:
    """Replays a recorded decision log, indexed by the current step."""

    deterministic = True

    def __init__(self, log: tuple[Decision, ...], name: str = "replay"):
        self.name = name
        self.log = log

    def choose(self, config: SwitchConfig, state: QueueState) -> int:
        entry = self.log[state.step - 1]
        if entry is None:
            raise DiligenceViolation(
                state.step, "schedule idles while some queue is non-empty"
            )
        return entry


def schedule_policy(log: tuple[Decision, ...], name: str = "replay") -> _SchedulePolicy:
    """Wrap a decision log so the engine can re-execute it as a policy."""
    return _SchedulePolicy(tuple(log), name)


def replay(config: SwitchConfig, trace: Trace, log: tuple[Decision, ...]) -> SimulationResult:
    """Re-execute a fixed schedule and verify it was diligent.

    The log must contain one entry per send event in the trace; sending
    from an empty queue or idling with buffered packets raises
    DiligenceViolation naming the step.
    """
    log = tuple(log)
    sends = trace.send_count
    if len(log) != sends:
        raise DiligenceViolation(
            min(len(log), sends) + 1,
            f"decision log has {len(log)} entries for {sends} send events",
        )
    result = simulate(config, trace, schedule_policy(log))
    for step0, (got, want) in enumerate(zip(result.decision_log, log)):
        if got != want:
            # The engine recorded an idle where the log named a queue:
            # the schedule tried to send from an empty configuration.
            raise DiligenceViolation(
                step0 + 1, f"schedule sends from queue {want} while all queues are empty"
            )
    return result


def serialize_decisions(log: tuple[Decision, ...]) -> str:
    """Decision log as JSON Lines: {"send":2} or {"send":"idle"}."""
    lines = []
    for d in log:
        lines.append('{"send":"idle"}' if d is None else json.dumps({"send": d}, separators=(",", ":")))
    return "\n".join(lines) + ("\n" if lines else "")


def parse_decisions(text: str) -> tuple[Decision, ...]:
    out: list[Decision] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict) or set(obj) != {"send"}:
            raise TraceError(f"line {lineno}: expected an object with a single 'send' field")
        entry = obj["send"]
        if entry == "idle":
            out.append(None)
        elif isinstance(entry, int) and not isinstance(entry, bool) and entry >= 0:
            out.append(entry)
        else:
            raise TraceError(f"line {lineno}: 'send' must be a queue index or \"idle\"")
    return tuple(out)
