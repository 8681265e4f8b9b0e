"""Core types for switch configurations and event traces.

The setting: a switch buffers packets of m distinct positive values in n
FIFO-less counters ("queues"), each queue dedicated to a single value and
bounded by its own capacity.  Time is divided into steps; packets arrive
at arbitrary moments inside a step and one packet may be transmitted at
the end of each step.  A trace is the interleaved sequence of arrive and
send events; the k-th send event closes step k.

Configurations where every value owns exactly one queue and all queues
share one capacity form the "restricted" shape; several worst-case
guarantees are tighter there, which is why the shape is detected here
and reported alongside the bound arithmetic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable


class SegbufError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(SegbufError):
    """A switch configuration is malformed."""


class TraceError(SegbufError):
    """A trace file or event stream is malformed."""


@dataclass(frozen=True, slots=True)
class QueueSpec:
    """One queue: which value it stores and how many packets it holds."""

    value_index: int
    capacity: int


@dataclass(frozen=True, slots=True)
class SwitchConfig:
    """Immutable switch description: the value ladder and the queues."""

    values: tuple[int, ...]
    queues: tuple[QueueSpec, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "queues", tuple(self.queues))
        if not self.values:
            raise ConfigError("values must be a non-empty list")
        for i, v in enumerate(self.values):
            if isinstance(v, bool) or not isinstance(v, int):
                raise ConfigError(f"values[{i}] must be an integer")
            if v < 1:
                raise ConfigError(f"values[{i}] must be >= 1")
            if i > 0 and v <= self.values[i - 1]:
                raise ConfigError(f"values not strictly increasing at index {i}")
        m = len(self.values)
        for k, q in enumerate(self.queues):
            if not isinstance(q, QueueSpec):
                raise ConfigError(f"queues[{k}] must be a QueueSpec")
            if isinstance(q.value_index, bool) or not isinstance(q.value_index, int):
                raise ConfigError(f"queues[{k}].value_index must be an integer")
            if not 0 <= q.value_index < m:
                raise ConfigError(
                    f"queues[{k}].value_index {q.value_index} out of range for {m} values"
                )
            if isinstance(q.capacity, bool) or not isinstance(q.capacity, int):
                raise ConfigError(f"queues[{k}].capacity must be an integer")
            if q.capacity < 1:
                raise ConfigError(f"queues[{k}].capacity must be >= 1")

    @property
    def num_values(self) -> int:
        return len(self.values)

    @property
    def num_queues(self) -> int:
        return len(self.queues)

    @property
    def capacities(self) -> tuple[int, ...]:
        return tuple(q.capacity for q in self.queues)

    def queue_value(self, queue_id: int) -> int:
        """Packet value stored by the given queue."""
        return self.values[self.queues[queue_id].value_index]

    @property
    def restricted(self) -> bool:
        """True when each value owns exactly one queue and capacities agree.

        This is always computed from the queue list, never assumed.
        """
        if len(self.queues) != len(self.values):
            return False
        indices = sorted(q.value_index for q in self.queues)
        if indices != list(range(len(self.values))):
            return False
        caps = {q.capacity for q in self.queues}
        return len(caps) == 1

    @property
    def one_queue_per_value(self) -> bool:
        """True when no value class is spread over several queues.

        Weaker than restricted: classes may be absent and capacities may
        differ.  Splitting one class across queues lets equal-valued
        sends disagree on the queue, which costs real benefit.
        """
        indices = [q.value_index for q in self.queues]
        return len(indices) == len(set(indices))


def restricted_config(values: Iterable[int], capacity: int) -> SwitchConfig:
    """Build the one-queue-per-value configuration with a uniform capacity.

    Queue i stores values[i], so queue order mirrors the value ladder.
    """
    vals = tuple(values)
    return SwitchConfig(vals, tuple(QueueSpec(i, capacity) for i in range(len(vals))))


ARRIVE = "arrive"
SEND = "send"


@dataclass(frozen=True, slots=True)
class Event:
    """A single trace event.  queue is set for arrivals, None for sends."""

    kind: str
    queue: int | None = None


def arrival(queue: int) -> Event:
    return Event(ARRIVE, queue)


# Sends carry no payload, so a single shared instance suffices.
SEND_EVENT = Event(SEND)


@dataclass(frozen=True, slots=True)
class Trace:
    """An immutable event sequence.

    Arrival order inside a step is exactly file order; no finer-grained
    timestamps exist because no observable behaviour depends on them.
    """

    events: tuple[Event, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "events", tuple(self.events))

    @property
    def arrival_count(self) -> int:
        return sum(1 for e in self.events if e.kind == ARRIVE)

    @property
    def send_count(self) -> int:
        return sum(1 for e in self.events if e.kind == SEND)

    @property
    def sends_after_last_arrival(self) -> int:
        n = 0
        for e in reversed(self.events):
            if e.kind == ARRIVE:
                break
            n += 1
        return n

    @property
    def drained(self) -> bool:
        """Safe drain check: enough trailing sends to flush any buffer.

        Total arrivals is used as the bound on what any algorithm could
        still hold after the last arrival, so this can be conservative.
        """
        return self.sends_after_last_arrival >= self.arrival_count


EMPTY_TRACE = Trace(())


def parse_config(text: str) -> SwitchConfig:
    """Parse the JSON configuration document.

    Expected shape:
        {"values": [1, 2, 4], "queues": [{"value_index": 0, "capacity": 1}, ...]}
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("top level must be an object")
    unknown = set(doc) - {"values", "queues"}
    if unknown:
        raise ConfigError(f"unknown field {sorted(unknown)[0]!r}")
    if "values" not in doc:
        raise ConfigError("missing field 'values'")
    if "queues" not in doc:
        raise ConfigError("missing field 'queues'")
    values = doc["values"]
    queues = doc["queues"]
    if not isinstance(values, list):
        raise ConfigError("'values' must be a list")
    if not isinstance(queues, list):
        raise ConfigError("'queues' must be a list")
    specs = []
    for k, q in enumerate(queues):
        if not isinstance(q, dict):
            raise ConfigError(f"queues[{k}] must be an object")
        unknown = set(q) - {"value_index", "capacity"}
        if unknown:
            raise ConfigError(f"queues[{k}]: unknown field {sorted(unknown)[0]!r}")
        if "value_index" not in q:
            raise ConfigError(f"queues[{k}] missing field 'value_index'")
        if "capacity" not in q:
            raise ConfigError(f"queues[{k}] missing field 'capacity'")
        specs.append(QueueSpec(q["value_index"], q["capacity"]))
    return SwitchConfig(tuple(values), tuple(specs))


def serialize_config(config: SwitchConfig) -> str:
    doc = {
        "values": list(config.values),
        "queues": [
            {"value_index": q.value_index, "capacity": q.capacity} for q in config.queues
        ],
    }
    return json.dumps(doc, separators=(",", ":"))


def parse_trace(text: str) -> Trace:
    """Parse a JSON-Lines trace: one event object per line.

    Lines look like {"event":"arrive","queue":3} or {"event":"send"}.
    Queue range is config-relative and therefore left to validate_trace.
    """
    events: list[Event] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TraceError(f"line {lineno}: invalid JSON: {exc}") from None
        if not isinstance(obj, dict) or "event" not in obj:
            raise TraceError(f"line {lineno}: expected an object with an 'event' field")
        kind = obj["event"]
        if kind == ARRIVE:
            unknown = set(obj) - {"event", "queue"}
            if unknown:
                raise TraceError(f"line {lineno}: unknown field {sorted(unknown)[0]!r}")
            if "queue" not in obj:
                raise TraceError(f"line {lineno}: arrive event missing 'queue'")
            q = obj["queue"]
            if isinstance(q, bool) or not isinstance(q, int) or q < 0:
                raise TraceError(f"line {lineno}: 'queue' must be a non-negative integer")
            events.append(Event(ARRIVE, q))
        elif kind == SEND:
            unknown = set(obj) - {"event"}
            if unknown:
                raise TraceError(f"line {lineno}: unknown field {sorted(unknown)[0]!r}")
            events.append(SEND_EVENT)
        else:
            raise TraceError(f"line {lineno}: unknown event kind {kind!r}")
    return Trace(tuple(events))


def serialize_trace(trace: Trace) -> str:
    """Render a trace as JSON Lines (UTF-8, LF, keys in canonical order)."""
    lines = []
    for e in trace.events:
        if e.kind == ARRIVE:
            lines.append(json.dumps({"event": "arrive", "queue": e.queue}, separators=(",", ":")))
        else:
            lines.append('{"event":"send"}')
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True, slots=True)
class TraceValidation:
    """Outcome of validate_trace: violations found, plus the drain flag."""

    violations: tuple[str, ...]
    drained: bool

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_trace(config: SwitchConfig, trace: Trace) -> TraceValidation:
    """Check a trace against a configuration.  Reports, never raises."""
    violations = []
    n = config.num_queues
    for i, e in enumerate(trace.events):
        if e.kind == ARRIVE and not 0 <= (e.queue or 0) < n:
            violations.append(f"event {i}: arrive queue {e.queue} out of range (n={n})")
    return TraceValidation(tuple(violations), trace.drained)


def drain_extend(config: SwitchConfig, trace: Trace) -> Trace:
    """Append send events until the trace satisfies the drain check.

    The target count is the total number of arrivals, matching the
    conservative bound used by Trace.drained; config is accepted for
    signature symmetry but a finer per-config bound is deliberately
    not used, so the predicate and the extender always agree.
    Idempotent on drained traces.
    """
    deficit = trace.arrival_count - trace.sends_after_last_arrival
    if deficit <= 0:
        return trace
    return Trace(trace.events + (SEND_EVENT,) * deficit)


@dataclass(frozen=True, slots=True)
class BoundReport:
    """Exact worst-case guarantees for a configuration's value ladder.

    r is the largest ratio between adjacent values (0 for a single
    value); alpha is the value spread and only defined for two values.
    All fields are exact fractions; nothing here is ever floated.
    """

    r: Fraction
    alpha: Fraction | None
    general_bound: Fraction
    restricted_bound: Fraction
    lower_bound: Fraction


def compute_bounds(config: SwitchConfig) -> BoundReport:
    """Derive the guarantee ladder for a configuration.

    general_bound caps OPT/GREEDY on this configuration;
    restricted_bound is the sharper cap that applies when the
    configuration is restricted; lower_bound is the ratio no
    deterministic online policy can beat on worst-case input over
    these values.

    The two-valued refinement of general_bound, (alpha+1)/alpha, needs
    every value class confined to a single queue.  With a class split
    over two queues of unequal capacity, greedy and an offline schedule
    can send equal values from different queues, and the freed slot is
    worth a full extra packet: values (1, 5), 5-queues of capacity 2
    and 1, trace "arrive both, send, arrive the small one, drain"
    yields 15/10 = 3/2 > 6/5.  Such configurations keep the factor-2
    guarantee and nothing sharper.
    """
    values = config.values
    m = len(values)
    if m == 1:
        r = Fraction(0)
    else:
        r = max(Fraction(values[i], values[i + 1]) for i in range(m - 1))
    alpha = Fraction(values[1], values[0]) if m == 2 else None
    if m == 2:
        assert alpha is not None
        general = (alpha + 1) / alpha if config.one_queue_per_value else Fraction(2)
        restricted = (alpha + 2) / (alpha + 1)
    else:
        general = Fraction(2)
        restricted = 1 + r
    lower = 2 - Fraction(values[-1], sum(values))
    return BoundReport(r, alpha, general, restricted, lower)
