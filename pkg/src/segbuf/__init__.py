"""segbuf: simulation and verification for class-segregated switch buffers.

A switch buffers packets of a few distinct values, one value per queue,
and may transmit one packet per time step.  This package simulates send
policies on such switches, computes the exact offline optimum, builds
adaptive worst-case workloads, and verifies the greedy policy's
guarantee ladder with exact rational arithmetic.
"""
from .adversary import AdversaryTranscript, build_lower_bound_instance, gen_bursty, gen_random
from .engine import (
    DiligenceViolation,
    SimulationCursor,
    SimulationResult,
    parse_decisions,
    replay,
    serialize_decisions,
    simulate,
)
from .harness import (
    SUITES,
    CheckReport,
    RatioRecord,
    applicable_bound,
    competitive_ratio,
    parse_sweep_spec,
    run_suite,
    sweep,
    tight_two_valued_instance,
)
from .model import (
    BoundReport,
    ConfigError,
    Event,
    QueueSpec,
    SegbufError,
    SwitchConfig,
    Trace,
    TraceError,
    compute_bounds,
    drain_extend,
    parse_config,
    parse_trace,
    restricted_config,
    serialize_config,
    serialize_trace,
    validate_trace,
)
from .oracle import (
    OracleLimitError,
    OracleResult,
    brute_force_benefit,
    max_count_for_value,
    optimal_benefit,
)
from .policies import (
    Policy,
    greedy,
    greedy_choose,
    lowest_value_first,
    make_policy,
    replay_schedule,
    round_robin,
    seeded_random,
)

__version__ = "0.1.0"

__all__ = [
    "AdversaryTranscript",
    "BoundReport",
    "CheckReport",
    "ConfigError",
    "DiligenceViolation",
    "Event",
    "OracleLimitError",
    "OracleResult",
    "Policy",
    "QueueSpec",
    "RatioRecord",
    "SUITES",
    "SegbufError",
    "SimulationCursor",
    "SimulationResult",
    "SwitchConfig",
    "Trace",
    "TraceError",
    "applicable_bound",
    "brute_force_benefit",
    "build_lower_bound_instance",
    "competitive_ratio",
    "compute_bounds",
    "drain_extend",
    "gen_bursty",
    "gen_random",
    "greedy",
    "greedy_choose",
    "lowest_value_first",
    "make_policy",
    "max_count_for_value",
    "optimal_benefit",
    "parse_config",
    "parse_decisions",
    "parse_sweep_spec",
    "parse_trace",
    "replay",
    "replay_schedule",
    "restricted_config",
    "round_robin",
    "run_suite",
    "seeded_random",
    "serialize_config",
    "serialize_decisions",
    "serialize_trace",
    "simulate",
    "sweep",
    "tight_two_valued_instance",
    "validate_trace",
]
