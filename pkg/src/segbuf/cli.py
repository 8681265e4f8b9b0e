"""Command-line front end.

Subcommands: simulate, opt, ratio, adversary, gen, sweep, check.
Exit codes: 0 success, 1 failed checks or refused instances, 2 bad
usage or unparseable input.  All output is deterministic for fixed
seeds except `sweep --timing`.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import harness, oracle, policies
from .adversary import build_lower_bound_instance, gen_bursty, gen_random
from .engine import DiligenceViolation, serialize_decisions, simulate
from .model import (
    SegbufError,
    compute_bounds,
    parse_config,
    parse_trace,
    serialize_config,
    serialize_trace,
)

USAGE_ERROR = 2
CHECK_ERROR = 1


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _emit(doc: dict) -> None:
    print(json.dumps(doc, separators=(",", ":")))


def _frac(fr: Fraction | None) -> list[int] | None:
    return None if fr is None else [fr.numerator, fr.denominator]


def _load_config(args):
    return parse_config(_read(args.config))


def _load_trace(args):
    return parse_trace(_read(args.trace))


def cmd_simulate(args) -> int:
    config = _load_config(args)
    trace = _load_trace(args)
    policy = policies.make_policy(args.policy)
    result = simulate(config, trace, policy)
    if args.out:
        _write(args.out, serialize_decisions(result.decision_log))
    _emit({
        "policy": policy.name,
        "benefit": result.benefit,
        "accepted_per_value": list(result.accepted_per_value),
        "sent_per_value": list(result.sent_per_value),
        "rejected": result.rejected_count,
    })
    return 0


def cmd_opt(args) -> int:
    config = _load_config(args)
    trace = _load_trace(args)
    result = oracle.optimal_benefit(config, trace, max_states=args.max_states)
    if args.out:
        _write(args.out, serialize_decisions(result.schedule))
    _emit({
        "optimal_benefit": result.optimal_benefit,
        "accepted_per_value": list(result.accepted_per_value),
        "states_explored": result.state_count,
    })
    return 0


def cmd_ratio(args) -> int:
    config = _load_config(args)
    trace = _load_trace(args)
    policy = policies.make_policy(args.policy)
    record = harness.competitive_ratio(config, trace, policy, max_states=args.max_states)
    _emit({
        "policy": record.policy,
        "alg_benefit": record.alg_benefit,
        "opt_benefit": record.opt_benefit,
        "ratio": _frac(record.ratio),
        "ratio_dec": harness._dec6(record.ratio),
        "bound": _frac(record.applicable_bound),
        "satisfied": record.bound_satisfied,
        "slack": _frac(record.slack),
    })
    return 0


def cmd_adversary(args) -> int:
    try:
        values = tuple(int(v) for v in args.values.split(","))
    except ValueError:
        raise SegbufError(f"--values must be comma-separated integers, got {args.values!r}") from None
    policy = policies.make_policy(args.policy)
    transcript = build_lower_bound_instance(values, policy)
    bounds = compute_bounds(transcript.config)
    doc = {
        "config": json.loads(serialize_config(transcript.config)),
        "trace": [
            {"event": "arrive", "queue": e.queue} if e.kind == "arrive" else {"event": "send"}
            for e in transcript.trace.events
        ],
        "observed_sends": list(transcript.observed_sends),
        "observed_send_values": [transcript.config.values[i] for i in transcript.observed_sends],
        "value_sets": [list(s) for s in transcript.value_sets],
        "alg_schedule": ["idle" if d is None else d for d in transcript.alg_schedule],
        "adv_schedule": ["idle" if d is None else d for d in transcript.adv_schedule],
        "alg_benefit": transcript.alg_benefit,
        "adv_benefit": transcript.adv_benefit,
        "ratio": _frac(transcript.ratio),
        "lower_bound": _frac(bounds.lower_bound),
    }
    if args.out:
        _write(args.out, json.dumps(doc, indent=2) + "\n")
    if args.trace_out:
        _write(args.trace_out, serialize_trace(transcript.trace))
    _emit({
        "policy": policy.name,
        "alg_benefit": transcript.alg_benefit,
        "adv_benefit": transcript.adv_benefit,
        "ratio": _frac(transcript.ratio),
        "lower_bound": _frac(bounds.lower_bound),
    })
    return 0


def cmd_gen(args) -> int:
    config = _load_config(args)
    if args.kind == "bursty":
        trace = gen_bursty(config, steps=args.steps, burst_len=args.burst_len,
                           burst_size=args.burst_size, seed=args.seed)
    else:
        trace = gen_random(config, steps=args.steps,
                           arrivals_per_step_max=args.max_arrivals, seed=args.seed)
    _write(args.out, serialize_trace(trace))
    return 0


def cmd_sweep(args) -> int:
    spec = harness.parse_sweep_spec(_read(args.spec))
    csv = harness.sweep(spec, max_states=args.max_states, timing=args.timing)
    _write(args.out, csv)
    return 0


def cmd_check(args) -> int:
    report = harness.run_suite(
        args.suite, {"trials": args.trials, "max_states": args.max_states}, seed=args.seed
    )
    print(
        f"{report.suite}: {report.tested} tested, {report.skipped} skipped, "
        f"{len(report.failures)} failures"
    )
    for failure in report.failures:
        print(json.dumps({
            "instance": failure.instance_id,
            "description": failure.description,
            "witness": dict(failure.witness),
        }, separators=(",", ":")), file=sys.stderr)
    return 0 if report.passed else CHECK_ERROR


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="segbuf",
        description="Simulate, verify, and stress multi-queue switch buffering policies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True, trace=True, policy=False, max_states=False, out=False):
        if config:
            p.add_argument("--config", required=True, help="switch configuration JSON file")
        if trace:
            p.add_argument("--trace", required=True, help="trace JSON-Lines file")
        if policy:
            p.add_argument("--policy", required=True,
                           help="greedy | round-robin | lowest-first | random:<seed> | replay:<logfile>")
        if max_states:
            p.add_argument("--max-states", type=int, default=oracle.DEFAULT_MAX_STATES,
                           help="oracle state-event cap (default 10^8)")
        if out:
            p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("simulate", help="run one policy over a trace")
    add_common(p, policy=True, out=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("opt", help="exact offline optimum for a trace")
    add_common(p, max_states=True, out=True)
    p.set_defaults(func=cmd_opt)

    p = sub.add_parser("ratio", help="competitive ratio of a policy against the optimum")
    add_common(p, policy=True, max_states=True)
    p.set_defaults(func=cmd_ratio)

    p = sub.add_parser("adversary", help="build the adaptive worst-case instance for a policy")
    p.add_argument("--values", required=True, help="comma-separated packet values, e.g. 1,2,4")
    p.add_argument("--policy", required=True,
                   help="deterministic policy: greedy | round-robin | lowest-first | replay:<logfile>")
    p.add_argument("--out", help="write the full transcript JSON here")
    p.add_argument("--trace-out", help="write the constructed trace (JSON Lines) here")
    p.set_defaults(func=cmd_adversary)

    p = sub.add_parser("gen", help="generate a seeded workload trace")
    add_common(p, trace=False, out=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--kind", choices=("random", "bursty"), default="random")
    p.add_argument("--steps", type=int, default=20)
    p.add_argument("--max-arrivals", type=int, default=3, help="random kind: arrivals per step cap")
    p.add_argument("--burst-len", type=int, default=2, help="bursty kind: phase length in steps")
    p.add_argument("--burst-size", type=int, default=3, help="bursty kind: packets per targeted queue")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="run a sweep spec and emit the CSV report")
    p.add_argument("--spec", required=True, help="sweep description JSON file")
    p.add_argument("--max-states", type=int, default=oracle.DEFAULT_MAX_STATES)
    p.add_argument("--out", help="output CSV file (default: stdout)")
    p.add_argument("--timing", action="store_true",
                   help="fill runtime_ms with wall-clock times (breaks byte reproducibility)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("check", help="run a named verification suite")
    p.add_argument("--suite", required=True, help=" | ".join(harness.SUITES))
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-states", type=int, default=oracle.DEFAULT_MAX_STATES)
    p.set_defaults(func=cmd_check)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (SegbufError, ValueError) as exc:
        if isinstance(exc, (oracle.OracleLimitError, DiligenceViolation)):
            print(f"error: {exc}", file=sys.stderr)
            return CHECK_ERROR
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
