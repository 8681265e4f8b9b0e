"""Competitive-ratio harness: ratio records, check suites, CSV sweeps.

Everything here compares online runs against the exact oracle with
rational arithmetic; no bound is ever checked through floats.  The
check suites are executable statements of the guarantees the toolkit
exists to verify: each one generates seeded instances, evaluates an
exact inequality, and reports any violation together with the full
instance so a failure can be replayed by hand.
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping

from . import oracle, policies
from .adversary import build_lower_bound_instance, gen_bursty, gen_random
from .engine import replay, simulate
from .model import (
    SEND_EVENT,
    QueueSpec,
    SegbufError,
    SwitchConfig,
    Trace,
    arrival,
    compute_bounds,
    drain_extend,
    restricted_config,
    serialize_config,
    serialize_trace,
)

SUITES = (
    "upper-bounds",
    "lower-bound",
    "lemma-vm",
    "lemma-central",
    "lemma-queuesize",
    "lemma-two-valued",
    "oracle-cross",
)


class SweepSpecError(SegbufError):
    """The sweep description document is malformed."""


@dataclass(frozen=True)
class RatioRecord:
    """One instance's online-vs-offline comparison, exact throughout."""

    instance_id: str
    policy: str
    alg_benefit: int
    opt_benefit: int
    ratio: Fraction
    applicable_bound: Fraction | None
    bound_satisfied: bool
    slack: Fraction | None
    states_explored: int


@dataclass(frozen=True)
class CheckFailure:
    instance_id: str
    description: str
    witness: Mapping[str, object]


@dataclass(frozen=True)
class CheckReport:
    suite: str
    tested: int
    skipped: int
    failures: tuple[CheckFailure, ...]

    @property
    def passed(self) -> bool:
        return not self.failures


def applicable_bound(config: SwitchConfig, policy_name: str) -> Fraction | None:
    """Worst-case cap on OPT/policy, or None when no guarantee is claimed.

    Guarantees exist for greedy only; baselines run unbounded.
    """
    if policy_name != "greedy":
        return None
    report = compute_bounds(config)
    return report.restricted_bound if config.restricted else report.general_bound


def competitive_ratio(config: SwitchConfig, trace: Trace, policy,
                      max_states: int = oracle.DEFAULT_MAX_STATES,
                      instance_id: str = "adhoc") -> RatioRecord:
    """Simulate one policy, solve the same trace exactly, compare.

    The ratio of two zero benefits is defined as 1 (nothing was ever
    transmittable, so the policy forfeited nothing).
    """
    sim = simulate(config, trace, policy)
    opt = oracle.optimal_benefit(config, trace, max_states=max_states)
    if opt.optimal_benefit == 0:
        ratio = Fraction(1)
    else:
        if sim.benefit == 0:
            # Unreachable for engine-driven runs: acceptance is forced, so
            # the first buffered packet is shared by every schedule.
            raise SegbufError(
                f"policy {policy.name!r} earned 0 while the optimum is {opt.optimal_benefit}"
            )
        ratio = Fraction(opt.optimal_benefit, sim.benefit)
    bound = applicable_bound(config, policy.name)
    satisfied = True if bound is None else ratio <= bound
    slack = None if bound is None else bound - ratio
    return RatioRecord(
        instance_id=instance_id,
        policy=policy.name,
        alg_benefit=sim.benefit,
        opt_benefit=opt.optimal_benefit,
        ratio=ratio,
        applicable_bound=bound,
        bound_satisfied=satisfied,
        slack=slack,
        states_explored=opt.state_count,
    )


def tight_two_valued_instance(values: tuple[int, int] = (1, 2)) -> tuple[SwitchConfig, Trace]:
    """The equality case for the two-valued restricted guarantee.

    Unit capacities; both values arrive, greedy spends its first send on
    the expensive packet and must refuse the second cheap one, while the
    optimum clears the cheap queue first and accepts everything.  The
    ratio is exactly (a+2)/(a+1) for value spread a.
    """
    config = restricted_config(values, 1)
    events = (
        arrival(0), arrival(1), SEND_EVENT,
        arrival(0), SEND_EVENT,
        SEND_EVENT,
        SEND_EVENT,
    )
    return config, Trace(events)


# --- seeded instance generators shared by suites and tests ---------------


def random_values(rng: random.Random, m: int, max_gap: int = 5) -> tuple[int, ...]:
    vals = [rng.randint(1, 4)]
    for _ in range(m - 1):
        vals.append(vals[-1] + rng.randint(1, max_gap))
    return tuple(vals)


def random_restricted_config(rng: random.Random, min_m: int = 1, max_m: int = 5,
                             max_capacity: int = 3) -> SwitchConfig:
    m = rng.randint(min_m, max_m)
    return restricted_config(random_values(rng, m), rng.randint(1, max_capacity))


def random_general_config(rng: random.Random, max_m: int = 4, max_queues: int = 6,
                          max_capacity: int = 3) -> SwitchConfig:
    m = rng.randint(1, max_m)
    values = random_values(rng, m)
    n = rng.randint(1, max_queues)
    queues = tuple(
        QueueSpec(rng.randrange(m), rng.randint(1, max_capacity)) for _ in range(n)
    )
    return SwitchConfig(values, queues)


def random_two_valued_config(rng: random.Random, max_capacity: int = 3) -> SwitchConfig:
    low = rng.randint(1, 5)
    high = low + rng.randint(1, 15)
    return restricted_config((low, high), rng.randint(1, max_capacity))


def random_trace(rng: random.Random, config: SwitchConfig, max_steps: int = 30,
                 max_arrivals: int = 4) -> Trace:
    return gen_random(
        config,
        steps=rng.randint(1, max_steps),
        arrivals_per_step_max=rng.randint(1, max_arrivals),
        seed=rng.randrange(2**63),
    )


# --- check suites ---------------------------------------------------------


def _witness(config: SwitchConfig, trace: Trace, **extra) -> dict:
    doc = {"config": serialize_config(config), "trace": serialize_trace(trace)}
    doc.update(extra)
    return doc


def _suite_upper_bounds(trials, rng, params, max_states):
    force_bound = params.get("force_bound")
    if force_bound is not None:
        force_bound = Fraction(force_bound)
    instances = [("fixture:tight-1-2", *tight_two_valued_instance((1, 2)))]
    for values in ((1, 2), (1, 2, 4), (1, 3, 9, 27)):
        t = build_lower_bound_instance(values, policies.greedy())
        tag = "fixture:adversarial-" + "-".join(map(str, values))
        instances.append((tag, t.config, t.trace))
    for i in range(trials):
        config = (
            random_restricted_config(rng) if rng.random() < 0.5 else random_general_config(rng)
        )
        instances.append((f"trial:{i}", config, random_trace(rng, config)))
    tested = skipped = 0
    failures = []
    for instance_id, config, trace in instances:
        try:
            record = competitive_ratio(
                config, trace, policies.greedy(), max_states=max_states, instance_id=instance_id
            )
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        bound = record.applicable_bound if force_bound is None else force_bound
        assert bound is not None
        if record.ratio > bound:
            failures.append(CheckFailure(
                instance_id,
                f"greedy ratio {record.ratio} exceeds bound {bound}",
                _witness(config, trace, ratio=str(record.ratio), bound=str(bound),
                         alg_benefit=record.alg_benefit, opt_benefit=record.opt_benefit),
            ))
    return tested, skipped, failures


def _suite_lower_bound(trials, rng, params, max_states):
    value_sets = [(1, 2), (1, 3), (1, 2, 4), (1, 3, 9, 27)]
    for _ in range(trials):
        value_sets.append(random_values(rng, rng.randint(1, 6)))
    factories = (policies.greedy, policies.round_robin, policies.lowest_value_first)
    tested = skipped = 0
    failures = []
    for values in value_sets:
        for factory in factories:
            t = build_lower_bound_instance(values, factory())
            instance_id = f"values:{'-'.join(map(str, values))}/policy:{factory().name}"
            tested += 1
            problems = []
            floor = 2 - Fraction(max(values), sum(values))
            if t.ratio < floor:
                problems.append(f"ratio {t.ratio} below floor {floor}")
            alg_run = replay(t.config, t.trace, t.alg_schedule)
            if alg_run.accepted_per_value != (1,) * len(values):
                problems.append(
                    f"policy accepted {alg_run.accepted_per_value}, expected one of each value"
                )
            try:
                opt = oracle.optimal_benefit(t.config, t.trace, max_states=max_states)
                if opt.optimal_benefit < t.adv_benefit:
                    problems.append(
                        f"oracle {opt.optimal_benefit} below reference schedule {t.adv_benefit}"
                    )
            except oracle.OracleLimitError:
                skipped += 1
                tested -= 1
                continue
            if problems:
                failures.append(CheckFailure(
                    instance_id, "; ".join(problems),
                    _witness(t.config, t.trace, observed_sends=list(t.observed_sends),
                             alg_benefit=t.alg_benefit, adv_benefit=t.adv_benefit),
                ))
    return tested, skipped, failures


def _suite_lemma_vm(trials, rng, params, max_states):
    tested = skipped = 0
    failures = []
    for i in range(trials):
        config = random_restricted_config(rng)
        trace = random_trace(rng, config)
        top = config.num_values - 1
        greedy_run = simulate(config, trace, policies.greedy())
        try:
            best = oracle.max_count_for_value(config, trace, top, max_states=max_states)
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        if best != greedy_run.sent_per_value[top]:
            failures.append(CheckFailure(
                f"trial:{i}",
                f"max top-value count {best} != greedy's {greedy_run.sent_per_value[top]}",
                _witness(config, trace, max_count=best,
                         greedy_count=greedy_run.sent_per_value[top]),
            ))
    return tested, skipped, failures


def _diligent_runs(config, trace, rng, max_states):
    """Assorted work-conserving schedules to pit against greedy."""
    opt = oracle.optimal_benefit(config, trace, max_states=max_states)
    runs = [("optimal", replay(config, trace, opt.schedule))]
    for factory in (policies.round_robin, policies.lowest_value_first):
        pol = factory()
        runs.append((pol.name, simulate(config, trace, pol)))
    pol = policies.seeded_random(rng.randrange(2**63))
    runs.append((pol.name, simulate(config, trace, pol)))
    return runs


def _suite_lemma_central(trials, rng, params, max_states):
    tested = skipped = 0
    failures = []
    for i in range(trials):
        config = random_restricted_config(rng, min_m=2)
        trace = random_trace(rng, config)
        m = config.num_values
        vals = config.values
        greedy_acc = simulate(config, trace, policies.greedy()).accepted_per_value
        try:
            runs = _diligent_runs(config, trace, rng, max_states)
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        for name, run in runs:
            acc = run.accepted_per_value
            problems = []
            for i0 in range(m - 1):
                lhs = sum(acc[j] - greedy_acc[j] for j in range(i0, m - 1))
                rhs = sum(greedy_acc[j] for j in range(i0 + 1, m))
                if lhs > rhs:
                    problems.append(f"tail sums from index {i0}: {lhs} > {rhs}")
            wl = sum(vals[j] * (acc[j] - greedy_acc[j]) for j in range(m - 1))
            wr = sum(vals[j] * greedy_acc[j + 1] for j in range(m - 1))
            if wl > wr:
                problems.append(f"weighted form: {wl} > {wr}")
            if problems:
                failures.append(CheckFailure(
                    f"trial:{i}/schedule:{name}", "; ".join(problems),
                    _witness(config, trace, schedule=name, accepted=list(acc),
                             greedy_accepted=list(greedy_acc)),
                ))
    return tested, skipped, failures


def _suite_lemma_queuesize(trials, rng, params, max_states):
    tested = skipped = 0
    failures = []
    for i in range(trials):
        config = random_two_valued_config(rng)
        trace = random_trace(rng, config)
        cap = config.queues[0].capacity
        greedy_line = simulate(config, trace, policies.greedy()).occupancy_timeline
        try:
            runs = _diligent_runs(config, trace, rng, max_states)
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        for name, run in runs:
            line = run.occupancy_timeline
            for t, (theirs, ours) in enumerate(zip(line, greedy_line)):
                if theirs > ours + cap:
                    failures.append(CheckFailure(
                        f"trial:{i}/schedule:{name}",
                        f"occupancy {theirs} exceeds greedy's {ours} + capacity {cap} "
                        f"after event {t}",
                        _witness(config, trace, schedule=name, event=t),
                    ))
                    break
    return tested, skipped, failures


def _suite_lemma_two_valued(trials, rng, params, max_states):
    tested = skipped = 0
    failures = []
    for i in range(trials):
        config = random_two_valued_config(rng)
        trace = random_trace(rng, config)
        greedy_acc = simulate(config, trace, policies.greedy()).accepted_per_value
        try:
            opt = oracle.optimal_benefit(config, trace, max_states=max_states)
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        extra = opt.accepted_per_value[0] - greedy_acc[0]
        if extra > greedy_acc[0]:
            failures.append(CheckFailure(
                f"trial:{i}",
                f"optimum accepts {extra} extra cheap packets, above greedy's own {greedy_acc[0]}",
                _witness(config, trace, optimal_accepted=list(opt.accepted_per_value),
                         greedy_accepted=list(greedy_acc)),
            ))
    return tested, skipped, failures


def _suite_oracle_cross(trials, rng, params, max_states):
    tested = skipped = 0
    failures = []
    for i in range(trials):
        if rng.random() < 0.5:
            config = random_restricted_config(rng, max_m=3, max_capacity=2)
        else:
            config = random_general_config(rng, max_m=3, max_queues=3, max_capacity=2)
        trace = random_trace(rng, config, max_steps=4, max_arrivals=2)
        try:
            opt = oracle.optimal_benefit(config, trace, max_states=max_states)
            brute = oracle.brute_force_benefit(config, trace)
        except oracle.OracleLimitError:
            skipped += 1
            continue
        tested += 1
        problems = []
        if opt.optimal_benefit != brute:
            problems.append(f"DP {opt.optimal_benefit} != brute force {brute}")
        longer = Trace(trace.events + (SEND_EVENT,))
        if oracle.optimal_benefit(config, longer, max_states=max_states).optimal_benefit < opt.optimal_benefit:
            problems.append("extra send event decreased the optimum")
        q = rng.randrange(config.num_queues)
        fatter = drain_extend(config, Trace(trace.events + (arrival(q),)))
        if oracle.optimal_benefit(config, fatter, max_states=max_states).optimal_benefit < opt.optimal_benefit:
            problems.append("extra arrival decreased the optimum")
        if problems:
            failures.append(CheckFailure(
                f"trial:{i}", "; ".join(problems), _witness(config, trace),
            ))
    return tested, skipped, failures


_SUITE_IMPL = {
    "upper-bounds": _suite_upper_bounds,
    "lower-bound": _suite_lower_bound,
    "lemma-vm": _suite_lemma_vm,
    "lemma-central": _suite_lemma_central,
    "lemma-queuesize": _suite_lemma_queuesize,
    "lemma-two-valued": _suite_lemma_two_valued,
    "oracle-cross": _suite_oracle_cross,
}


def run_suite(suite: str, params: Mapping | None = None, seed: int = 0) -> CheckReport:
    """Run one named check suite over seeded instances.

    params holds the trial count ("trials", default 1000), the oracle
    cap ("max_states"), and suite-specific testing hooks.  Instances the
    oracle refuses are counted as skipped, never silently dropped.
    """
    if suite not in _SUITE_IMPL:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    p = dict(params or {})
    trials = int(p.get("trials", 1000))
    max_states = int(p.get("max_states", oracle.DEFAULT_MAX_STATES))
    rng = random.Random(seed)
    tested, skipped, failures = _SUITE_IMPL[suite](trials, rng, p, max_states)
    return CheckReport(suite, tested, skipped, tuple(failures))


# --- CSV sweeps -----------------------------------------------------------

CSV_HEADER = (
    "spec_id,seed,policy,alg_benefit,opt_benefit,ratio_num,ratio_den,ratio_dec,"
    "bound_num,bound_den,satisfied,slack_num,slack_den,states_explored,runtime_ms"
)

_SWEEP_POLICY_NAMES = ("greedy", "round-robin", "lowest-first")


@dataclass(frozen=True)
class SweepCell:
    cell_id: str
    config: SwitchConfig
    generator: Mapping[str, int]
    policy_names: tuple[str, ...]
    trials: int
    seed: int
    fixtures: tuple[str, ...] = ()


@dataclass(frozen=True)
class SweepSpec:
    cells: tuple[SweepCell, ...]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SweepSpecError(message)


def parse_sweep_spec(text: str) -> SweepSpec:
    """Parse the sweep JSON document.

    Shape:
        {"cells": [{"id": "powers-of-2", "values": [1,2,4], "capacity": 2,
                    "generator": {"kind": "random", "steps": 20,
                                  "max_arrivals_per_step": 3},
                    "policies": ["greedy"], "trials": 10, "seed": 1,
                    "fixtures": ["tight"]}]}

    "queues" (explicit [{"value_index":..,"capacity":..}]) may replace
    "capacity" for non-restricted shapes.  Trial i uses seed+i.
    """
    import json

    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SweepSpecError(f"invalid JSON: {exc}") from None
    _require(isinstance(doc, dict) and "cells" in doc, "top level must be {'cells': [...]}")
    _require(isinstance(doc["cells"], list) and doc["cells"], "'cells' must be a non-empty list")
    cells = []
    for idx, cell in enumerate(doc["cells"]):
        where = f"cells[{idx}]"
        _require(isinstance(cell, dict), f"{where} must be an object")
        _require("id" in cell and isinstance(cell["id"], str), f"{where}.id must be a string")
        _require("values" in cell, f"{where} missing 'values'")
        if "queues" in cell:
            _require("capacity" not in cell, f"{where}: give 'capacity' or 'queues', not both")
            queues = tuple(
                QueueSpec(q.get("value_index", -1), q.get("capacity", 0))
                for q in cell["queues"]
            )
            config = SwitchConfig(tuple(cell["values"]), queues)
        else:
            _require("capacity" in cell, f"{where} missing 'capacity' (or explicit 'queues')")
            config = restricted_config(tuple(cell["values"]), cell["capacity"])
        gen = cell.get("generator", {})
        _require(isinstance(gen, dict), f"{where}.generator must be an object")
        kind = gen.get("kind", "random")
        if kind == "random":
            allowed = {"kind", "steps", "max_arrivals_per_step"}
        elif kind == "bursty":
            allowed = {"kind", "steps", "burst_len", "burst_size"}
        else:
            raise SweepSpecError(f"{where}.generator.kind must be 'random' or 'bursty'")
        _require(set(gen) <= allowed, f"{where}.generator has unknown fields {sorted(set(gen) - allowed)}")
        names = tuple(cell.get("policies", ["greedy"]))
        for name in names:
            _require(
                name in _SWEEP_POLICY_NAMES or name.startswith("random:"),
                f"{where}.policies: unknown policy {name!r}",
            )
        fixtures = tuple(cell.get("fixtures", ()))
        for f in fixtures:
            _require(f == "tight", f"{where}.fixtures: unknown fixture {f!r}")
            _require(config.num_values == 2, f"{where}: the 'tight' fixture needs exactly two values")
        trials = cell.get("trials", 0)
        _require(isinstance(trials, int) and trials >= 0, f"{where}.trials must be a non-negative integer")
        seed = cell.get("seed", 0)
        _require(isinstance(seed, int), f"{where}.seed must be an integer")
        _require(trials > 0 or fixtures, f"{where} produces no instances")
        cells.append(SweepCell(cell["id"], config, dict(gen), names, trials, seed, fixtures))
    return SweepSpec(tuple(cells))


def _dec6(fr: Fraction) -> str:
    scaled = round(fr * 10**6)
    sign = "-" if scaled < 0 else ""
    scaled = abs(scaled)
    return f"{sign}{scaled // 10**6}.{scaled % 10**6:06d}"


def _cell_trace(cell: SweepCell, seed: int) -> Trace:
    gen = cell.generator
    if gen.get("kind", "random") == "bursty":
        return gen_bursty(
            cell.config,
            steps=gen.get("steps", 20),
            burst_len=gen.get("burst_len", 2),
            burst_size=gen.get("burst_size", 3),
            seed=seed,
        )
    return gen_random(
        cell.config,
        steps=gen.get("steps", 20),
        arrivals_per_step_max=gen.get("max_arrivals_per_step", 3),
        seed=seed,
    )


def sweep(spec: SweepSpec, max_states: int = oracle.DEFAULT_MAX_STATES,
          timing: bool = False) -> str:
    """Run every cell and render the CSV report.

    Output is byte-identical across runs of the same spec: runtime_ms is
    0 unless timing is requested, which is the one deliberately
    non-reproducible column.  Row order: cells in spec order; per cell,
    fixtures then trial seeds ascending; one summary row per cell and
    policy carrying the maximum observed ratio.
    """
    lines = [CSV_HEADER]
    for cell in spec.cells:
        instances: list[tuple[str, SwitchConfig, Trace]] = []
        for fixture in cell.fixtures:
            cfg, trace = tight_two_valued_instance(cell.config.values)  # type: ignore[arg-type]
            instances.append((f"fixture:{fixture}", cfg, trace))
        for i in range(cell.trials):
            seed = cell.seed + i
            instances.append((str(seed), cell.config, _cell_trace(cell, seed)))
        for policy_name in cell.policy_names:
            records = []
            for seed_label, cfg, trace in instances:
                started = time.perf_counter()
                record = competitive_ratio(
                    cfg, trace, policies.make_policy(policy_name),
                    max_states=max_states, instance_id=cell.cell_id,
                )
                elapsed_ms = int((time.perf_counter() - started) * 1000) if timing else 0
                records.append(record)
                bound_num = str(record.applicable_bound.numerator) if record.applicable_bound is not None else ""
                bound_den = str(record.applicable_bound.denominator) if record.applicable_bound is not None else ""
                slack_num = str(record.slack.numerator) if record.slack is not None else ""
                slack_den = str(record.slack.denominator) if record.slack is not None else ""
                lines.append(",".join((
                    cell.cell_id, seed_label, policy_name,
                    str(record.alg_benefit), str(record.opt_benefit),
                    str(record.ratio.numerator), str(record.ratio.denominator),
                    _dec6(record.ratio),
                    bound_num, bound_den,
                    "true" if record.bound_satisfied else "false",
                    slack_num, slack_den,
                    str(record.states_explored), str(elapsed_ms),
                )))
            worst = max(records, key=lambda rec: rec.ratio)
            bound = worst.applicable_bound
            slacks = [rec.slack for rec in records if rec.slack is not None]
            min_slack = min(slacks) if slacks else None
            lines.append(",".join((
                cell.cell_id, "summary", policy_name,
                "", "",
                str(worst.ratio.numerator), str(worst.ratio.denominator), _dec6(worst.ratio),
                str(bound.numerator) if bound is not None else "",
                str(bound.denominator) if bound is not None else "",
                "true" if all(rec.bound_satisfied for rec in records) else "false",
                str(min_slack.numerator) if min_slack is not None else "",
                str(min_slack.denominator) if min_slack is not None else "",
                "", "",
            )))
    return "\n".join(lines) + "\n"
