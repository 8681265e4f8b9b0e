#!/usr/bin/env python3
"""Empirical tightness of the 1+r guarantee across geometric ladders.

For each ladder v_i = num^(m-i) * den^i scaled to integers, r equals
num/den by construction.  The script hammers each configuration with
seeded random traces and reports the worst observed OPT/GREEDY next to
the guarantee, so you can see how much of the bound random workloads
actually consume (the supremum is approached by adversarial traces,
not random ones).
"""
import argparse
import random
from fractions import Fraction

from segbuf import compute_bounds, greedy, restricted_config
from segbuf.harness import competitive_ratio, random_trace


def geometric_ladder(num: int, den: int, m: int) -> tuple[int, ...]:
    # v_{i+1}/v_i = den/num, all integral
    return tuple(num ** (m - 1 - i) * den ** i for i in range(m))


def run(args):
    rng = random.Random(args.seed)
    print(f"{'values':<28} {'r':>6} {'bound 1+r':>10} {'worst seen':>12} "
          f"{'consumed':>9}")
    for num, den in ((1, 2), (2, 3), (3, 4), (4, 5)):
        for m in (2, 3, 4):
            values = geometric_ladder(num, den, m)
            cfg = restricted_config(values, args.capacity)
            bound = compute_bounds(cfg).restricted_bound
            worst = Fraction(1)
            for _ in range(args.trials):
                trace = random_trace(rng, cfg, max_steps=args.steps, max_arrivals=4)
                rec = competitive_ratio(cfg, trace, greedy())
                assert rec.bound_satisfied, (cfg, trace)
                worst = max(worst, rec.ratio)
            consumed = float((worst - 1) / (bound - 1)) if bound > 1 else 1.0
            print(f"{str(values):<28} {str(Fraction(num, den)):>6} "
                  f"{str(bound):>10} {str(worst):>12} {consumed:>8.0%}")


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=300,
                        help="random traces per configuration")
    parser.add_argument("--steps", type=int, default=25)
    parser.add_argument("--capacity", type=int, default=2)
    parser.add_argument("--seed", type=int, default=0)
    run(parser.parse_args())
