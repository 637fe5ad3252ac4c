"""Throughput comparison of the compiled kernels against the pure loops.

Usage: python benchmarks/bench_engines.py [--events N]
"""

import argparse
import time

from fragsim.models import birth_death_model
from fragsim.simulate import (
    HAVE_COMPILED,
    StopCondition,
    run_one_enzyme_chain,
    run_trajectory,
)


def _time_population(model, initial, events, engine):
    stop = StopCondition(t_max=1e18, event_budget=events)
    t0 = time.perf_counter()
    r = run_trajectory(model, initial, stop, 0, engine=engine)
    return r.event_count / (time.perf_counter() - t0)


def _time_chain(alpha, p, x0, events, engine):
    stop = StopCondition(event_budget=events)
    t0 = time.perf_counter()
    r = run_one_enzyme_chain(alpha, p, x0, stop, 0, threshold=10, engine=engine)
    return r.event_count / (time.perf_counter() - t0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--events", type=int, default=200_000)
    args = parser.parse_args()

    cases = [
        (
            "birth/death model, all constants 1, from 1000 empty compartments",
            lambda ev, eng: _time_population(
                birth_death_model(1, 1, 1, 1, 1, 1), {(0,): 1000}, ev, eng
            ),
        ),
        (
            "birth/death model, fragmentation-dominated (kF=2.1), from empty",
            lambda ev, eng: _time_population(
                birth_death_model(1, 1, 1, 1, 2.1, 0.0), {}, ev, eng
            ),
        ),
        (
            "one-enzyme chain, supercritical (p=0.6)",
            lambda ev, eng: _time_chain(1.0, 0.6, 100, ev, eng),
        ),
        (
            "one-enzyme chain, subcritical (p=0.2)",
            lambda ev, eng: _time_chain(1.0, 0.2, 100, ev, eng),
        ),
    ]

    print(f"events per run: {args.events}")
    print(f"compiled kernels available: {HAVE_COMPILED}")
    header = f"{'case':64s} {'pure ev/s':>12s} {'compiled ev/s':>14s} {'speedup':>8s}"
    print(header)
    print("-" * len(header))
    for label, runner in cases:
        pure = runner(min(args.events, 50_000), "pure")
        if HAVE_COMPILED:
            compiled = runner(args.events, "compiled")
            print(f"{label:64s} {pure:12.0f} {compiled:14.0f} {compiled / pure:7.1f}x")
        else:
            print(f"{label:64s} {pure:12.0f} {'-':>14s} {'-':>8s}")


if __name__ == "__main__":
    main()
