"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run with `pytest tests/test_acceptance.py -v -s`. Every tolerance,
threshold and runtime budget is pinned here. The explosivity probe's slow
side runs on a 2e6-event budget: under smaller budgets the return counts
are dominated by single heavy-tailed excursions and do not stabilize
across seeds.
"""

import json
import math
import time

from scipy import stats

from fragsim.compartments import (
    InflowDistribution,
    UniformPairKernel,
    apply_population_generator,
    kernel_pmf,
)
from fragsim.crn import apply_crn_generator
from fragsim.lyapunov import (
    PowerFunction,
    ReciprocalLog,
    TransienceWitness,
    WeightedPopulationFunction,
    check_population_drift,
    choose_lambda,
    classify_regime,
    closed_form_drift,
    drift_threshold,
    enumerate_population_states,
    recurrence_region,
    sample_population_states,
    scan_one_enzyme_drift,
    transience_threshold,
)
from fragsim.models import birth_death_model, birth_death_network
from fragsim.presets import run_explosivity_probe, run_threshold_scan
from fragsim.rng import Rng, substream_seed
from fragsim.simulate import StopCondition, run_trajectory
from fragsim.compartments import BinomialHalfKernel, EnzymeCarrierKernel


def _report(n, label, ok, elapsed, budget):
    status = "PASS" if ok else "FAIL"
    print(f"acceptance {n}: {label}: {status} ({elapsed:.1f}s / budget {budget}s)")
    assert ok, f"criterion {n} failed"
    assert elapsed < budget, f"criterion {n} exceeded its runtime budget"


def test_criterion_1_closed_form_drift_equivalence():
    t0 = time.perf_counter()
    models = [
        birth_death_model(1, 1, 1, 1, 1, 1),
        birth_death_model(0.8, 1.3, 0.6, 0.4, 1.9, 0.2, kernel=UniformPairKernel()),
        birth_death_model(
            2.0, 0.0, 1.0, 1.0, 0.5, 0.0,
            inflow=InflowDistribution.categorical([((0,), 0.5), ((3,), 0.5)]),
        ),
        birth_death_model(
            0.0, 0.0, 0.5, 0.5, 0.05, 0.05,
            inflow=InflowDistribution.poisson_product((2.0,), tail_bound=1e-12),
            kernel=UniformPairKernel(),
        ),
    ]
    states = sample_population_states(1, 199, 8, 2, seed=1001)
    states.append({})
    rng = Rng(77)
    ok = True
    for i, n in enumerate(states):
        model = models[i % len(models)]
        alpha = 0.5 + 3.5 * rng.random()
        V = WeightedPopulationFunction(alpha, (1.0,))
        bound = 1.0 + alpha * 60.0 if model.inflow.tail_mass > 0 else None
        drift, trunc = apply_population_generator(model, V, n, v_increment_bound=bound)
        expected = closed_form_drift(model, alpha, n)
        if abs(drift - expected) > 1e-9 + trunc:
            ok = False
    _report(1, "closed-form drift equivalence on 200 states", ok, time.perf_counter() - t0, 10)


def test_criterion_2_linear_drift_identity():
    t0 = time.perf_counter()
    rng = Rng(2002)
    ok = True
    for _ in range(10):
        kb = 3.0 * rng.random()
        kd = 3.0 * rng.random()
        net = birth_death_network(kb, kd)
        f = lambda v: v[0]
        for x in range(10_001):
            got = apply_crn_generator(net, f, (x,))
            expected = kb - kd * x
            if abs(got - expected) > 1e-12 * max(1.0, abs(expected)):
                ok = False
                break
        if not ok:
            break
    _report(2, "identity-function drift equals birth minus decay", ok, time.perf_counter() - t0, 1)


def test_criterion_3_chain_drift_signs():
    t0 = time.perf_counter()
    drifts_log = scan_one_enzyme_drift(1.0, 0.5, ReciprocalLog(), 100_000)
    x_log = drift_threshold(drifts_log)
    ok = x_log is not None and x_log <= 10_000 and bool((drifts_log[x_log:] <= -1.0).all())

    lam = choose_lambda(1.0, 0.2)
    drifts_pow = scan_one_enzyme_drift(1.0, 0.2, PowerFunction(lam), 100_000)
    x_pow = drift_threshold(drifts_pow)
    ok = ok and x_pow is not None and x_pow <= 10_000
    ok = ok and bool((drifts_pow[x_pow:] <= -1.0).all())
    print(f"  thresholds: bounded-decreasing x*={x_log}, power(lam={lam}) x*={x_pow}")
    _report(3, "chain drift <= -1 beyond scanned thresholds", ok, time.perf_counter() - t0, 30)


def test_criterion_4_fragmentation_threshold_experiment():
    t0 = time.perf_counter()
    result = run_threshold_scan(0, count=100)
    out = result["outcome"]
    print(
        f"  empty-return fraction at 1.9: {out['empty_return_fraction_low']:.2f}, "
        f"median-mass ratio 2.1/1.9: {out['median_mass_ratio']:.1f}, "
        f"2.0 reported only"
    )
    _report(4, "threshold experiment regimes", out["passed"], time.perf_counter() - t0, 300)


def test_criterion_5_explosivity_probe():
    t0 = time.perf_counter()
    result = run_explosivity_probe(0, count=50)
    out = result["outcome"]
    print(
        f"  fast-side budget-exhaustion fraction: {out['budget_exhausted_fraction_fast']:.2f}, "
        f"slow-side return fraction: {out['returns_fraction_slow']:.2f}"
    )
    _report(5, "explosivity probe directions", out["passed"], time.perf_counter() - t0, 120)


def test_criterion_6_ssa_statistical_correctness():
    t0 = time.perf_counter()
    model = birth_death_model(1, 1, 1, 1, 1, 1)
    stop = StopCondition(event_budget=1)
    rates = {
        "inflow": 1.0,
        "internal:0": 3.0,
        "internal:1": 6.0,
        "exit": 3.0,
        "fragmentation": 6.0,
        "coagulation": 3.0,
    }
    total_rate = sum(rates.values())
    draws = 100_000
    counts = dict.fromkeys(rates, 0)
    hold = 0.0
    for i in range(draws):
        r = run_trajectory(model, {(2,): 3}, stop, substream_seed(606, i))
        (kind,) = r.event_kind_counts
        counts[kind] += 1
        hold += r.final_time
    observed = [counts[k] for k in rates]
    expected = [draws * v / total_rate for v in rates.values()]
    chi = stats.chisquare(observed, expected)
    mean_hold = hold / draws
    ok = chi.pvalue > 0.001 and abs(mean_hold - 1 / total_rate) <= 0.02 / total_rate
    print(
        f"  first-event chi-square p={chi.pvalue:.3f}, "
        f"mean holding time {mean_hold:.6f} vs {1 / total_rate:.6f}"
    )
    _report(6, "first-event law and holding-time mean", ok, time.perf_counter() - t0, 60)


def test_criterion_7_kernel_suite():
    t0 = time.perf_counter()
    ok = True
    one_d = [BinomialHalfKernel(), UniformPairKernel()]
    for kernel in one_d:
        for m in range(13):
            pmf = kernel_pmf(kernel, (m,))
            ok = ok and abs(math.fsum(p for _, p in pmf) - 1.0) <= 1e-12
            ok = ok and all(0 <= y[0] <= m for y, _ in pmf)
    two_d = [BinomialHalfKernel(), UniformPairKernel(), EnzymeCarrierKernel(0.3)]
    for kernel in two_d:
        for a in range(13):
            for b in range(13 - a):
                pmf = kernel_pmf(kernel, (a, b))
                ok = ok and abs(math.fsum(p for _, p in pmf) - 1.0) <= 1e-12
                ok = ok and all(
                    0 <= y[0] <= a and 0 <= y[1] <= b for y, _ in pmf
                )
    p = 0.3
    kernel = EnzymeCarrierKernel(p)
    for e in range(2, 7):
        for s in range(21):
            together = math.fsum(
                pr for y, pr in kernel_pmf(kernel, (e, s)) if y[0] in (0, e)
            )
            ok = ok and abs(together - 2.0 ** (1 - e)) <= 1e-12
    for s in range(21):
        pmf = dict(kernel_pmf(kernel, (1, s)))
        for t in range(s + 1):
            expected = math.comb(s, t) * p**t * (1 - p) ** (s - t)
            got = pmf.get((1, t), 0.0) + pmf.get((0, s - t), 0.0)
            ok = ok and abs(got - expected) <= 1e-12
    _report(7, "kernel normalization, support and carrier properties", ok, time.perf_counter() - t0, 30)


def _random_recurrent_model(rng, target):
    u = rng.random
    if target == "a":
        return birth_death_model(
            2.0 * u(), 2.0 * u(), 0.5 + u(), 0.2 + u(), 2.0 * u(), 0.2 + u()
        )
    if target == "b":
        ke = 0.3 + u()
        kd = 2.0 * u()
        kb = 0.1 + u()
        strength = ke * ke + ke * kd
        kf = (0.1 + 0.75 * u()) * strength / kb
        return birth_death_model(kb, kd, 0.5 + u(), ke, kf, 0.0)
    ke = 0.0
    kd = 0.2 + u()
    return birth_death_model(2.0 * u(), kd, 2.0 * u(), ke, 2.0 * u(), 0.2 + u())


def _random_transient_model(rng):
    u = rng.random
    kb = 0.3 + u()
    ke = u()  # may be zero-ish; condition still satisfiable
    kd = u()
    kf = ke + ((ke + kd) * ke / kb) * (1.2 + u()) + 0.1 + u()
    return birth_death_model(kb, kd, 0.5 + u(), ke, kf, 0.0)


def test_criterion_8_classifier_drift_consistency():
    t0 = time.perf_counter()
    rng = Rng(808)
    states = list(enumerate_population_states(1, 8, 16))
    ok = True
    seen = {"a": 0, "b": 0, "c": 0}
    for i in range(50):
        target = ("a", "b", "c")[i % 3]
        model = _random_recurrent_model(rng, target)
        cls = classify_regime(model)
        if cls.kind != "positive_recurrent" or cls.condition != target:
            ok = False
            continue
        seen[target] += 1
        V = WeightedPopulationFunction(cls.alpha, (1.0,))
        report = check_population_drift(
            model,
            V,
            bound="le_minus_one_outside",
            states=states,
            region=recurrence_region(model, cls.alpha),
        )
        ok = ok and report.passed
    small = list(enumerate_population_states(1, 8, 12))
    for i in range(20):
        model = _random_transient_model(rng)
        cls = classify_regime(model)
        if cls.kind != "transient":
            ok = False
            continue
        V = TransienceWitness(cls.alpha)
        k_eps = transience_threshold(model, V, small)
        scan_states = small + sample_population_states(1, 100, 25, 8, seed=9000 + i)
        report = check_population_drift(
            model,
            V,
            bound="ge_zero_outside",
            states=scan_states,
            region=lambda n: V.weight(n) < k_eps,
        )
        ok = ok and report.passed and report.n_states > 50
    print(f"  recurrent vectors per condition: {seen}")
    _report(8, "certificates pass their drift scans", ok, time.perf_counter() - t0, 180)


def test_criterion_9_determinism():
    t0 = time.perf_counter()
    a = run_threshold_scan(0, count=100)
    b = run_threshold_scan(0, count=100)
    ok = json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)
    c = run_explosivity_probe(0, count=50)
    d = run_explosivity_probe(0, count=50)
    ok = ok and json.dumps(c, sort_keys=True) == json.dumps(d, sort_keys=True)
    _report(9, "byte-identical repeated experiment runs", ok, time.perf_counter() - t0, 600)
