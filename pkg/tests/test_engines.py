"""Compiled kernels against the pure loops: identical streams, and speed."""

import time

import pytest

from fragsim import rng as pyrng
from fragsim.compartments import InflowDistribution, UniformPairKernel
from fragsim.models import birth_death_model
from fragsim.simulate import (
    HAVE_COMPILED,
    StopCondition,
    run_one_enzyme_chain,
    run_trajectory,
)

needs_compiled = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled kernels not built"
)


@needs_compiled
def test_raw_rng_streams_match():
    from fragsim import _kernels

    for seed in (0, 1, 2**63 + 11, 2**64 - 1):
        r = pyrng.Rng(seed)
        assert [r.next_u64() for _ in range(64)] == _kernels.rng_stream(seed, 64)


@needs_compiled
@pytest.mark.parametrize("n,p", [(1, 0.5), (13, 0.25), (400, 0.8), (10, 0.999)])
def test_binomial_streams_match(n, p):
    from fragsim import _kernels

    r = pyrng.Rng(99)
    assert [r.binomial(n, p) for _ in range(200)] == _kernels.binomial_stream(
        99, n, p, 200
    )


def _models():
    yield birth_death_model(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    yield birth_death_model(1.0, 1.0, 1.0, 1.0, 1.9, 0.0)
    yield birth_death_model(
        0.0, 0.0, 0.5, 0.5, 0.05, 0.05,
        inflow=InflowDistribution.poisson_product((2.0,)),
        kernel=UniformPairKernel(),
    )
    yield birth_death_model(
        2.0, 0.3, 1.0, 0.2, 0.7, 0.1,
        inflow=InflowDistribution.categorical([((0,), 0.2), ((3,), 0.8)]),
    )


@needs_compiled
@pytest.mark.parametrize("seed", [0, 1, 42, 987654321])
def test_population_engines_identical(seed):
    stop = StopCondition(t_max=40.0, event_budget=30_000)
    grid = [0.5, 1.0, 7.5, 20.0, 39.0]
    for model in _models():
        initial = {(0,): 2, (3,): 1}
        a = run_trajectory(model, initial, stop, seed, grid=grid, engine="pure")
        b = run_trajectory(model, initial, stop, seed, grid=grid, engine="compiled")
        assert a.engine == "pure" and b.engine == "compiled"
        assert a.final_state == b.final_state
        assert a.final_time == b.final_time  # bit-identical
        assert a.event_count == b.event_count
        assert a.stop_reason == b.stop_reason
        assert a.grid == b.grid
        assert a.empty_entry_times == b.empty_entry_times
        assert a.event_kind_counts == b.event_kind_counts
        assert a.first_window_mean == b.first_window_mean
        assert a.last_window_mean == b.last_window_mean
        assert a.suspected_explosion == b.suspected_explosion


@needs_compiled
@pytest.mark.parametrize("alpha,p,x0", [(1.0, 0.6, 100), (1.0, 0.2, 100), (0.5, 0.4, 0)])
def test_chain_engines_identical(alpha, p, x0):
    stop = StopCondition(t_max=2.0, event_budget=40_000)
    for seed in (0, 7, 12345):
        a = run_one_enzyme_chain(alpha, p, x0, stop, seed, threshold=10, engine="pure")
        b = run_one_enzyme_chain(alpha, p, x0, stop, seed, threshold=10, engine="compiled")
        assert a.final_state == b.final_state
        assert a.final_time == b.final_time
        assert a.event_count == b.event_count
        assert a.returns_below == b.returns_below
        assert a.peak_value == b.peak_value
        assert a.stop_reason == b.stop_reason


@needs_compiled
def test_compiled_selected_automatically():
    model = birth_death_model(1, 1, 1, 1, 1, 1)
    r = run_trajectory(model, {}, StopCondition(t_max=1.0), 0, engine="auto")
    assert r.engine == "compiled"
    # python-only stop conditions force the pure engine
    r = run_trajectory(
        model,
        {},
        StopCondition(t_max=1.0, absorbing_predicate=lambda n: False),
        0,
        engine="auto",
    )
    assert r.engine == "pure"


@needs_compiled
def test_throughput_floor():
    # aggregated per-content bookkeeping must sustain 1e5 events/sec at
    # compartment counts up to 1e3
    model = birth_death_model(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)
    stop = StopCondition(t_max=1e12, event_budget=300_000)
    t0 = time.perf_counter()
    r = run_trajectory(model, {(0,): 1000}, stop, 0, engine="compiled")
    elapsed = time.perf_counter() - t0
    assert r.event_count == 300_000
    assert r.event_count / elapsed >= 1e5


def test_pure_engine_available_for_any_model():
    model = birth_death_model(1, 1, 1, 1, 1, 1)
    r = run_trajectory(model, {}, StopCondition(t_max=0.5), 3, engine="pure")
    assert r.engine == "pure"
