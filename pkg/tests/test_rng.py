"""The random stream is part of the package contract: frozen vectors here
catch any accidental change to the generator or its distribution helpers."""

import statistics

import pytest

from fragsim.rng import Rng, substream_seed

# first outputs for seed 1, frozen at initial release
_SEED1_U64 = [
    12966619160104079557,
    9600361134598540522,
    10590380919521690900,
    7218738570589545383,
    12860671823995680371,
]


def test_frozen_stream_seed1():
    r = Rng(1)
    assert [r.next_u64() for _ in range(5)] == _SEED1_U64


def test_uniform_range_and_mean():
    r = Rng(12345)
    xs = [r.random() for _ in range(20000)]
    assert all(0.0 <= x < 1.0 for x in xs)
    assert abs(statistics.fmean(xs) - 0.5) < 0.01


def test_determinism_and_seed_sensitivity():
    a = [Rng(7).random() for _ in range(10)]
    b = [Rng(7).random() for _ in range(10)]
    c = [Rng(8).random() for _ in range(10)]
    assert a == b
    assert a != c


def test_substream_seeds_distinct():
    seeds = {substream_seed(0, i) for i in range(1000)}
    assert len(seeds) == 1000
    assert substream_seed(0, 0) != substream_seed(1, 0)
    with pytest.raises(ValueError):
        substream_seed(0, -1)


def test_exponential_mean():
    r = Rng(99)
    xs = [r.exponential(4.0) for _ in range(50000)]
    assert abs(statistics.fmean(xs) - 0.25) < 0.005


@pytest.mark.parametrize("n,p", [(10, 0.5), (40, 0.2), (7, 0.9), (100, 0.03)])
def test_binomial_moments(n, p):
    r = Rng(5)
    xs = [r.binomial(n, p) for _ in range(40000)]
    assert all(0 <= x <= n for x in xs)
    mean = statistics.fmean(xs)
    var = statistics.pvariance(xs)
    assert abs(mean - n * p) < 0.05 * max(1.0, n * p)
    assert abs(var - n * p * (1 - p)) < 0.1 * max(1.0, n * p * (1 - p))


def test_binomial_edges():
    r = Rng(3)
    assert r.binomial(0, 0.5) == 0
    assert r.binomial(10, 0.0) == 0
    assert r.binomial(10, 1.0) == 10


def test_uniform_index_bounds():
    r = Rng(11)
    for n in (1, 2, 7, 1000):
        xs = [r.uniform_index(n) for _ in range(2000)]
        assert min(xs) >= 0 and max(xs) < n
        if n > 1:
            assert len(set(xs)) > 1
