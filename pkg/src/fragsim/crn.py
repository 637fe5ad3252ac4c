"""Stochastic reaction networks with combinatorial mass-action kinetics.

A network is a list of species names plus reactions between non-negative
integer combinations of species (complexes). States and complexes are plain
tuples of counts, one entry per species, which keeps them hashable so they
can double as compartment contents elsewhere in the package.

The transition rate of a reaction at state x is its rate constant times the
number of ways to pick the source complex out of x, i.e. a product of
binomial coefficients C(x_j, nu_j) with C(x, 0) = 1 and C(x, y) = 0 for
0 <= x < y. Note this differs from the convention that absorbs the
factorials of the source coefficients into the rate constant; no converter
between the two is provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

Content = tuple[int, ...]

# Exact integer binomials are returned as ints up to this width and as the
# correctly rounded float beyond it; rates are float64 consumers either way.
_EXACT_BITS = 53


def falling_binomial(x: int, y: int) -> int | float:
    """C(x, y) with C(x, 0) = 1 and C(x, y) = 0 whenever 0 <= x < y.

    Exact integer while the value fits 53 bits, correctly rounded float
    above that, and inf past the float64 range.
    """
    if y == 0:
        return 1
    if x < y:
        return 0
    if y == 1:
        return x if x.bit_length() <= _EXACT_BITS else float(x)
    v = math.comb(x, y)
    if v.bit_length() <= _EXACT_BITS:
        return v
    try:
        return float(v)
    except OverflowError:
        return math.inf


@dataclass(frozen=True)
class Reaction:
    """One reaction: source complex -> product complex at a rate constant."""

    source: Content
    product: Content
    rate_constant: float

    def __post_init__(self):
        source = tuple(int(c) for c in self.source)
        product = tuple(int(c) for c in self.product)
        object.__setattr__(self, "source", source)
        object.__setattr__(self, "product", product)
        if len(source) != len(product):
            raise ValueError("source and product must have the same dimension")
        if any(c < 0 for c in source) or any(c < 0 for c in product):
            raise ValueError("complex entries must be non-negative")
        if source == product:
            raise ValueError("reaction must change the state (source != product)")
        if not (self.rate_constant >= 0.0):
            raise ValueError("rate constant must be non-negative")

    @property
    def delta(self) -> Content:
        return tuple(p - s for s, p in zip(self.source, self.product))


@dataclass(frozen=True)
class ReactionNetwork:
    species_names: tuple[str, ...]
    reactions: tuple[Reaction, ...]
    # per-reaction (indices of species consumed, their multiplicities), cached
    _sources_nz: tuple[tuple[tuple[int, int], ...], ...] = field(init=False, repr=False)

    def __post_init__(self):
        names = tuple(self.species_names)
        reactions = tuple(self.reactions)
        object.__setattr__(self, "species_names", names)
        object.__setattr__(self, "reactions", reactions)
        if len(set(names)) != len(names):
            raise ValueError("species names must be unique")
        d = len(names)
        for r in reactions:
            if len(r.source) != d:
                raise ValueError("reaction dimension does not match species count")
        nz = tuple(
            tuple((j, v) for j, v in enumerate(r.source) if v > 0) for r in reactions
        )
        object.__setattr__(self, "_sources_nz", nz)

    @property
    def dimension(self) -> int:
        return len(self.species_names)

    def species_index(self, name: str) -> int:
        return self.species_names.index(name)


def crn_state(counts, d: int | None = None) -> Content:
    """Validate a state vector and return it as a tuple."""
    x = tuple(int(c) for c in counts)
    if any(c < 0 for c in x):
        raise ValueError("state entries must be non-negative")
    if d is not None and len(x) != d:
        raise ValueError(f"state has dimension {len(x)}, expected {d}")
    return x


def mass_action_rate(reaction: Reaction, state: Content) -> float:
    """Rate constant times the number of ways to draw the source from `state`."""
    if len(state) != len(reaction.source):
        raise ValueError("state dimension does not match reaction")
    rate = reaction.rate_constant
    for j, v in enumerate(reaction.source):
        if v:
            rate *= falling_binomial(state[j], v)
            if rate == 0.0:
                return 0.0
    return rate


def _reaction_rate_nz(kappa: float, nz, state) -> float:
    # same arithmetic as mass_action_rate, on the cached non-zero sources
    rate = kappa
    for j, v in nz:
        rate *= falling_binomial(state[j], v)
        if rate == 0.0:
            return 0.0
    return rate


def enabled_transitions(
    network: ReactionNetwork, state: Content
) -> list[tuple[Content, float]]:
    """(delta, rate) for every reaction with strictly positive rate at `state`."""
    out = []
    for r, nz in zip(network.reactions, network._sources_nz):
        rate = _reaction_rate_nz(r.rate_constant, nz, state)
        if rate > 0.0:
            out.append((r.delta, rate))
    return out


def apply_crn_generator(network: ReactionNetwork, f, state: Content) -> float:
    """Expected instantaneous drift of f at `state`: sum of rate * (f(x') - f(x))."""
    fx = f(state)
    total = 0.0
    for r, nz in zip(network.reactions, network._sources_nz):
        rate = _reaction_rate_nz(r.rate_constant, nz, state)
        if rate > 0.0:
            x2 = tuple(c + dc for c, dc in zip(state, r.delta))
            total += rate * (f(x2) - fx)
    return total
