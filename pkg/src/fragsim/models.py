"""Ready-made networks and compartment models used across tests and presets."""

from __future__ import annotations

from .compartments import (
    BinomialHalfKernel,
    CompartmentModel,
    EnzymeCarrierKernel,
    FragmentationKernel,
    InflowDistribution,
)
from .crn import Reaction, ReactionNetwork


def birth_death_network(kb: float, kd: float) -> ReactionNetwork:
    """One species with constant production and per-molecule decay."""
    return ReactionNetwork(
        ("S",),
        (Reaction((0,), (1,), kb), Reaction((1,), (0,), kd)),
    )


def birth_death_model(
    kb: float,
    kd: float,
    kappa_I: float,
    kappa_E: float,
    kappa_F: float,
    kappa_C: float,
    inflow: InflowDistribution | None = None,
    kernel: FragmentationKernel | None = None,
) -> CompartmentModel:
    """The one-species compartment model: birth/death chemistry inside
    compartments, fragmentation at rate kappa_F per molecule."""
    return CompartmentModel(
        chemistry=birth_death_network(kb, kd),
        kappa_I=kappa_I,
        kappa_E=kappa_E,
        kappa_F=kappa_F,
        kappa_C=kappa_C,
        fragmentation_species=0,
        inflow=inflow if inflow is not None else InflowDistribution.point_mass((0,)),
        kernel=kernel if kernel is not None else BinomialHalfKernel(),
    )


def intro_pair_network(alpha: float = 1.0) -> ReactionNetwork:
    """Two species: constant inflow of E, and E + 2S -> E + 3S at rate 2*alpha."""
    return ReactionNetwork(
        ("E", "S"),
        (Reaction((0, 0), (1, 0), 1.0), Reaction((1, 2), (1, 3), 2.0 * alpha)),
    )


def enzyme_growth_network(dup_rate: float = 1.0, cat_rate: float = 1.0) -> ReactionNetwork:
    """E -> 2E plus enzyme-catalysed substrate production E + S -> E + 2S.

    The quadratic cross term makes every linear function grow superlinearly
    under the generator, so only nonlinear functions certify stability."""
    return ReactionNetwork(
        ("E", "S"),
        (Reaction((1, 0), (2, 0), dup_rate), Reaction((1, 1), (1, 2), cat_rate)),
    )


def enzyme_growth_model(
    dup_rate: float = 1.0, cat_rate: float = 1.0, kappa_F: float = 1.0
) -> CompartmentModel:
    """Compartment model over enzyme_growth_network; fragmentation driven by S,
    no inflow, exit or coagulation."""
    return CompartmentModel(
        chemistry=enzyme_growth_network(dup_rate, cat_rate),
        kappa_I=0.0,
        kappa_E=0.0,
        kappa_F=kappa_F,
        kappa_C=0.0,
        fragmentation_species=1,
        inflow=InflowDistribution.point_mass((0, 0)),
        kernel=BinomialHalfKernel(),
    )


def substrate_burst_network(alpha: float) -> ReactionNetwork:
    """0 -> S at rate 1 plus the cubic-feedback reaction E + 2S -> E + 3S at
    rate 2*alpha, whose mass-action rate is alpha*e*s*(s-1)."""
    return ReactionNetwork(
        ("E", "S"),
        (Reaction((0, 0), (0, 1), 1.0), Reaction((1, 2), (1, 3), 2.0 * alpha)),
    )


def enzyme_splitting_model(alpha: float, p: float) -> CompartmentModel:
    """Compartment model whose chemistry explodes on its own but whose
    fragmentation disperses enzymes: splitting at rate 1 per S molecule with
    the enzyme-carrier kernel, no inflow, exit or coagulation."""
    return CompartmentModel(
        chemistry=substrate_burst_network(alpha),
        kappa_I=0.0,
        kappa_E=0.0,
        kappa_F=1.0,
        kappa_C=0.0,
        fragmentation_species=1,
        inflow=InflowDistribution.point_mass((0, 0)),
        kernel=EnzymeCarrierKernel(p, enzyme_species=0, substrate_species=1),
    )


def aggregate_projection_network() -> ReactionNetwork:
    """Single-state-space upper bound for the open inflow model: X tracks the
    compartment count, E and S the species totals.

    Reactions: 2X -> X, X -> X + E, E + S -> E + 2S, S -> S + X, all rate 1.
    """
    return ReactionNetwork(
        ("X", "E", "S"),
        (
            Reaction((2, 0, 0), (1, 0, 0), 1.0),
            Reaction((1, 0, 0), (1, 1, 0), 1.0),
            Reaction((0, 1, 1), (0, 1, 2), 1.0),
            Reaction((0, 0, 1), (1, 0, 1), 1.0),
        ),
    )
