"""Exact stochastic simulation and numerical drift checking for reaction
networks inside interacting compartments with content-dependent fragmentation.
"""

from .compartments import (
    BinomialHalfKernel,
    Channel,
    CompartmentModel,
    EnzymeCarrierKernel,
    FragmentationKernel,
    InflowDistribution,
    PopulationState,
    TableKernel,
    UniformPairKernel,
    apply_population_generator,
    coagulation_total_rate,
    event_channels,
    inflow_sample,
    kernel_pmf,
    make_kernel,
    sample_fragmentation,
    species_total,
    total_compartments,
    total_mass,
)
from .crn import (
    Reaction,
    ReactionNetwork,
    apply_crn_generator,
    crn_state,
    enabled_transitions,
    falling_binomial,
    mass_action_rate,
)
from .lyapunov import (
    DriftReport,
    RegimeClassification,
    check_crn_linear_bound,
    check_population_drift,
    choose_lambda,
    classify_regime,
    closed_form_drift,
    drift_threshold,
    enumerate_population_states,
    make_candidate,
    one_enzyme_drift,
    recurrence_region,
    sample_population_states,
    scan_one_enzyme_drift,
    transience_threshold,
)
from .presets import PRESET_NAMES, run_preset
from .rng import Rng, substream_seed
from .simulate import (
    HAVE_COMPILED,
    SimulationReport,
    StopCondition,
    run_ensemble,
    run_one_enzyme_chain,
    run_trajectory,
    simulate_crn,
)

__version__ = "0.1.0"
