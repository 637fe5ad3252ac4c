"""Trajectory and ensemble simulation with engine selection.

Two engines implement the same exact direct-method dynamics:

* the pure-Python loops in `_pyengine`, which handle any model; and
* the compiled kernels in `_kernels` (built from Cython at install time),
  which cover the one-species birth/death compartment model and the
  one-enzyme projected chain.

Given the same seed the two produce identical event streams, so results do
not depend on which engine happened to be available; `engine="auto"` simply
picks the fast one when the model qualifies. Explosion cannot be observed
directly in finite runs; a run is flagged `suspected_explosion` when it
exhausts its event budget before the time horizon and the trailing mean
inter-event time (windows of 1000 events) has shrunk by a factor of 10^4
relative to the initial window. That definition is frozen so downstream
checks are stable.
"""

from __future__ import annotations

import math
import statistics
from dataclasses import dataclass, field
from typing import Callable

from . import _pyengine
from .compartments import CompartmentModel, PopulationState, total_mass
from .crn import Content, ReactionNetwork
from .rng import substream_seed

try:
    from . import _kernels

    HAVE_COMPILED = True
except ImportError:  # pure fallback, e.g. no compiler at install time
    _kernels = None
    HAVE_COMPILED = False

_STOP_REASONS = {0: "time", 1: "budget", 2: "absorbed", 3: "bound_hit", 4: "budget"}
_EXPLOSION_CONTRACTION = 1e4
_HUGE_BUDGET = 1 << 62


@dataclass(frozen=True)
class StopCondition:
    """When to stop a run; at least one of t_max / event_budget is required."""

    t_max: float | None = None
    event_budget: int | None = None
    absorbing_predicate: Callable | None = None
    observable_bound: tuple[Callable, float] | None = None

    def __post_init__(self):
        if self.t_max is None and self.event_budget is None:
            raise ValueError("stop condition needs t_max or event_budget")
        if self.t_max is not None and not self.t_max > 0:
            raise ValueError("t_max must be positive")
        if self.event_budget is not None and not self.event_budget > 0:
            raise ValueError("event_budget must be positive")

    @property
    def needs_python_engine(self) -> bool:
        return self.absorbing_predicate is not None or self.observable_bound is not None


@dataclass(frozen=True)
class GridPoint:
    time: float
    compartments: int
    totals: tuple[int, ...]
    s_hat: int | None = None


@dataclass(frozen=True)
class SimulationReport:
    """Outcome of one trajectory run."""

    final_state: object
    final_time: float
    event_count: int
    stop_reason: str
    overflow: bool
    suspected_explosion: bool
    seed: int
    engine: str
    grid: tuple[GridPoint, ...] = ()
    empty_entry_times: tuple[float, ...] = ()
    first_window_mean: float | None = None
    last_window_mean: float | None = None
    event_kind_counts: dict = field(default_factory=dict)
    returns_below: int | None = None
    peak_value: int | None = None
    event_log: tuple | None = None

    def final_mass(self) -> int:
        if isinstance(self.final_state, dict):
            return total_mass(self.final_state)
        if isinstance(self.final_state, tuple):
            return sum(self.final_state)
        return int(self.final_state)

    def final_compartments(self) -> int | None:
        if isinstance(self.final_state, dict):
            return sum(self.final_state.values())
        return None

    def visited_empty_after(self, t0: float) -> bool:
        return any(t > t0 for t in self.empty_entry_times)

    def first_empty_after(self, t0: float) -> float | None:
        for t in self.empty_entry_times:
            if t > t0:
                return t
        return None


def _suspected(stop_code, first_mean, last_mean) -> bool:
    if stop_code != 1 or first_mean is None or last_mean is None:
        return False
    if last_mean <= 0.0:
        return first_mean > 0.0
    return first_mean / last_mean >= _EXPLOSION_CONTRACTION


def _report_from_raw(raw, seed, engine, extra_grid_shat=True) -> SimulationReport:
    grid = tuple(
        GridPoint(t, c, tot, sh)
        for t, c, tot, sh in zip(
            raw.grid_times, raw.grid_compartments, raw.grid_totals, raw.grid_shat
        )
    )
    return SimulationReport(
        final_state=raw.final_state,
        final_time=raw.final_time,
        event_count=raw.event_count,
        stop_reason=_STOP_REASONS[raw.stop_code],
        overflow=raw.stop_code == 4,
        suspected_explosion=_suspected(
            raw.stop_code, raw.first_window_mean, raw.last_window_mean
        ),
        seed=seed,
        engine=engine,
        grid=grid,
        empty_entry_times=tuple(raw.empty_entry_times),
        first_window_mean=raw.first_window_mean,
        last_window_mean=raw.last_window_mean,
        event_kind_counts=dict(raw.kind_counts),
        event_log=tuple(raw.event_log) if raw.event_log is not None else None,
    )


def _compiled_eligible(model: CompartmentModel, stop: StopCondition) -> bool:
    if not HAVE_COMPILED or stop.needs_python_engine:
        return False
    if model.kernel.kind not in ("binomial_half", "uniform_unordered_pairs"):
        return False
    if model.dimension != 1:
        return False
    # chemistry must be at most one birth and one death, declared birth-first,
    # so the compiled channel order matches the declaration order
    shape = tuple((r.source, r.product) for r in model.chemistry.reactions)
    return shape in (
        (),
        (((0,), (1,)),),
        (((1,), (0,)),),
        (((0,), (1,)), ((1,), (0,))),
    )


def run_trajectory(
    model: CompartmentModel,
    initial,
    stop: StopCondition,
    seed: int,
    grid=(),
    engine: str = "auto",
    record_events: bool = False,
) -> SimulationReport:
    """Exact simulation of the compartment population process.

    Deterministic given (model, initial, stop, seed, grid): rerunning
    reproduces the report bit for bit, on either engine. Runs share no
    mutable state (the model is frozen, the initial state is copied), so
    trajectories may execute concurrently.
    """
    n0 = PopulationState.from_dict(initial, model.dimension)
    use_compiled = False
    if engine == "compiled":
        if not _compiled_eligible(model, stop) or record_events:
            raise ValueError("model/stop condition not supported by compiled engine")
        use_compiled = True
    elif engine == "auto":
        use_compiled = not record_events and _compiled_eligible(model, stop)
    elif engine != "pure":
        raise ValueError(f"unknown engine {engine!r}")

    if use_compiled:
        kb, kd = 0.0, 0.0
        for r in model.chemistry.reactions:
            if r.source == (0,):
                kb = r.rate_constant
            else:
                kd = r.rate_constant
        kernel_kind = 0 if model.kernel.kind == "binomial_half" else 1
        contents = sorted(n0)
        (
            state,
            t,
            events,
            stop_code,
            first_mean,
            last_mean,
            grid_times,
            grid_c,
            grid_s,
            empty_times,
            kind_counts,
        ) = _kernels.simulate_birth_death(
            kb,
            kd,
            model.kappa_I,
            model.kappa_E,
            model.kappa_F,
            model.kappa_C,
            [x[0] for x in model.inflow.support],
            list(model.inflow.cum),
            kernel_kind,
            [x[0] for x in contents],
            [n0[x] for x in contents],
            stop.t_max if stop.t_max is not None else math.inf,
            stop.event_budget if stop.event_budget is not None else _HUGE_BUDGET,
            seed,
            sorted(grid),
        )
        names = ("inflow", "internal:0", "internal:1", "exit", "fragmentation", "coagulation")
        counts = {k: v for k, v in zip(names, kind_counts) if v}
        return SimulationReport(
            final_state=state,
            final_time=t,
            event_count=events,
            stop_reason=_STOP_REASONS[stop_code],
            overflow=stop_code == 4,
            suspected_explosion=_suspected(stop_code, first_mean, last_mean),
            seed=seed,
            engine="compiled",
            grid=tuple(
                GridPoint(gt, gc, (gs,), None)
                for gt, gc, gs in zip(grid_times, grid_c, grid_s)
            ),
            empty_entry_times=tuple(empty_times),
            first_window_mean=first_mean,
            last_window_mean=last_mean,
            event_kind_counts=counts,
        )

    raw = _pyengine.run_population_loop(
        model,
        n0,
        stop.t_max,
        stop.event_budget,
        seed,
        grid=grid,
        absorbing_predicate=stop.absorbing_predicate,
        observable_bound=stop.observable_bound,
        record_events=record_events,
    )
    return _report_from_raw(raw, seed, "pure")


def run_one_enzyme_chain(
    alpha: float,
    p: float,
    initial_s: int,
    stop: StopCondition,
    seed: int,
    threshold: int | None = None,
    engine: str = "auto",
) -> SimulationReport:
    """Projected one-enzyme chain: up-steps at rate alpha*x*(x-1) + 1 and, at
    rate x, a jump to a Binomial(x, p) value.

    `threshold` enables counting of entries into [0, threshold) from above.
    A run whose value passes 2^31 halts with the overflow flag set (on the
    supercritical side a time-only stop condition would otherwise never be
    reached).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if engine not in ("auto", "pure", "compiled"):
        raise ValueError(f"unknown engine {engine!r}")
    if engine == "compiled" and not HAVE_COMPILED:
        raise ValueError("compiled engine not available")
    use_compiled = HAVE_COMPILED if engine == "auto" else engine == "compiled"
    t_max = stop.t_max if stop.t_max is not None else math.inf
    budget = stop.event_budget if stop.event_budget is not None else _HUGE_BUDGET
    if use_compiled:
        x, t, events, code, first_mean, last_mean, returns, peak = (
            _kernels.simulate_enzyme_chain(
                alpha, p, initial_s, t_max, budget,
                threshold if threshold is not None else -1, seed,
            )
        )
        return SimulationReport(
            final_state=x,
            final_time=t,
            event_count=events,
            stop_reason=_STOP_REASONS[code],
            overflow=code == 4,
            suspected_explosion=_suspected(code, first_mean, last_mean),
            seed=seed,
            engine="compiled",
            first_window_mean=first_mean,
            last_window_mean=last_mean,
            returns_below=returns if threshold is not None else None,
            peak_value=peak,
        )
    raw = _pyengine.run_chain_loop(alpha, p, initial_s, stop.t_max, stop.event_budget, threshold, seed)
    return SimulationReport(
        final_state=raw.final_state,
        final_time=raw.final_time,
        event_count=raw.event_count,
        stop_reason=_STOP_REASONS[raw.stop_code],
        overflow=raw.stop_code == 4,
        suspected_explosion=_suspected(
            raw.stop_code, raw.first_window_mean, raw.last_window_mean
        ),
        seed=seed,
        engine="pure",
        first_window_mean=raw.first_window_mean,
        last_window_mean=raw.last_window_mean,
        returns_below=raw.returns_below if threshold is not None else None,
        peak_value=raw.peak_value,
    )


def simulate_crn(
    network: ReactionNetwork,
    initial: Content,
    stop: StopCondition,
    seed: int,
    grid=(),
    record_events: bool = False,
) -> SimulationReport:
    """Exact direct-method simulation of a plain reaction network."""
    raw = _pyengine.run_crn_loop(
        network,
        tuple(initial),
        stop.t_max,
        stop.event_budget,
        seed,
        grid=grid,
        absorbing_predicate=stop.absorbing_predicate,
        observable_bound=stop.observable_bound,
        record_events=record_events,
    )
    grid_points = tuple(
        GridPoint(t, 0, tot, None) for t, tot in zip(raw.grid_times, raw.grid_totals)
    )
    return SimulationReport(
        final_state=raw.final_state,
        final_time=raw.final_time,
        event_count=raw.event_count,
        stop_reason=_STOP_REASONS[raw.stop_code],
        overflow=raw.stop_code == 4,
        suspected_explosion=_suspected(
            raw.stop_code, raw.first_window_mean, raw.last_window_mean
        ),
        seed=seed,
        engine="pure",
        grid=grid_points,
        event_kind_counts=dict(raw.kind_counts),
        event_log=tuple(raw.event_log) if raw.event_log is not None else None,
    )


def run_ensemble(
    model: CompartmentModel,
    initial,
    stop: StopCondition,
    master_seed: int,
    count: int,
    grid=(),
    engine: str = "auto",
    empty_after: float | None = None,
) -> tuple[list[SimulationReport], dict]:
    """Independent trajectories on sub-seeds derived from the master seed.

    Trajectory i runs on substream_seed(master_seed, i); the aggregate is a
    dict of order-independent statistics.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    reports = [
        run_trajectory(
            model, initial, stop, substream_seed(master_seed, i), grid=grid, engine=engine
        )
        for i in range(count)
    ]
    return reports, aggregate_reports(reports, empty_after=empty_after)


def aggregate_reports(reports, empty_after: float | None = None) -> dict:
    masses = [r.final_mass() for r in reports]
    comps = [r.final_compartments() for r in reports]
    agg = {
        "count": len(reports),
        "median_final_mass": float(statistics.median(masses)),
        "mean_final_mass": float(statistics.fmean(masses)),
        "median_event_count": float(statistics.median(r.event_count for r in reports)),
        "fraction_budget_exhausted": sum(
            r.stop_reason == "budget" for r in reports
        ) / len(reports),
        "fraction_suspected_explosion": sum(
            r.suspected_explosion for r in reports
        ) / len(reports),
    }
    if comps[0] is not None:
        agg["median_final_compartments"] = float(statistics.median(comps))
    if empty_after is not None:
        hits = [r.first_empty_after(empty_after) for r in reports]
        agg["empty_after_t"] = empty_after
        agg["fraction_visiting_empty"] = sum(h is not None for h in hits) / len(hits)
        times = [h for h in hits if h is not None]
        agg["mean_first_empty_time"] = float(statistics.fmean(times)) if times else None
    return agg
