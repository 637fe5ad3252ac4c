"""Candidate functions and numerical drift-condition checking.

Everything here is a falsification search over a finite, explicitly reported
region of the state space, never a proof: the drift conditions that certify
non-explosivity (drift <= c*V + d), positive recurrence (drift <= -1 outside
a finite set) or transience (drift >= 0 outside a sublevel set) quantify
over infinitely many states, and these routines evaluate the generator
exactly on the states they visit and report any violation found.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .compartments import (
    CompartmentModel,
    apply_population_generator,
    species_total,
    total_compartments,
)
from .crn import ReactionNetwork
from .rng import Rng

# ---------------------------------------------------------------------------
# Candidate function families


class LinearStateFunction:
    """f(x) = w . x with strictly positive weights, on plain network states."""

    kind = "linear_crn"

    def __init__(self, w):
        self.w = tuple(float(v) for v in w)
        if any(v <= 0 for v in self.w):
            raise ValueError("weights must be strictly positive")

    def __call__(self, x):
        return sum(wi * xi for wi, xi in zip(self.w, x))


class ReciprocalLog:
    """f(x) = 1 / ln(x + 2) on non-negative integers; bounded, decreasing."""

    kind = "recip_log"

    def __call__(self, x):
        return 1.0 / math.log(x + 2.0)

    def vector(self, y):
        return 1.0 / np.log(y + 2.0)


class PowerFunction:
    """g(x) = x**lam for an exponent in (0, 1)."""

    kind = "power"

    def __init__(self, lam: float):
        if not 0.0 < lam < 1.0:
            raise ValueError("exponent must lie in (0, 1)")
        self.lam = float(lam)

    def __call__(self, x):
        return float(x) ** self.lam

    def vector(self, y):
        return np.asarray(y, dtype=float) ** self.lam


class LogShifted:
    """g(e, s) = e + ln(s + 1) on two-species network states."""

    kind = "log_shift"

    def __call__(self, x):
        e, s = x
        return e + math.log(s + 1.0)


class TableFunction:
    """Finite lookup table with a default; the default alone gives a constant."""

    kind = "table"

    def __init__(self, table=None, default=0.0):
        self.table = dict(table) if table else {}
        self.default = float(default)

    def __call__(self, x):
        key = tuple(sorted(x.items())) if isinstance(x, dict) else x
        return self.table.get(key, self.default)


class WeightedPopulationFunction:
    """V(n) = C(n) + alpha * sum_x n_x (w . x): compartment count plus a
    weighted molecule total."""

    kind = "population_weighted"

    def __init__(self, alpha: float, w):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.w = tuple(float(v) for v in w)
        if any(v <= 0 for v in self.w):
            raise ValueError("weights must be strictly positive")

    def __call__(self, n):
        total = 0.0
        count = 0
        for x, c in n.items():
            count += c
            total += c * sum(wi * xi for wi, xi in zip(self.w, x))
        return count + self.alpha * total

    def inflow_increment_bound(self, max_content_total: float) -> float:
        """|V(n + new) - V(n)| <= 1 + alpha * max(w) * (total content)."""
        return 1.0 + self.alpha * max(self.w) * max_content_total


class PowerLogComposite:
    """V(n) = T(n)**lam + ln(U(n) + C(n)) where T counts substrate in
    enzyme-carrying compartments and U counts substrate in enzyme-free ones.

    Defined for states with at least one compartment."""

    kind = "power_log_composite"

    def __init__(self, lam: float, enzyme_species: int = 0, substrate_species: int = 1):
        if not 0.0 < lam < 1.0:
            raise ValueError("exponent must lie in (0, 1)")
        self.lam = float(lam)
        self.enzyme_species = enzyme_species
        self.substrate_species = substrate_species

    def __call__(self, n):
        e_idx, s_idx = self.enzyme_species, self.substrate_species
        t = sum(x[s_idx] * c for x, c in n.items() if x[e_idx] >= 1)
        u = sum(x[s_idx] * c for x, c in n.items() if x[e_idx] == 0)
        count = sum(n.values())
        return float(t) ** self.lam + math.log(u + count)


class TransienceWitness:
    """V(n) = 1 - 1/(W(n) + 1) with W(n) = C(n) + alpha * (number of
    compartments holding at least one tracked molecule). Bounded and
    increasing in W, as a transience certificate requires."""

    kind = "transience_witness"

    def __init__(self, alpha: float, species: int = 0):
        if alpha <= 0:
            raise ValueError("alpha must be positive")
        self.alpha = float(alpha)
        self.species = species

    def weight(self, n) -> float:
        count = 0
        loaded = 0
        for x, c in n.items():
            count += c
            if x[self.species] >= 1:
                loaded += c
        return count + self.alpha * loaded

    def __call__(self, n):
        return 1.0 - 1.0 / (self.weight(n) + 1.0)


def make_candidate(kind: str, **params):
    table = {
        "linear_crn": LinearStateFunction,
        "recip_log": ReciprocalLog,
        "power": PowerFunction,
        "log_shift": LogShifted,
        "table": TableFunction,
        "population_weighted": WeightedPopulationFunction,
        "power_log_composite": PowerLogComposite,
        "transience_witness": TransienceWitness,
    }
    try:
        cls = table[kind]
    except KeyError:
        raise ValueError(f"unknown candidate function kind {kind!r}")
    return cls(**params)


# ---------------------------------------------------------------------------
# Drift reports


@dataclass
class DriftReport:
    """Outcome of a finite falsification scan against a drift bound."""

    bound: str
    region_checked: str
    n_states: int
    violation_count: int
    violations: list = field(default_factory=list)  # (state, drift, allowed)
    max_drift_margin: float = -math.inf  # max of drift - allowed; > 0 violates
    certificate: dict = field(default_factory=dict)
    truncation_error_bound: float = 0.0

    @property
    def passed(self) -> bool:
        return self.violation_count == 0

    def to_dict(self) -> dict:
        return {
            "bound": self.bound,
            "region_checked": self.region_checked,
            "n_states": self.n_states,
            "violation_count": self.violation_count,
            "violations": [
                {"state": _state_key(s), "drift": d, "allowed": a}
                for s, d, a in self.violations
            ],
            "max_drift_margin": self.max_drift_margin,
            "certificate": self.certificate,
            "truncation_error_bound": self.truncation_error_bound,
            "passed": self.passed,
        }


def _state_key(state):
    if isinstance(state, dict):
        return sorted(state.items())
    return state


# ---------------------------------------------------------------------------
# Linear drift bounds for plain networks, vectorized over a box


def _binom_array(x: np.ndarray, k: int) -> np.ndarray:
    if k == 0:
        return np.ones_like(x, dtype=float)
    out = x.astype(float)
    for i in range(1, k):
        out *= x - i
    return out / math.factorial(k)


def _crn_linear_drift(network: ReactionNetwork, w, xs: np.ndarray) -> np.ndarray:
    """Af on each column state of xs (shape (d, m)) for f(x) = w . x."""
    drift = np.zeros(xs.shape[1])
    for r in network.reactions:
        if r.rate_constant == 0.0:
            continue
        wdelta = sum(wi * di for wi, di in zip(w, r.delta))
        if wdelta == 0.0:
            continue
        rate = np.full(xs.shape[1], r.rate_constant)
        for j, v in enumerate(r.source):
            if v:
                rate *= _binom_array(xs[j], v)
        drift += rate * wdelta
    return drift


def check_crn_linear_bound(
    network: ReactionNetwork,
    w,
    c: float,
    d: float,
    x_bound: int,
    max_record: int = 50,
) -> DriftReport:
    """Scan Af(x) <= c*f(x) + d for f(x) = w . x over the box [0, x_bound]^dim.

    Purely a finite search: no violations on the box is evidence, not proof.
    """
    w = tuple(float(v) for v in w)
    if any(v <= 0 for v in w):
        raise ValueError("weights must be strictly positive")
    dim = network.dimension
    report = DriftReport(
        bound=f"drift <= {c}*f + {d}",
        region_checked=f"box [0, {x_bound}]^{dim}",
        n_states=(x_bound + 1) ** dim,
        violation_count=0,
        certificate={"w": list(w), "c": c, "d": d},
    )
    axis = np.arange(x_bound + 1, dtype=np.int64)
    chunk = max(1, int(2e6 // max(1, (x_bound + 1) ** (dim - 1))))
    for start in range(0, x_bound + 1, chunk):
        first = axis[start : start + chunk]
        grids = np.meshgrid(first, *([axis] * (dim - 1)), indexing="ij")
        xs = np.stack([g.ravel() for g in grids])
        drift = _crn_linear_drift(network, w, xs)
        fx = np.zeros(xs.shape[1])
        for j in range(dim):
            fx += w[j] * xs[j]
        margin = drift - (c * fx + d)
        m = float(margin.max())
        if m > report.max_drift_margin:
            report.max_drift_margin = m
        bad = np.nonzero(margin > 0.0)[0]
        report.violation_count += int(bad.size)
        for i in bad[: max(0, max_record - len(report.violations))]:
            state = tuple(int(xs[j, i]) for j in range(dim))
            report.violations.append((state, float(drift[i]), float(c * fx[i] + d)))
    return report


# ---------------------------------------------------------------------------
# One-enzyme projected chain drift


def one_enzyme_drift(alpha: float, p: float, f, x: int) -> float:
    """Exact generator drift of f for the projected chain at state x.

    The chain moves up by one at rate alpha*x*(x-1) + 1 and jumps to a
    Binomial(x, p) value at rate x; the binomial expectation is evaluated
    term by term (restricted to a window that carries all pmf mass above
    1e-20 of the peak, which is exhaustive to double precision).
    """
    up = (alpha * (x * (x - 1)) + 1.0) * (f(x + 1) - f(x))
    if x == 0:
        return up
    ef = _binomial_expectation_exact(x, p, f)
    return up + x * (ef - f(x))


def _binomial_expectation_exact(x: int, p: float, f) -> float:
    """E[f(Y)] for single-state evaluations.

    Up to moderate x the full sum is taken with exact integer binomials and
    compensated summation (error a few ulp); beyond that, a windowed
    per-term log-pmf whose absolute error stays far below the drift
    tolerances at such sizes.
    """
    q = 1.0 - p
    if x <= 400:
        return math.fsum(
            math.comb(x, y) * p**y * q ** (x - y) * f(y) for y in range(x + 1)
        )
    sigma = math.sqrt(x * p * q)
    half = int(math.ceil(8.5 * sigma)) + 40
    mode = min(x, int((x + 1) * p))
    lo = max(0, mode - half)
    hi = min(x, mode + half)
    y = np.arange(lo, hi + 1)
    logpmf = (
        gammaln(x + 1.0)
        - gammaln(y + 1.0)
        - gammaln(x - y + 1.0)
        + y * math.log(p)
        + (x - y) * math.log(q)
    )
    pmf = np.exp(logpmf)
    if pmf.sum() < 1.0 - 1e-9:
        raise ArithmeticError("binomial window lost probability mass")
    return float(pmf @ _f_vector(f, y))


def _f_vector(f, y):
    if hasattr(f, "vector"):
        return f.vector(y)
    return np.array([f(int(v)) for v in np.ravel(y)]).reshape(np.shape(y))


def _binomial_expectation(xs: np.ndarray, p: float, f) -> np.ndarray:
    """E[f(Y)] for Y ~ Binomial(x, p), vectorized over the states in xs.

    pmf values come from a multiplicative recurrence away from the mode;
    the ratio factors vanish naturally at y = x + 1 going up and y = -1
    going down, so the cumulative products zero themselves outside the
    support without masking.
    """
    q = 1.0 - p
    ratio = p / q
    modes = np.floor((xs + 1) * p).astype(np.int64)
    np.clip(modes, 0, xs, out=modes)
    sigma = np.sqrt(np.maximum(xs, 1) * p * q)
    half = int(np.ceil(8.0 * sigma.max())) + 30
    k = np.arange(-half, half + 1)
    y = modes[:, None] + k[None, :]
    xcol = xs[:, None]
    log_mode = (
        gammaln(xs + 1.0)
        - gammaln(modes + 1.0)
        - gammaln(xs - modes + 1.0)
        + modes * math.log(p)
        + (xs - modes) * math.log(q)
    )
    mid = half  # column index of the mode
    pmf = np.empty_like(y, dtype=float)
    pmf[:, mid] = np.exp(log_mode)
    if half:
        # right of the mode: y >= mode + 1 >= 1, factor 0 at y = x + 1
        yr = y[:, mid + 1 :]
        up = (xcol - yr + 1) * (ratio / yr)
        np.maximum(up, 0.0, out=up)
        pmf[:, mid + 1 :] = pmf[:, mid, None] * np.cumprod(up, axis=1)
        # left of the mode: x - y >= x - mode + 1 >= 1, factor 0 at y = -1
        yl = y[:, :mid]
        down = (yl + 1) / ((xcol - yl) * ratio)
        np.maximum(down, 0.0, out=down)
        pmf[:, :mid] = pmf[:, mid, None] * np.cumprod(down[:, ::-1], axis=1)[:, ::-1]
    if pmf.sum(axis=1).min() < 1.0 - 1e-9:
        raise ArithmeticError("binomial window lost probability mass")
    vals = _f_vector(f, np.clip(y, 0, None))
    return (pmf * vals).sum(axis=1)


def scan_one_enzyme_drift(
    alpha: float, p: float, f, x_max: int, chunk_budget: int = 4_000_000
) -> np.ndarray:
    """Drift at every state x in [0, x_max], vectorized in chunks."""
    drifts = np.empty(x_max + 1)
    fx_all = _f_vector(f, np.arange(x_max + 2))
    drifts[0] = (alpha * 0 + 1.0) * (fx_all[1] - fx_all[0])
    x = 1
    while x <= x_max:
        width = 2 * (int(8.5 * math.sqrt(x_max * p * (1 - p))) + 41)
        size = max(1, min(x_max + 1 - x, chunk_budget // width))
        xs = np.arange(x, x + size, dtype=np.int64)
        ef = _binomial_expectation(xs, p, f)
        fx = fx_all[x : x + size]
        fx1 = fx_all[x + 1 : x + size + 1]
        drifts[x : x + size] = (alpha * (xs * (xs - 1.0)) + 1.0) * (fx1 - fx) + xs * (
            ef - fx
        )
        x += size
    return drifts


def drift_threshold(drifts: np.ndarray, bound: float = -1.0) -> int | None:
    """Smallest X such that drift <= bound for every x in [X, len-1]; None if
    even the last state violates."""
    above = np.nonzero(drifts > bound)[0]
    if above.size == 0:
        return 0
    x_star = int(above[-1]) + 1
    return x_star if x_star < drifts.size else None


def choose_lambda(alpha: float, p: float, grid: int = 1000) -> float | None:
    """Exponent lam in (0,1) with alpha*lam + p**lam - 1 < 0, or None.

    Scans lam = k/grid and returns the grid minimizer of the expression;
    a qualifying exponent exists exactly when p < exp(-alpha).
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must lie in (0, 1)")
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    lams = np.arange(1, grid) / grid
    h = alpha * lams + p**lams - 1.0
    i = int(np.argmin(h))
    if h[i] >= 0.0:
        return None
    lam = float(lams[i])
    assert alpha * lam + p**lam - 1.0 < 0.0
    return lam


# ---------------------------------------------------------------------------
# Population drift scans


def closed_form_drift(model: CompartmentModel, alpha: float, n) -> float:
    """Drift of V(n) = alpha*S(n) + C(n) for the one-species birth/death model,
    in closed form:

        -kC*C(C-1)/2 + (kF - alpha*(kE + kd))*S + (alpha*kb - kE)*C
        + kI + kI*lambda*alpha

    with lambda the mean content of a new compartment."""
    bd = model.birth_death_rates()
    if bd is None:
        raise ValueError("closed form requires the one-species birth/death chemistry")
    kb, kd = bd
    c = total_compartments(n)
    s = species_total(n, 0)
    lam = model.inflow.mean_total
    return (
        -model.kappa_C * (c * (c - 1) / 2.0)
        + (model.kappa_F - alpha * (model.kappa_E + kd)) * s
        + (alpha * kb - model.kappa_E) * c
        + model.kappa_I
        + model.kappa_I * lam * alpha
    )


def enumerate_population_states(d: int, max_compartments: int, max_mass: int):
    """All population states with at most the given compartment count and
    total molecule count; contents enumerated as multisets."""
    pool = sorted(_contents_up_to(d, max_mass))

    def build(start, comps_left, mass_left, current):
        yield dict(current)
        if comps_left == 0:
            return
        for i in range(start, len(pool)):
            x = pool[i]
            m = sum(x)
            if m > mass_left:
                continue
            current[x] = current.get(x, 0) + 1
            yield from build(i, comps_left - 1, mass_left - m, current)
            if current[x] == 1:
                del current[x]
            else:
                current[x] -= 1

    yield from build(0, max_compartments, max_mass, {})


def _contents_up_to(d, max_mass):
    if d == 1:
        return [(m,) for m in range(max_mass + 1)]
    out = []

    def rec(prefix, left):
        if len(prefix) == d - 1:
            for m in range(left + 1):
                out.append(tuple(prefix) + (m,))
            return
        for m in range(left + 1):
            rec(prefix + [m], left - m)

    rec([], max_mass)
    return out


def sample_population_states(
    d: int, count: int, max_compartments: int, max_content: int, seed: int
):
    """Deterministic random states for falsification sampling."""
    rng = Rng(seed)
    out = []
    for _ in range(count):
        comps = 1 + rng.uniform_index(max_compartments)
        n = {}
        for _ in range(comps):
            x = tuple(rng.uniform_index(max_content + 1) for _ in range(d))
            n[x] = n.get(x, 0) + 1
        out.append(n)
    return out


_BOUND_FORMS = ("le_minus_one_outside", "le_cv_plus_d", "ge_zero_outside")


def check_population_drift(
    model: CompartmentModel,
    V,
    bound: str = "le_minus_one_outside",
    states=None,
    region=None,
    c: float = 0.0,
    d: float = 0.0,
    v_increment_bound: float | None = None,
    tol: float = 1e-9,
    region_description: str = "",
    max_record: int = 50,
) -> DriftReport:
    """Evaluate the population generator on each state and test a drift bound.

    `region`, when given, is a predicate marking states exempt from the
    bound (the finite set of the recurrence form, or the sublevel set of the
    transience form). The inflow truncation bound is folded into the pass
    margin, so a pass certifies the bound up to tol for the exact model.
    """
    if bound not in _BOUND_FORMS:
        raise ValueError(f"unknown bound form {bound!r}")
    if states is None:
        states = enumerate_population_states(model.dimension, 8, 16)
        region_description = region_description or "all states with C <= 8, mass <= 16"
    report = DriftReport(
        bound=bound,
        region_checked=region_description or "caller-supplied states",
        n_states=0,
        violation_count=0,
        certificate={"c": c, "d": d} if bound == "le_cv_plus_d" else {},
    )
    for n in states:
        if region is not None and region(n):
            continue
        report.n_states += 1
        drift, trunc = apply_population_generator(
            model, V, n, v_increment_bound=v_increment_bound
        )
        report.truncation_error_bound = max(report.truncation_error_bound, trunc)
        if bound == "le_minus_one_outside":
            allowed = -1.0
            margin = drift + trunc - allowed
        elif bound == "le_cv_plus_d":
            allowed = c * V(n) + d
            margin = drift + trunc - allowed
        else:  # ge_zero_outside
            allowed = 0.0
            margin = allowed - (drift - trunc)
        if margin > report.max_drift_margin:
            report.max_drift_margin = margin
        if margin > tol:
            report.violation_count += 1
            if len(report.violations) < max_record:
                report.violations.append((dict(n), drift, allowed))
    return report


# ---------------------------------------------------------------------------
# Parameter-regime classification for the one-species model


@dataclass(frozen=True)
class RegimeClassification:
    """Long-run classification of the one-species compartment model."""

    kind: str  # positive_recurrent | transient | degenerate | unknown_gap
    condition: str | None  # which sufficient condition fired (a / b / c)
    non_explosive: bool
    alpha: float | None
    alpha_interval: tuple[float, float] | None
    bullets: tuple[str, ...]
    conjectured_transient: bool
    notes: str
    params: dict

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "condition": self.condition,
            "non_explosive": self.non_explosive,
            "alpha": self.alpha,
            "alpha_interval": list(self.alpha_interval) if self.alpha_interval else None,
            "bullets": list(self.bullets),
            "conjectured_transient": self.conjectured_transient,
            "notes": self.notes,
            "params": self.params,
        }


def _recurrence_bullets(kI, kb, mu_is_zero) -> tuple[str, ...]:
    base = "the no-compartment state is positive recurrent"
    if kI > 0 and (kb > 0 or not mu_is_zero):
        return (base, "all states are reachable from it and positive recurrent")
    if kI > 0:
        return (
            base,
            "states with no molecules are positive recurrent; all others are "
            "transient and absorbed into the zero-molecule states in finite "
            "expected time",
        )
    return (
        base,
        "states with compartments are transient and absorbed by the "
        "no-compartment state in finite expected time",
    )


def _condition_c_bullets(kI, kb, kF, mu_is_zero) -> tuple[str, ...]:
    base = "the single-empty-compartment state is positive recurrent"
    if kI * kb > 0 or kF * kb > 0 or (kI > 0 and not mu_is_zero):
        return (base, "all states with at least one compartment are positive recurrent")
    if kI > 0 and kb == 0 and mu_is_zero:
        return (
            base,
            "zero-molecule states with compartments are positive recurrent; all "
            "others are transient and absorbed into them in finite expected time",
        )
    if kb > 0 and kI == 0 and kF == 0:
        return (
            base,
            "one-compartment states are positive recurrent; all others are "
            "transient and absorbed into them in finite expected time",
        )
    return (
        "the no-compartment state and the single-empty-compartment state are "
        "both absorbing",
        "all other states are transient and absorbed by the single-empty-"
        "compartment state in finite expected time",
    )


def classify_regime(model: CompartmentModel) -> RegimeClassification:
    """Classify the one-species birth/death compartment model by its rate
    constants.

    Non-explosivity holds for every parameter choice (the chemistry admits
    the identity as a linear certificate). Exactly one long-run tag is
    attached: one of three sufficient conditions for positive recurrence, a
    sufficient condition for transience, the degenerate non-decreasing
    regime, or the open gap (part of which is conjectured transient). The
    boundary of the gap is never asserted either way.
    """
    bd = model.birth_death_rates()
    if bd is None:
        raise ValueError("classification requires the one-species birth/death chemistry")
    kb, kd = bd
    kI, kE, kF, kC = model.kappa_I, model.kappa_E, model.kappa_F, model.kappa_C
    lam = model.inflow.mean_total
    if not math.isfinite(lam):
        raise ValueError("inflow mean content must be finite")
    mu_is_zero = model.inflow.support == ((0,),)
    params = {
        "kappa_b": kb, "kappa_d": kd, "kappa_I": kI, "kappa_E": kE,
        "kappa_F": kF, "kappa_C": kC, "inflow_mean": lam,
    }

    def alpha_low(denom):
        return kF / denom

    if kC > 0 and kE > 0:  # condition (a)
        low = alpha_low(kd + kE)
        alpha = 2.0 * low if kF > 0 else 1.0
        return RegimeClassification(
            "positive_recurrent", "a", True, alpha, (low, math.inf),
            _recurrence_bullets(kI, kb, mu_is_zero), False,
            "coagulation and exit both active", params,
        )
    if kE * kE + kE * kd > kb * kF:  # condition (b)
        low = alpha_low(kE + kd)
        high = kE / kb if kb > 0 else math.inf
        alpha = (low + high) / 2.0 if math.isfinite(high) else (2.0 * low if low > 0 else 1.0)
        return RegimeClassification(
            "positive_recurrent", "b", True, alpha, (low, high),
            _recurrence_bullets(kI, kb, mu_is_zero), False,
            "decay dominates the birth-fragmentation feedback", params,
        )
    if kC > 0 and kd > 0 and kE == 0:  # condition (c)
        low = alpha_low(kd)
        alpha = 2.0 * low if kF > 0 else 1.0
        return RegimeClassification(
            "positive_recurrent", "c", True, alpha, (low, math.inf),
            _condition_c_bullets(kI, kb, kF, mu_is_zero), False,
            "coagulation and molecular decay active without exit", params,
        )
    if kC == 0 and kI > 0 and (kF - kE) * kb > (kE + kd) * kE:  # transience
        low = kE / kb
        high = (kF - kE) / (kE + kd) if kE + kd > 0 else math.inf
        alpha = (low + high) / 2.0 if math.isfinite(high) else max(2.0 * low, 1.0)
        return RegimeClassification(
            "transient", None, True, alpha, (low, high),
            ("all states are transient",), False,
            "birth-fragmentation feedback dominates decay; no coagulation", params,
        )
    if kd == 0 and kE == 0 and kC > 0:
        return RegimeClassification(
            "degenerate", None, True, None, None,
            ("the total molecule count never decreases",), False,
            "no decay channel: molecule totals are non-decreasing", params,
        )
    conjectured = (
        kC == 0
        and kI > 0
        and kb * kF > kE * kE + kE * kd >= kb * kF - kb * kE
    )
    return RegimeClassification(
        "unknown_gap", None, True, None, None,
        ("no sufficient condition applies in this parameter region",),
        conjectured,
        "conjectured transient band of the open gap" if conjectured
        else "outside all proved sufficient conditions",
        params,
    )


def recurrence_region(model: CompartmentModel, alpha: float):
    """Predicate marking states whose closed-form drift exceeds -1; outside
    it the one-species model's drift of alpha*S + C must be <= -1."""

    def region(n):
        return closed_form_drift(model, alpha, n) > -1.0

    return region


def transience_threshold(model: CompartmentModel, witness: TransienceWitness, states):
    """Smallest integer k such that no scanned state with W(n) >= k has
    negative drift of the witness; reported as the sublevel cutoff."""
    worst = 0.0
    for n in states:
        drift, trunc = apply_population_generator(model, witness, n)
        if drift - trunc < 0.0:
            worst = max(worst, witness.weight(n))
    return math.floor(worst) + 1
