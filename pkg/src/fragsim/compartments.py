"""Population model of reaction networks inside interacting compartments.

The coarse-grained state of the system is a finite-support multiset: a map
from compartment content vectors (tuples of molecule counts) to the number
of compartments holding exactly that content. Four compartment-level events
act on it, in addition to the chemistry running independently inside each
compartment:

* inflow: a new compartment appears at constant rate, its content drawn
  from a fixed distribution;
* exit: each compartment disappears, contents deleted, at a constant
  per-compartment rate;
* fragmentation: a compartment with content x splits at rate proportional
  to x's count of one designated species; a splitting kernel draws one
  daughter's content y, the other daughter receiving x - y;
* coagulation: each unordered pair of compartments merges at a constant
  per-pair rate, the merged content being the sum.

`apply_population_generator` evaluates the expected instantaneous drift of
a functional of the population state by exact enumeration of all these
terms; it is the workhorse behind the numerical drift checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .crn import Content, ReactionNetwork, mass_action_rate
from .rng import Rng

_PMF_TOL = 1e-12


class PopulationState(dict):
    """Finite-support map content -> multiplicity, with no zero entries."""

    @staticmethod
    def from_dict(mapping, d: int | None = None) -> "PopulationState":
        n = PopulationState()
        for key, count in mapping.items():
            x = tuple(int(c) for c in key) if not isinstance(key, tuple) else key
            count = int(count)
            if count < 0:
                raise ValueError("multiplicities must be non-negative")
            if any(c < 0 for c in x):
                raise ValueError("content entries must be non-negative")
            if d is not None and len(x) != d:
                raise ValueError(f"content {x} has dimension {len(x)}, expected {d}")
            if count:
                n[x] = n.get(x, 0) + count
        return n


def total_compartments(n) -> int:
    """Number of compartments in the population state."""
    return sum(n.values())


def species_total(n, species: int, where=None) -> int:
    """Total count of one species across compartments.

    With `where`, only compartments whose content satisfies the predicate
    contribute (e.g. substrate held in enzyme-free compartments).
    """
    if where is None:
        return sum(x[species] * c for x, c in n.items())
    return sum(x[species] * c for x, c in n.items() if where(x))


def total_mass(n) -> int:
    """Total molecule count across all compartments and species."""
    return sum(sum(x) * c for x, c in n.items())


# ---------------------------------------------------------------------------
# Inflow distributions


class InflowError(ValueError):
    pass


@dataclass(frozen=True)
class InflowDistribution:
    """Law of a new compartment's content, materialized as a finite table.

    `support` is sorted; `cum` holds running probability sums and is shared
    verbatim with the compiled engine so both engines sample identically.
    For distributions with infinite support the table is truncated where the
    remaining mass drops below a bound, then renormalized; the discarded
    mass is recorded in `tail_mass` so generator evaluations can report the
    modeling error against the untruncated ideal.
    """

    kind: str
    params: dict
    support: tuple[Content, ...]
    probs: tuple[float, ...]
    cum: tuple[float, ...]
    mean_total: float  # expected total molecule count of a new compartment
    tail_mass: float

    @property
    def dimension(self) -> int:
        return len(self.support[0])

    @staticmethod
    def _build(kind, params, pairs, tail_mass):
        pairs = sorted(pairs)
        total = math.fsum(p for _, p in pairs)
        if abs(total - 1.0) > _PMF_TOL:
            raise InflowError(f"inflow probabilities sum to {total!r}, not 1")
        probs = tuple(p / total for _, p in pairs)
        support = tuple(x for x, _ in pairs)
        cum = []
        acc = 0.0
        for p in probs:
            acc += p
            cum.append(acc)
        mean_total = math.fsum(p * sum(x) for x, p in zip(support, probs))
        return InflowDistribution(
            kind, params, support, probs, tuple(cum), mean_total, tail_mass
        )

    @staticmethod
    def point_mass(content) -> "InflowDistribution":
        x = tuple(int(c) for c in content)
        return InflowDistribution._build("point_mass", {"content": x}, [(x, 1.0)], 0.0)

    @staticmethod
    def categorical(entries) -> "InflowDistribution":
        pairs = [(tuple(int(c) for c in x), float(p)) for x, p in entries]
        if any(p < 0 for _, p in pairs):
            raise InflowError("probabilities must be non-negative")
        params = {"entries": [(x, p) for x, p in pairs]}
        return InflowDistribution._build("categorical", params, pairs, 0.0)

    @staticmethod
    def poisson_product(rates, tail_bound: float = 1e-12) -> "InflowDistribution":
        """Independent Poisson counts per species, truncated and renormalized.

        Each species' marginal is cut where its tail mass drops below
        tail_bound / d, so the discarded joint mass is at most tail_bound.
        """
        rates = tuple(float(r) for r in rates)
        if any(r < 0 for r in rates):
            raise InflowError("Poisson rates must be non-negative")
        d = len(rates)
        per_species = []
        for lam in rates:
            pmf = [math.exp(-lam)]
            acc = pmf[0]
            k = 0
            while 1.0 - acc > tail_bound / d or k < lam:
                k += 1
                pmf.append(pmf[-1] * lam / k)
                acc += pmf[-1]
            per_species.append(pmf)
        pairs = [((), 1.0)]
        for pmf in per_species:
            pairs = [(x + (k,), p * q) for x, p in pairs for k, q in enumerate(pmf)]
        tail = 1.0 - math.fsum(p for _, p in pairs)
        params = {"rates": rates, "tail_bound": tail_bound}
        return InflowDistribution._build("poisson_product", params, pairs, max(tail, 0.0))


def inflow_sample(inflow: InflowDistribution, rng: Rng) -> Content:
    """Draw one new-compartment content from the (truncated) table."""
    target = rng.random() * inflow.cum[-1]
    for i, c in enumerate(inflow.cum):
        if target < c:
            return inflow.support[i]
    return inflow.support[-1]


# ---------------------------------------------------------------------------
# Fragmentation kernels


class KernelError(ValueError):
    pass


class FragmentationKernel:
    """Law of one daughter's content y when a parent with content x splits.

    The other daughter receives x - y, so a kernel must put no mass outside
    the box 0 <= y <= x. Kernels are expressed over labeled daughters (a
    distribution over y itself); kernels defined on unordered pairs split
    each pair's weight evenly across its two labelings.
    """

    kind: str = ""

    def pmf(self, x: Content) -> list[tuple[Content, float]]:
        raise NotImplementedError

    def sample(self, x: Content, rng: Rng) -> tuple[Content, Content]:
        raise NotImplementedError

    def params(self) -> dict:
        return {}


class BinomialHalfKernel(FragmentationKernel):
    """Every molecule joins daughter one independently with probability 1/2."""

    kind = "binomial_half"

    def pmf(self, x):
        out = [((), 1.0)]
        for xi in x:
            scale = 2.0**-xi
            out = [
                (y + (k,), p * (math.comb(xi, k) * scale))
                for y, p in out
                for k in range(xi + 1)
            ]
        out.sort()
        return out

    def sample(self, x, rng):
        y = tuple(rng.binomial(xi, 0.5) for xi in x)
        return y, tuple(a - b for a, b in zip(x, y))


class UniformPairKernel(FragmentationKernel):
    """Uniform over unordered daughter pairs {y, x - y}.

    Labels enumerate y <= x in mixed radix (last coordinate least
    significant); label m and its complement M - 1 - m form one pair, so
    with P pairs each non-symmetric label carries 1/(2P) and the symmetric
    midpoint, when x is componentwise even, carries 1/P.
    """

    kind = "uniform_unordered_pairs"

    @staticmethod
    def _label_count(x):
        m = 1
        for xi in x:
            m *= xi + 1
        return m

    @staticmethod
    def _decode(label, x):
        y = []
        for xi in reversed(x):
            y.append(label % (xi + 1))
            label //= xi + 1
        return tuple(reversed(y))

    def pmf(self, x):
        m_total = self._label_count(x)
        pairs = (m_total + 1) // 2
        out = []
        for m in range(m_total):
            if m == m_total - 1 - m:
                p = 1.0 / pairs
            else:
                p = 1.0 / (2.0 * pairs)
            out.append((self._decode(m, x), p))
        out.sort()
        return out

    def sample(self, x, rng):
        m_total = self._label_count(x)
        pairs = (m_total + 1) // 2
        k = rng.uniform_index(pairs)
        flip = rng.random()
        partner = m_total - 1 - k
        label = k
        if partner != k and flip >= 0.5:
            label = partner
        y = self._decode(label, x)
        return y, tuple(a - b for a, b in zip(x, y))


class EnzymeCarrierKernel(FragmentationKernel):
    """Two-species splitting law for enzyme/substrate contents.

    With a single enzyme, the enzyme stays in daughter one and each
    substrate follows it independently with probability p, so the count of
    substrates kept with the enzyme is Binomial(s, p). With zero or several
    enzymes every molecule splits independently with probability 1/2; for
    e >= 2 the chance that all enzymes land together is 2^(1-e) regardless
    of the substrate count.
    """

    kind = "enzyme_substrate"

    def __init__(self, p: float, enzyme_species: int = 0, substrate_species: int = 1):
        if not 0.0 < p < 1.0:
            raise KernelError("p must lie in (0, 1)")
        if {enzyme_species, substrate_species} != {0, 1}:
            raise KernelError("kernel is defined for two species")
        self.p = float(p)
        self.enzyme_species = enzyme_species
        self.substrate_species = substrate_species

    def params(self):
        return {
            "p": self.p,
            "enzyme_species": self.enzyme_species,
            "substrate_species": self.substrate_species,
        }

    def _make(self, e_part, s_part):
        y = [0, 0]
        y[self.enzyme_species] = e_part
        y[self.substrate_species] = s_part
        return tuple(y)

    def pmf(self, x):
        if len(x) != 2:
            raise KernelError("content must be two-dimensional")
        e = x[self.enzyme_species]
        s = x[self.substrate_species]
        out = []
        if e == 1:
            p, q = self.p, 1.0 - self.p
            for t in range(s + 1):
                out.append((self._make(1, t), math.comb(s, t) * p**t * q ** (s - t)))
        else:
            e_scale, s_scale = 2.0**-e, 2.0**-s
            for f in range(e + 1):
                pe = math.comb(e, f) * e_scale
                for t in range(s + 1):
                    out.append((self._make(f, t), pe * (math.comb(s, t) * s_scale)))
        out.sort()
        return out

    def sample(self, x, rng):
        e = x[self.enzyme_species]
        s = x[self.substrate_species]
        if e == 1:
            y = self._make(1, rng.binomial(s, self.p))
        else:
            y = self._make(rng.binomial(e, 0.5), rng.binomial(s, 0.5))
        return y, tuple(a - b for a, b in zip(x, y))


class TableKernel(FragmentationKernel):
    """Explicit per-content pmf; raises for contents with no entry."""

    kind = "table"

    def __init__(self, entries):
        self._table = {}
        for x, pmf in entries.items():
            x = tuple(int(c) for c in x)
            rows = sorted((tuple(int(c) for c in y), float(p)) for y, p in pmf)
            total = math.fsum(p for _, p in rows)
            if abs(total - 1.0) > _PMF_TOL:
                raise KernelError(f"pmf for {x} sums to {total!r}")
            for y, p in rows:
                if p < 0 or any(b > a for a, b in zip(x, y)):
                    raise KernelError(f"invalid daughter {y} for parent {x}")
            self._table[x] = tuple(rows)

    def params(self):
        return {"entries": {x: list(pmf) for x, pmf in self._table.items()}}

    def pmf(self, x):
        try:
            return list(self._table[tuple(x)])
        except KeyError:
            raise KernelError(f"table kernel has no entry for content {tuple(x)}")

    def sample(self, x, rng):
        rows = self.pmf(x)
        target = rng.random()
        acc = 0.0
        y = rows[-1][0]
        for cand, p in rows:
            acc += p
            if target < acc:
                y = cand
                break
        return y, tuple(a - b for a, b in zip(x, y))


def kernel_pmf(kernel: FragmentationKernel, x: Content) -> list[tuple[Content, float]]:
    """Explicit finite pmf over one daughter's content; the co-daughter is x - y."""
    return kernel.pmf(tuple(x))


def sample_fragmentation(
    kernel: FragmentationKernel, x: Content, rng: Rng
) -> tuple[Content, Content]:
    """Draw a daughter pair (y, x - y); marginal law of y equals kernel_pmf."""
    return kernel.sample(tuple(x), rng)


def make_kernel(kind: str, **params) -> FragmentationKernel:
    if kind == "binomial_half":
        return BinomialHalfKernel()
    if kind == "uniform_unordered_pairs":
        return UniformPairKernel()
    if kind == "enzyme_substrate":
        return EnzymeCarrierKernel(**params)
    if kind == "table":
        return TableKernel(**params)
    raise KernelError(f"unknown kernel kind {kind!r}")


# ---------------------------------------------------------------------------
# The compartment model and its generator


@dataclass(frozen=True)
class CompartmentModel:
    """Chemistry plus compartment-event rate constants, inflow law and kernel."""

    chemistry: ReactionNetwork
    kappa_I: float
    kappa_E: float
    kappa_F: float
    kappa_C: float
    fragmentation_species: int
    inflow: InflowDistribution
    kernel: FragmentationKernel

    def __post_init__(self):
        for name in ("kappa_I", "kappa_E", "kappa_F", "kappa_C"):
            if not (getattr(self, name) >= 0.0):
                raise ValueError(f"{name} must be non-negative")
        d = self.chemistry.dimension
        if not 0 <= self.fragmentation_species < d:
            raise ValueError("fragmentation species index out of range")
        if self.inflow.dimension != d:
            raise ValueError("inflow dimension does not match chemistry")

    @property
    def dimension(self) -> int:
        return self.chemistry.dimension

    def frag_count(self, x: Content) -> int:
        return x[self.fragmentation_species]

    def birth_death_rates(self):
        """(birth, death) rate constants if the chemistry is 0 <-> S, else None."""
        if self.dimension != 1:
            return None
        kb = kd = 0.0
        for r in self.chemistry.reactions:
            if r.source == (0,) and r.product == (1,):
                kb += r.rate_constant
            elif r.source == (1,) and r.product == (0,):
                kd += r.rate_constant
            else:
                return None
        return kb, kd

    def enzyme_indices(self):
        """(enzyme, substrate) species indices when the kernel designates them."""
        if isinstance(self.kernel, EnzymeCarrierKernel):
            return self.kernel.enzyme_species, self.kernel.substrate_species
        return None


@dataclass(frozen=True)
class Channel:
    """One event channel with positive rate at the current state."""

    kind: str  # inflow | internal | exit | fragmentation | coagulation
    rate: float
    content: Content | None = None
    content2: Content | None = None  # second member of a coagulating pair
    reaction_index: int | None = None

    def outcomes(self, model: CompartmentModel):
        """(probability, edits) per possible next state; edits are content deltas."""
        x = self.content
        if self.kind == "inflow":
            return [
                (p, [(y, +1)])
                for y, p in zip(model.inflow.support, model.inflow.probs)
            ]
        if self.kind == "internal":
            r = model.chemistry.reactions[self.reaction_index]
            x2 = tuple(c + dc for c, dc in zip(x, r.delta))
            return [(1.0, [(x, -1), (x2, +1)])]
        if self.kind == "exit":
            return [(1.0, [(x, -1)])]
        if self.kind == "fragmentation":
            return [
                (p, [(x, -1), (y, +1), (tuple(a - b for a, b in zip(x, y)), +1)])
                for y, p in model.kernel.pmf(x)
            ]
        if self.kind == "coagulation":
            if self.content2 is None:
                merged = tuple(2 * c for c in x)
                return [(1.0, [(x, -2), (merged, +1)])]
            merged = tuple(a + b for a, b in zip(x, self.content2))
            return [(1.0, [(x, -1), (self.content2, -1), (merged, +1)])]
        raise ValueError(f"unknown channel kind {self.kind!r}")


def event_channels(model: CompartmentModel, n) -> list[Channel]:
    """All channels with strictly positive rate, in canonical order.

    Order: inflow; then per content (ascending) each internal reaction in
    declaration order, exit, fragmentation; then same-content coagulations
    and finally distinct-pair coagulations in pair order. The simulation
    engines enumerate rates in exactly this order.
    """
    channels = []
    if model.kappa_I > 0:
        channels.append(Channel("inflow", model.kappa_I))
    contents = sorted(n)
    for x in contents:
        nx = n[x]
        nf = float(nx)
        for i, r in enumerate(model.chemistry.reactions):
            lam = mass_action_rate(r, x)
            if lam > 0.0:
                channels.append(
                    Channel("internal", nf * lam, content=x, reaction_index=i)
                )
        if model.kappa_E > 0:
            channels.append(Channel("exit", nf * model.kappa_E, content=x))
        if model.kappa_F > 0 and model.frag_count(x) > 0:
            rate = (model.kappa_F * model.frag_count(x)) * nf
            channels.append(Channel("fragmentation", rate, content=x))
    if model.kappa_C > 0:
        for x in contents:
            nx = n[x]
            if nx >= 2:
                rate = model.kappa_C * float(nx * (nx - 1) // 2)
                channels.append(Channel("coagulation", rate, content=x))
        for i, x in enumerate(contents):
            for y in contents[i + 1 :]:
                rate = model.kappa_C * float(n[x] * n[y])
                channels.append(Channel("coagulation", rate, content=x, content2=y))
    return channels


def coagulation_total_rate(model: CompartmentModel, n) -> float:
    """kappa_C * C(n) * (C(n) - 1) / 2; equals the sum over pair channels."""
    c = total_compartments(n)
    return model.kappa_C * float(c * (c - 1) // 2)


class MissingIncrementBound(ValueError):
    """Inflow has truncated support and no bound on V increments was given."""


def _v_after(V, n, edits) -> float:
    # evaluate V on the edited state, mutating and restoring in place
    touched = {}
    for x, delta in edits:
        touched[x] = touched.get(x, 0) + delta
    for x, delta in touched.items():
        new = n.get(x, 0) + delta
        if new < 0:
            raise ValueError(f"edit drives multiplicity of {x} below zero")
        if new:
            n[x] = new
        else:
            n.pop(x, None)
    try:
        return V(n)
    finally:
        for x, delta in touched.items():
            old = n.get(x, 0) - delta
            if old:
                n[x] = old
            else:
                n.pop(x, None)


def apply_population_generator(
    model: CompartmentModel, V, n, v_increment_bound: float | None = None
) -> tuple[float, float]:
    """Exact drift of V at state n, plus a truncation-error bound.

    The bound is nonzero only when the inflow table was truncated; it equals
    inflow rate * discarded mass * the caller's bound on |V(n + new) - V(n)|
    over the discarded contents. Raises MissingIncrementBound if a bound is
    needed but not supplied.
    """
    work = dict(n)
    v0 = V(work)
    drift = 0.0
    for x in sorted(work):
        nx = work[x]
        nf = float(nx)
        for r in model.chemistry.reactions:
            lam = mass_action_rate(r, x)
            if lam > 0.0:
                x2 = tuple(c + dc for c, dc in zip(x, r.delta))
                drift += nf * lam * (_v_after(V, work, [(x, -1), (x2, +1)]) - v0)
        if model.kappa_E > 0:
            drift += model.kappa_E * nf * (_v_after(V, work, [(x, -1)]) - v0)
        sx = model.frag_count(x)
        if model.kappa_F > 0 and sx > 0:
            rate = (model.kappa_F * sx) * nf
            for y, p in model.kernel.pmf(x):
                co = tuple(a - b for a, b in zip(x, y))
                dv = _v_after(V, work, [(x, -1), (y, +1), (co, +1)]) - v0
                drift += rate * p * dv
    trunc = 0.0
    if model.kappa_I > 0:
        if model.inflow.tail_mass > 0.0 and v_increment_bound is None:
            raise MissingIncrementBound(
                "inflow support is truncated; pass v_increment_bound to bound "
                "the discarded-term error"
            )
        for y, p in zip(model.inflow.support, model.inflow.probs):
            drift += model.kappa_I * p * (_v_after(V, work, [(y, +1)]) - v0)
        if model.inflow.tail_mass > 0.0:
            trunc = model.kappa_I * model.inflow.tail_mass * v_increment_bound
    if model.kappa_C > 0:
        contents = sorted(work)
        for x in contents:
            nx = work[x]
            if nx >= 2:
                rate = model.kappa_C * float(nx * (nx - 1) // 2)
                merged = tuple(2 * c for c in x)
                drift += rate * (_v_after(V, work, [(x, -2), (merged, +1)]) - v0)
        for i, x in enumerate(contents):
            for y in contents[i + 1 :]:
                rate = model.kappa_C * float(work[x] * work[y])
                merged = tuple(a + b for a, b in zip(x, y))
                dv = _v_after(V, work, [(x, -1), (y, -1), (merged, +1)]) - v0
                drift += rate * dv
    return drift, trunc
