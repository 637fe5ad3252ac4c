"""Drift checkers, candidate functions and the regime classifier."""

import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fragsim.compartments import InflowDistribution, apply_population_generator
from fragsim.crn import ReactionNetwork
from fragsim.lyapunov import (
    PowerFunction,
    PowerLogComposite,
    ReciprocalLog,
    TableFunction,
    TransienceWitness,
    WeightedPopulationFunction,
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
from fragsim.models import (
    birth_death_model,
    birth_death_network,
    enzyme_growth_network,
    enzyme_splitting_model,
)


def brute_chain_drift(alpha, p, f, x):
    """Neighbor enumeration with pmf built by upward recurrence."""
    up = (alpha * x * (x - 1) + 1.0) * (f(x + 1) - f(x))
    if x == 0:
        return up
    pmf = [(1 - p) ** x]
    for y in range(x):
        pmf.append(pmf[-1] * (x - y) / (y + 1) * p / (1 - p))
    jump = sum(w * (f(y) - f(x)) for y, w in enumerate(pmf))
    return up + x * jump


class TestOneEnzymeDrift:
    def test_origin_only_up_transition(self):
        f = ReciprocalLog()
        assert one_enzyme_drift(1.0, 0.5, f, 0) == f(1) - f(0)

    @pytest.mark.parametrize("p,make_f", [(0.5, ReciprocalLog), (0.2, ReciprocalLog)])
    def test_matches_brute_force(self, p, make_f):
        f = make_f()
        for x in range(0, 201):
            a = one_enzyme_drift(1.0, p, f, x)
            b = brute_chain_drift(1.0, p, f, x)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    def test_power_function_matches_brute_force(self):
        lam = choose_lambda(1.0, 0.2)
        g = PowerFunction(lam)
        for x in range(0, 201, 3):
            a = one_enzyme_drift(1.0, 0.2, g, x)
            b = brute_chain_drift(1.0, 0.2, g, x)
            assert abs(a - b) <= 1e-12 * max(1.0, abs(b))

    def test_power_drift_below_analytic_envelope(self):
        # concavity gives drift <= x^(1+lam)*(alpha*lam + p^lam - 1)
        # + lam*x^(lam-1) for every x >= 1
        alpha, p = 1.0, 0.2
        lam = choose_lambda(alpha, p)
        g = PowerFunction(lam)
        lead = alpha * lam + p**lam - 1.0
        for x in list(range(1, 300)) + [1000, 5000, 20000]:
            envelope = x ** (1.0 + lam) * lead + lam * x ** (lam - 1.0)
            drift = one_enzyme_drift(alpha, p, g, x)
            assert drift <= envelope + 1e-9 * max(1.0, abs(envelope))

    def test_matches_full_compartment_generator(self):
        # with one enzyme the projected chain is Markov; its drift must agree
        # with the exact population generator on single-compartment states
        alpha, p = 1.0, 0.4
        model = enzyme_splitting_model(alpha, p)
        f = ReciprocalLog()

        def V(n):
            return f(sum(x[1] * c for x, c in n.items() if x[0] >= 1))

        for x in (1, 2, 7, 23, 60):
            drift, _ = apply_population_generator(model, V, {(1, x): 1})
            assert drift == pytest.approx(
                one_enzyme_drift(alpha, p, f, x), rel=1e-10, abs=1e-12
            )

    def test_scan_agrees_with_single_evaluations(self):
        f = ReciprocalLog()
        drifts = scan_one_enzyme_drift(1.0, 0.5, f, 3000)
        for x in (0, 1, 17, 444, 2999):
            assert drifts[x] == pytest.approx(
                one_enzyme_drift(1.0, 0.5, f, x), rel=1e-9, abs=1e-9
            )

    def test_supercritical_drift_threshold(self):
        f = ReciprocalLog()
        drifts = scan_one_enzyme_drift(1.0, 0.5, f, 5000)
        x_star = drift_threshold(drifts)
        assert x_star is not None and x_star < 1000
        assert (drifts[x_star:] <= -1.0).all()
        assert drifts[x_star - 1] > -1.0


class TestChooseLambda:
    def test_subcritical_has_exponent(self):
        lam = choose_lambda(1.0, 0.2)
        assert lam is not None and 0 < lam < 1
        assert 1.0 * lam + 0.2**lam - 1.0 < 0
        assert 1.0 * 0.5 + 0.2**0.5 - 1.0 < 0  # 0.5 is itself admissible

    def test_supercritical_fails(self):
        assert choose_lambda(1.0, 0.6) is None

    def test_tiny_alpha(self):
        lam = choose_lambda(1e-6, 0.5)
        assert lam is not None

    def test_boundary_fails(self):
        alpha = 1.0
        assert choose_lambda(alpha, math.exp(-alpha)) is None

    @given(st.floats(0.05, 3.0), st.floats(0.01, 0.99))
    @settings(max_examples=80)
    def test_never_returns_violating_exponent(self, alpha, p):
        lam = choose_lambda(alpha, p)
        if lam is not None:
            assert alpha * lam + p**lam - 1.0 < 0
        elif p < math.exp(-alpha) - 1e-3:
            # far inside the feasible region a grid exponent must exist
            assert False, f"missed admissible exponent at {(alpha, p)}"


class TestLinearCrnBound:
    def test_birth_death_certificate(self):
        net = birth_death_network(2.0, 1.0)
        report = check_crn_linear_bound(net, (1.0,), 0.0, 2.0, 1_000_000)
        assert report.passed
        assert report.n_states == 1_000_001
        assert report.max_drift_margin <= 0.0

    def test_quadratic_growth_defeats_linear_functions(self):
        net = enzyme_growth_network()
        report = check_crn_linear_bound(net, (1.0, 1.0), 1.0, 1.0, 200)
        assert not report.passed
        assert any(e == s for (e, s), _, _ in report.violations)

    def test_empty_network(self):
        net = ReactionNetwork(("A", "B"), ())
        report = check_crn_linear_bound(net, (1.0, 2.0), 0.0, 0.0, 50)
        assert report.passed

    def test_violations_exist_for_any_linear_candidate(self):
        # scanning the diagonal defeats every linear candidate on a grid
        for w1 in (0.1, 1.0, 10.0):
            for w2 in (0.1, 1.0, 10.0):
                for c in (0.0, 1.0, 10.0):
                    for d in (0.0, 10.0, 1e3):
                        found = False
                        s = 1
                        while s <= 10**6:
                            drift = w1 * s + w2 * s * s
                            if drift > c * (w1 + w2) * s + d:
                                found = True
                                break
                            s *= 2
                        assert found, (w1, w2, c, d)

    def test_weight_validation(self):
        with pytest.raises(ValueError):
            check_crn_linear_bound(birth_death_network(1, 1), (0.0,), 0, 0, 10)


class TestClosedForm:
    def test_empty_state(self):
        mu = InflowDistribution.categorical([((0,), 0.5), ((2,), 0.5)])
        m = birth_death_model(1, 1, 1.5, 1, 1, 1, inflow=mu)
        alpha = 2.0
        assert closed_form_drift(m, alpha, {}) == pytest.approx(
            1.5 + 1.5 * 1.0 * alpha
        )

    def test_no_decay_always_positive(self):
        m = birth_death_model(1.0, 0.0, 1.0, 0.0, 2.0, 0.0)
        for n in sample_population_states(1, 50, 10, 8, seed=4):
            assert closed_form_drift(m, 1.5, n) > 0.0

    def test_wrong_chemistry_rejected(self):
        from fragsim.models import enzyme_growth_model

        with pytest.raises(ValueError):
            closed_form_drift(enzyme_growth_model(), 1.0, {})

    @given(st.floats(0.3, 4.0))
    @settings(max_examples=25)
    def test_matches_generator_on_random_states(self, alpha):
        m = birth_death_model(0.8, 1.2, 0.5, 0.9, 1.7, 0.3)
        V = WeightedPopulationFunction(alpha, (1.0,))
        for n in sample_population_states(1, 10, 6, 6, seed=11):
            drift, _ = apply_population_generator(m, V, n)
            assert drift == pytest.approx(closed_form_drift(m, alpha, n), abs=1e-9)


class TestStateEnumeration:
    def test_small_count(self):
        states = list(enumerate_population_states(1, 2, 2))
        as_sets = {tuple(sorted(s.items())) for s in states}
        assert len(states) == len(as_sets) == 8

    def test_constraints_hold(self):
        for n in enumerate_population_states(1, 4, 6):
            assert sum(n.values()) <= 4
            assert sum(k[0] * v for k, v in n.items()) <= 6

    def test_two_species(self):
        states = list(enumerate_population_states(2, 2, 3))
        assert {} in states
        for n in states:
            assert sum(n.values()) <= 2
            assert sum(sum(k) * v for k, v in n.items()) <= 3


class TestPopulationDriftCheck:
    def test_constant_fails_recurrence_form(self):
        m = birth_death_model(1, 1, 1, 1, 1, 1)
        V = TableFunction(default=5.0)
        states = list(enumerate_population_states(1, 3, 4))
        report = check_population_drift(m, V, bound="le_minus_one_outside", states=states)
        assert not report.passed
        assert report.violation_count == report.n_states
        # violations and the worst margin tell one story
        assert report.max_drift_margin > 0.0
        assert json.dumps(report.to_dict())  # serializable with violations

    def test_constant_passes_growth_form(self):
        m = birth_death_model(1, 1, 1, 1, 1, 1)
        V = TableFunction(default=5.0)
        states = list(enumerate_population_states(1, 3, 4))
        report = check_population_drift(
            m, V, bound="le_cv_plus_d", states=states, c=0.0, d=0.0
        )
        assert report.passed
        assert report.max_drift_margin == 0.0

    def test_recurrence_certificate_condition_b(self):
        m = birth_death_model(1.0, 1.0, 1.0, 2.0, 3.0, 0.0)  # exit-dominated
        cls = classify_regime(m)
        assert cls.kind == "positive_recurrent" and cls.condition == "b"
        V = WeightedPopulationFunction(cls.alpha, (1.0,))
        states = list(enumerate_population_states(1, 6, 10))
        states += sample_population_states(1, 100, 30, 2, seed=606)  # C<=30, mass<=60
        report = check_population_drift(
            m,
            V,
            bound="le_minus_one_outside",
            states=states,
            region=recurrence_region(m, cls.alpha),
        )
        assert report.passed
        assert report.n_states > 0

    def test_transience_certificate(self):
        m = birth_death_model(2.0, 0.0, 1.0, 1.0, 2.0, 0.0)
        cls = classify_regime(m)
        assert cls.kind == "transient"
        assert cls.alpha_interval == (0.5, 1.0)
        V = TransienceWitness(cls.alpha)
        states = list(enumerate_population_states(1, 7, 10))
        k_eps = transience_threshold(m, V, states)
        report = check_population_drift(
            m,
            V,
            bound="ge_zero_outside",
            states=states + sample_population_states(1, 150, 25, 10, seed=3),
            region=lambda n: V.weight(n) < k_eps,
        )
        assert report.passed
        assert report.n_states > 0

    def test_unknown_bound_rejected(self):
        m = birth_death_model(1, 1, 1, 1, 1, 1)
        with pytest.raises(ValueError):
            check_population_drift(m, TableFunction(), bound="nonsense")


class TestCandidates:
    def test_factory(self):
        assert isinstance(make_candidate("recip_log"), ReciprocalLog)
        assert isinstance(make_candidate("power", lam=0.4), PowerFunction)
        assert make_candidate("log_shift")((2, 3)) == pytest.approx(2 + math.log(4.0))
        assert make_candidate("linear_crn", w=(2.0, 1.0))((3, 4)) == 10.0
        with pytest.raises(ValueError):
            make_candidate("bogus")

    def test_log_shift_matches_generator_example(self):
        from fragsim.crn import apply_crn_generator

        g = make_candidate("log_shift")
        net = enzyme_growth_network()
        assert apply_crn_generator(net, g, (2, 3)) == pytest.approx(
            2 + 6 * math.log(5.0 / 4.0), rel=1e-12
        )

    def test_weighted_population_values(self):
        V = WeightedPopulationFunction(2.0, (1.0, 0.5))
        assert V({(1, 2): 3}) == 3 + 2.0 * 3 * (1 + 1.0)

    def test_transience_witness_values(self):
        V = TransienceWitness(0.75)
        n = {(0,): 2, (3,): 1}
        assert V.weight(n) == 3 + 0.75 * 1
        assert V(n) == 1.0 - 1.0 / (3.75 + 1.0)

    def test_power_log_composite_values(self):
        V = PowerLogComposite(0.5, 0, 1)
        n = {(1, 4): 1, (0, 5): 2}
        assert V(n) == pytest.approx(2.0 + math.log(10 + 3))

    def test_composite_drift_surface_evaluates(self):
        # exposes the drift surface for the one-enzyme composite; values are
        # recorded, no sign conclusion is drawn at the balance point
        model = enzyme_splitting_model(1.0, math.exp(-1.0))
        V = PowerLogComposite(0.3, 0, 1)
        for s in (1, 5, 20):
            drift, _ = apply_population_generator(model, V, {(1, s): 1, (0, 2): 1})
            assert math.isfinite(drift)


class TestClassifier:
    def test_all_ones_is_condition_a(self):
        cls = classify_regime(birth_death_model(1, 1, 1, 1, 1, 1))
        assert cls.kind == "positive_recurrent" and cls.condition == "a"
        assert cls.non_explosive

    def test_exit_dominated_is_condition_b(self):
        cls = classify_regime(birth_death_model(1, 1, 1, 1, 1.9, 0.0))
        assert cls.condition == "b"
        assert cls.alpha_interval[0] < cls.alpha < cls.alpha_interval[1]

    def test_no_exit_coagulation_is_condition_c(self):
        cls = classify_regime(birth_death_model(1, 1, 1, 0.0, 1, 1))
        assert cls.condition == "c"

    def test_transient_example(self):
        cls = classify_regime(birth_death_model(2, 0, 1, 1, 2, 0))
        assert cls.kind == "transient"

    def test_gap_with_conjecture_tag(self):
        cls = classify_regime(birth_death_model(1, 1, 1, 1, 2.1, 0.0))
        assert cls.kind == "unknown_gap"
        assert cls.conjectured_transient

    def test_gap_boundary_not_asserted(self):
        # the equality case falls in the gap but outside the conjectured band
        cls = classify_regime(birth_death_model(1, 1, 1, 1, 2.0, 0.0))
        assert cls.kind == "unknown_gap"
        assert not cls.conjectured_transient

    def test_degenerate_regime(self):
        cls = classify_regime(birth_death_model(1, 0.0, 1, 0.0, 1, 1))
        assert cls.kind == "degenerate"

    def test_absorption_bullet_without_inflow(self):
        cls = classify_regime(birth_death_model(1, 1, 0.0, 1, 1, 1))
        assert cls.condition == "a"
        assert any("absorbed by the" in b for b in cls.bullets)

    def test_zero_molecule_bullet(self):
        cls = classify_regime(birth_death_model(0.0, 1, 1, 1, 1, 1))
        assert any("zero-molecule" in b for b in cls.bullets)

    def test_precedence_a_over_b(self):
        # both sufficient conditions hold; the coagulation-and-exit one is
        # reported first
        cls = classify_regime(birth_death_model(1, 1, 1, 5.0, 1, 1))
        assert cls.condition == "a"

    def test_wrong_chemistry_rejected(self):
        from fragsim.models import enzyme_growth_model

        with pytest.raises(ValueError):
            classify_regime(enzyme_growth_model())

    def test_classifier_alpha_drift_consistency(self):
        # for each positive-recurrent example the attached witness passes its
        # own drift scan
        for m in (
            birth_death_model(1, 1, 1, 1, 1, 1),
            birth_death_model(1, 1, 1, 1, 1.9, 0.0),
            birth_death_model(1, 1, 1, 0.0, 1, 1),
        ):
            cls = classify_regime(m)
            V = WeightedPopulationFunction(cls.alpha, (1.0,))
            report = check_population_drift(
                m,
                V,
                bound="le_minus_one_outside",
                states=enumerate_population_states(1, 5, 8),
                region=recurrence_region(m, cls.alpha),
            )
            assert report.passed
