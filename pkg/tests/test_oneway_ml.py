"""Tests for the ML profile equation: basis polynomials, cancellation
structure, degree law, classification, and estimate consistency."""

import random
from fractions import Fraction

import pytest

from conftest import fixture_path, load_stats_fixture, random_oneway_stats
from exactvc.errors import DegenerateDataError
from exactvc.oneway import (
    basis_polynomials,
    bracket_poly,
    estimates_at,
    h_poly,
    ml_equation,
    ml_fit,
    profile_loglik,
)
from exactvc.polynomials import UniPoly, descartes_sign_changes, poly_gcd
from exactvc.stats import GroupedData, OneWayStats, ml_degree, summarize


def raw_ml_numerator(stats):
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)
    return (h_poly(basis) * Fraction(stats.N)
            - basis.f1 * basis.f1 * bracket), basis


# -- basis polynomials -------------------------------------------------------

def test_basis_balanced_single_class():
    s = OneWayStats((4,), (3,), (Fraction(2),), (Fraction(5),), Fraction(9))
    b = basis_polynomials(s)
    assert b.d == UniPoly([1, 4], "theta")
    assert b.f1 == UniPoly.constant(12, "theta")
    assert b.f1.degree == 0


def test_basis_two_classes_hand_expansion():
    s = OneWayStats((2, 3), (1, 1), (Fraction(1), Fraction(2)),
                    (Fraction(0), Fraction(0)), Fraction(4))
    b = basis_polynomials(s)
    assert b.d == UniPoly([1, 5, 6], "theta")        # (1+2t)(1+3t)
    assert b.f1 == UniPoly([5, 12], "theta")          # 2(1+3t) + 3(1+2t)
    assert b.d1 == b.d and b.d2.degree == 0


def test_basis_matches_rational_sum_oracle():
    rng = random.Random(20250819)
    for _ in range(15):
        s = random_oneway_stats(rng)
        b = basis_polynomials(s)
        weights = {
            "f1": [Fraction(m * n) for m, n in zip(s.mults, s.sizes)],
            "fY": [m * n * y for m, n, y in zip(s.mults, s.sizes, s.means)],
            "fY2": [m * n * y * y for m, n, y in zip(s.mults, s.sizes, s.means)],
            "fBm": [n * bb for n, bb in zip(s.sizes, s.betweenSS)],
        }
        for _ in range(5):
            t = Fraction(rng.randrange(0, 50), rng.randrange(1, 9))
            dv = b.d(t)
            for name, w in weights.items():
                r = sum(wi / (1 + n * t) for wi, n in zip(w, s.sizes))
                assert getattr(b, name)(t) == dv * r
            # double-pole family, one spot check
            sv = sum(m * n * n / (1 + n * t) ** 2
                     for m, n in zip(s.mults, s.sizes))
            assert b.g1(t) == dv * dv * sv


def test_basis_positivity():
    rng = random.Random(7)
    for _ in range(10):
        s = random_oneway_stats(rng)
        b = basis_polynomials(s)
        assert b.d == b.d1 * b.d2
        for k in range(8):
            t = Fraction(k, 3)
            assert b.d(t) > 0 and b.f1(t) > 0
        for k in range(-8, 9):
            assert b.g1(Fraction(k, 2)) > 0


def test_degrees_of_basis():
    rng = random.Random(11)
    for _ in range(10):
        s = random_oneway_stats(rng)
        b = basis_polynomials(s)
        assert b.d.degree == s.M
        assert b.f1.degree == s.M - 1
        assert b.g1.degree == 2 * (s.M - 1)


# -- equation structure ------------------------------------------------------

def test_ml_equation_rejects_zero_within():
    s = OneWayStats((2, 3), (1, 1), (1, 2), (0, 0), 0)
    with pytest.raises(DegenerateDataError):
        ml_equation(s)


def test_ml_degree_law_random_instances():
    rng = random.Random(20250819)
    for _ in range(25):
        s = random_oneway_stats(rng)
        eq = ml_equation(s)
        assert eq.observed_degree == ml_degree(s.M, s.M2)
        assert eq.expected_degree == eq.observed_degree


def test_singleton_factor_divides_raw_numerator():
    rng = random.Random(13)
    for _ in range(20):
        s = random_oneway_stats(rng)
        raw, basis = raw_ml_numerator(s)
        assert basis.d1.divides(raw)
        # repeated classes with positive between-SS must NOT divide out
        for n, m, bb in zip(s.sizes, s.mults, s.betweenSS):
            if m >= 2 and bb > 0:
                assert not UniPoly.linear(1, n, "theta").divides(raw)


def test_cancelled_equation_is_coprime():
    rng = random.Random(17)
    for _ in range(15):
        s = random_oneway_stats(rng)
        eq = ml_equation(s)
        assert poly_gcd(eq.numerator, eq.denominator).degree == 0
        assert eq.numerator == eq.numerator.primitive()


def test_denominator_positive_on_domain():
    rng = random.Random(19)
    for _ in range(10):
        s = random_oneway_stats(rng)
        eq = ml_equation(s)
        for k in range(10):
            assert eq.denominator(Fraction(k, 3)) > 0


def test_balanced_layout_degree_one_closed_form():
    m, n = 4, 3
    B, W = Fraction(25, 2), Fraction(18)
    s = OneWayStats((n,), (m,), (Fraction(1),), (B,), W)
    eq = ml_equation(s)
    assert eq.observed_degree == 1
    rep = ml_fit(s)
    # 1 + n*theta_hat = (1 - 1/m) * MSA / MSE for an interior optimum
    MSA, MSE = n * B / (m - 1), W / (m * (n - 1))
    predicted = ((1 - Fraction(1, m)) * MSA / MSE - 1) / n
    iv = rep.global_estimates.theta
    assert iv.lo <= predicted <= iv.hi


def test_balanced_no_between_variation_boundary():
    s = OneWayStats((3,), (4,), (Fraction(2),), (Fraction(0),), Fraction(10))
    rep = ml_fit(s)
    assert rep.boundary_is_max
    assert rep.global_estimates.theta == 0
    assert rep.global_estimates.tau.lo == rep.global_estimates.tau.hi == 0


# -- Example 7.1 fixture -----------------------------------------------------

def sigdigits(x, k=6):
    return float(f"%.{k}g" % x)


def test_trimodal_fixture_ml_roots_and_classes():
    s = load_stats_fixture("trimodal.json")
    rep = ml_fit(s)
    assert rep.equation.observed_degree == 12
    pts = rep.stationary_points
    assert len(pts) == 3
    mids = [float(iv.midpoint()) for iv, _ in pts]
    assert [sigdigits(v) for v in mids] == [0.00838738, 0.118458, 0.338944]
    assert [label for _, label in pts] == ["local_max", "saddle", "local_max"]
    assert not rep.boundary_is_max and not rep.tie
    g = rep.global_estimates
    assert g.theta.lo <= Fraction("0.00838739") and g.theta.hi >= Fraction("0.00838737")
    assert g.tau.lo > 0 and g.omega.lo > 0


def test_trimodal_fixture_loglik_ordering():
    s = load_stats_fixture("trimodal.json")
    rep = ml_fit(s)
    pts = [iv for iv, label in rep.stationary_points if label == "local_max"]
    l1 = profile_loglik(s, pts[0])
    l3 = profile_loglik(s, pts[1])
    assert l1.lo > l3.hi


def test_boundary_fixture_ml_at_zero():
    s = load_stats_fixture("boundary.json")
    rep = ml_fit(s)
    assert rep.stationary_points == ()
    assert rep.boundary_is_max
    assert rep.global_estimates.theta == 0
    assert rep.negative_roots > 0


# -- estimates ---------------------------------------------------------------

def test_estimates_mean_equation_residual_is_zero():
    rng = random.Random(23)
    for _ in range(10):
        s = random_oneway_stats(rng)
        t = Fraction(rng.randrange(0, 20), rng.randrange(1, 7))
        est = estimates_at(s, t)
        mu = est.mu.lo   # exact at rational theta
        assert est.mu.is_exact
        residual = sum(
            Fraction(m * n, 1) * (y - mu) / (1 + n * t)
            for m, n, y in zip(s.mults, s.sizes, s.means))
        assert residual == 0


def test_estimates_invariants():
    s = load_stats_fixture("trimodal.json")
    rep = ml_fit(s)
    g = rep.global_estimates
    # omega = 1/kappa and tau = theta*omega as enclosure identities
    prod = g.omega * g.kappa
    assert prod.lo <= 1 <= prod.hi
    tlo, thi = g.theta_enclosure()
    assert g.tau.lo <= thi * g.omega.hi and g.tau.hi >= tlo * g.omega.lo
    assert g.tau.lo >= 0 and g.omega.lo > 0


def test_estimates_pooled_case_at_zero():
    # balanced, equal group means: omega at theta=0 is total SS / N
    m, n, mu0 = 3, 4, Fraction(7, 2)
    W = Fraction(33, 4)
    s = OneWayStats((n,), (m,), (mu0,), (Fraction(0),), W)
    est = estimates_at(s, 0)
    assert est.mu.is_exact and est.mu.lo == mu0
    assert est.omega.is_exact and est.omega.lo == W / s.N
    assert est.tau.lo == est.tau.hi == 0


def test_estimates_rejects_negative_theta():
    s = load_stats_fixture("trimodal.json")
    with pytest.raises(ValueError):
        estimates_at(s, Fraction(-1, 2))


def test_profile_loglik_decreases_beyond_roots():
    s = load_stats_fixture("trimodal.json")
    a = profile_loglik(s, Fraction(10))
    b = profile_loglik(s, Fraction(100))
    c = profile_loglik(s, Fraction(1000))
    assert a.lo > b.hi > c.hi


def test_fit_report_shape():
    s = load_stats_fixture("trimodal.json")
    rep = ml_fit(s)
    assert rep.sign_changes >= 1
    assert rep.equation.method_tag == "ML"
    for iv, label in rep.stationary_points:
        assert iv.lo >= 0
        assert label in ("local_max", "local_min", "saddle")


# -- dyestuff subsample ------------------------------------------------------

def load_dyestuff():
    import csv
    groups = {}
    with open(fixture_path("dyestuff.csv"), newline="") as fh:
        for row in csv.DictReader(fh):
            groups.setdefault(row["group"], []).append(Fraction(row["value"]))
    return summarize(GroupedData(tuple(tuple(v) for v in groups.values())))


def test_dyestuff_subset_pinned_equations():
    # Davies (1972) dyestuff yields with observations 1, 2 and 6 dropped.
    # Coefficient pins were derived independently of this implementation.
    s = load_dyestuff()
    assert s.sizes == (3, 4, 5) and s.mults == (1, 1, 4)
    ml_pin = UniPoly([64175517, 1279832076, 10086075110, 37792395524,
                      54052612853, -58814614680, -277109078400,
                      -245488320000], "theta").primitive()
    reml_pin = UniPoly([67458244, 897954164, 4048254212, 5505084700,
                        -6811774200, -17047800000], "theta").primitive()
    from exactvc.oneway import reml_equation
    assert ml_equation(s).numerator == ml_pin
    assert reml_equation(s).numerator == reml_pin
    assert descartes_sign_changes(ml_pin) == 1


def test_dyestuff_subset_ml_root():
    rep = ml_fit(load_dyestuff())
    pts = rep.stationary_points
    assert len(pts) == 1 and pts[0][1] == "local_max"
    assert round(float(pts[0][0].midpoint()), 4) == 0.5585
    assert not rep.boundary_is_max
