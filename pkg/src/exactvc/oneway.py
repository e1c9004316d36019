"""Exact profile equations for the one-way layout, both estimation methods.

With kappa = 1/omega and theta = tau/omega, profiling the mean and kappa
out of the (scaled) log-likelihood leaves a univariate objective in theta
whose derivative is a rational function with an everywhere-positive
denominator on [0, inf). The numerators are assembled here from four
families of basis polynomials and handed to the shared profilefit
machinery. The restricted objective differs only in its N-1 weights and an
extra log term, and its numerator carries a guaranteed square factor from
the singleton size classes.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Tuple, Union

from .enclosure import Approx, interval_divide, log_enclosure
from .errors import ContractViolationError, DegenerateDataError
from .polynomials import UniPoly, product
from .profilefit import (
    Estimates,
    FitReport,
    ProfileEquation,
    build_profile_equation,
    fit_profile,
)
from .roots import RootInterval, poly_range, refine_interval
from .stats import OneWayStats, ml_degree, reml_degree

VAR = "theta"


@dataclass(frozen=True)
class BasisPolys:
    """The exact polynomial basis of the one-way profile equations.

    d is the product of (1 + n_i theta) over distinct sizes; d1 collects
    the singleton size classes and d2 the repeated ones. For a weight
    family a, f_a clears the denominator of the weighted sum with simple
    poles and g_a the one with double poles:

        f_a = sum_i m_i n_i a_i prod_{j != i} (1 + n_j theta)
        g_a = sum_i m_i n_i^2 a_i prod_{j != i} (1 + n_j theta)^2

    with a ranging over 1, the class means, their squares, and the
    between-group sums of squares divided by the multiplicities.
    """

    d: UniPoly
    d1: UniPoly
    d2: UniPoly
    f1: UniPoly
    fY: UniPoly
    fY2: UniPoly
    fBm: UniPoly
    g1: UniPoly
    gY: UniPoly
    gY2: UniPoly
    gBm: UniPoly


def basis_polynomials(stats: OneWayStats) -> BasisPolys:
    lin = [UniPoly.linear(1, n, VAR) for n in stats.sizes]
    d = product(lin, VAR)
    d1 = product((l for l, m in zip(lin, stats.mults) if m == 1), VAR)
    d2 = product((l for l, m in zip(lin, stats.mults) if m >= 2), VAR)
    off = [product((l for j, l in enumerate(lin) if j != i), VAR)
           for i in range(stats.M)]

    def f(weights) -> UniPoly:
        acc = UniPoly.zero(VAR)
        for i, w in enumerate(weights):
            acc = acc + off[i] * w
        return acc

    def g(weights) -> UniPoly:
        acc = UniPoly.zero(VAR)
        for i, w in enumerate(weights):
            acc = acc + off[i] * off[i] * w
        return acc

    m, n, Y, B = stats.mults, stats.sizes, stats.means, stats.betweenSS
    M = stats.M
    return BasisPolys(
        d=d, d1=d1, d2=d2,
        f1=f([Fraction(m[i] * n[i]) for i in range(M)]),
        fY=f([m[i] * n[i] * Y[i] for i in range(M)]),
        fY2=f([m[i] * n[i] * Y[i] ** 2 for i in range(M)]),
        fBm=f([n[i] * B[i] for i in range(M)]),
        g1=g([Fraction(m[i] * n[i] ** 2) for i in range(M)]),
        gY=g([m[i] * n[i] ** 2 * Y[i] for i in range(M)]),
        gY2=g([m[i] * n[i] ** 2 * Y[i] ** 2 for i in range(M)]),
        gBm=g([n[i] ** 2 * B[i] for i in range(M)]),
    )


def bracket_poly(stats: OneWayStats, basis: BasisPolys) -> UniPoly:
    """The cleared profile sum of squares: d * f1 * (rss at mu_hat(theta)).

    Equals W f1 d + fY2 f1 - fY^2 + f1 fBm; strictly positive on
    [0, inf) by Cauchy-Schwarz, which makes kappa_hat well defined there.
    """
    b = basis
    return (b.f1 * b.d * stats.withinSS + b.fY2 * b.f1
            - b.fY * b.fY + b.f1 * b.fBm)


def h_poly(basis: BasisPolys) -> UniPoly:
    """Numerator of -(d^2 f1^2) * d/dtheta (bracket/(d f1)): the part of the
    derivative contributed by the double-pole sums."""
    b = basis
    return (b.f1 * b.f1 * b.gY2 - 2 * b.fY * b.f1 * b.gY
            + b.fY * b.fY * b.g1 + b.f1 * b.f1 * b.gBm)


@dataclass(frozen=True)
class RemlObjective:
    """Restricted-criterion ingredients: kappa_hat as a rational function."""

    stats: OneWayStats
    kappa_num: UniPoly      # (N-1) * f1 * d
    kappa_den: UniPoly      # the bracket polynomial


def reml_objective(stats: OneWayStats) -> RemlObjective:
    basis = basis_polynomials(stats)
    return RemlObjective(
        stats=stats,
        kappa_num=basis.f1 * basis.d * Fraction(stats.N - 1),
        kappa_den=bracket_poly(stats, basis))


# ----------------------------------------------------------------------
# Profile equations
# ----------------------------------------------------------------------

def _require_generic(stats: OneWayStats):
    if stats.withinSS == 0:
        raise DegenerateDataError(
            "within-group sum of squares is zero; the profile analysis "
            "assumes residual variation")


def ml_equation(stats: OneWayStats) -> ProfileEquation:
    """Cancelled stationarity numerator of the profile criterion.

    The raw identity is

        objective'(theta) * kappa_hat(theta)^{-1}
            = [N*H - f1^2 * bracket] / (N d^2 f1^2),

    so the numerator's sign equals the derivative's sign on [0, inf).
    The singleton factor d1 always divides the numerator; the expected
    cancelled degree is 3M + M2 - 3.
    """
    _require_generic(stats)
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)
    raw = h_poly(basis) * Fraction(stats.N) - basis.f1 * basis.f1 * bracket
    lin = [UniPoly.linear(1, n, VAR) for n in stats.sizes]
    den_factors = [(l, 2) for l in lin] + [(basis.f1, 2)]
    return build_profile_equation(
        raw, den_factors, Fraction(stats.N),
        expected_degree=ml_degree(stats.M, stats.M2),
        method_tag="ML", base_sign=1)


def reml_equation(stats: OneWayStats) -> ProfileEquation:
    """Cancelled stationarity numerator of the restricted criterion.

    The raw identity is exact:

        objective'(theta) = [(g1 - f1^2) * bracket + (N-1)*H] / (d f1 bracket).

    The square d1^2 of the singleton factor divides the numerator (d1
    divides both g1 - f1^2 and bracket); expected cancelled degree
    2M + 2M2 - 3.
    """
    _require_generic(stats)
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)
    raw = ((basis.g1 - basis.f1 * basis.f1) * bracket
           + h_poly(basis) * Fraction(stats.N - 1))
    lin = [UniPoly.linear(1, n, VAR) for n in stats.sizes]
    # bracket itself carries one copy of d1, so split it out to expose the
    # full square in the denominator's factor list
    bracket_core = bracket.exact_divide(basis.d1)
    den_factors = ([(l, 2) for l, m in zip(lin, stats.mults) if m == 1]
                   + [(l, 1) for l, m in zip(lin, stats.mults) if m >= 2]
                   + [(basis.f1, 1), (bracket_core, 1)])
    return build_profile_equation(
        raw, den_factors, Fraction(1),
        expected_degree=reml_degree(stats.M, stats.M2),
        method_tag="REML", base_sign=1)


# ----------------------------------------------------------------------
# Values at a given theta
# ----------------------------------------------------------------------

def _theta_pair(theta) -> Tuple[Fraction, Fraction]:
    if isinstance(theta, RootInterval):
        return theta.lo, theta.hi
    t = Fraction(theta)
    return t, t


def _loglik_enclosure(stats: OneWayStats, basis: BasisPolys,
                      bracket: UniPoly, lo: Fraction, hi: Fraction,
                      method: str, prec: int) -> Optional[Approx]:
    """Objective enclosure over a theta interval; None asks for refinement.

    ML:    N log kappa_hat - sum m_i log(1+n_i theta) - N
    REML:  (N-1) log kappa_hat - sum m_i log(1+n_i theta)
           - log(f1/d) - (N-1)
    """
    if lo < 0:
        raise ValueError("theta must be nonnegative")
    weight = stats.N if method == "ML" else stats.N - 1
    kd = basis.f1 * basis.d
    kap = interval_divide(poly_range(kd, lo, hi), poly_range(bracket, lo, hi))
    if kap is None or kap.lo <= 0:
        return None
    kap = kap.scale(weight)
    lk = log_enclosure(kap.lo, kap.hi, prec)
    if lk is None:
        return None
    total = lk.scale(weight) - Approx.exact(weight)
    for n, m in zip(stats.sizes, stats.mults):
        le = log_enclosure(1 + n * lo, 1 + n * hi, prec)
        total = total - le.scale(m)
    if method == "REML":
        r1 = interval_divide(poly_range(basis.f1, lo, hi),
                             poly_range(basis.d, lo, hi))
        if r1 is None or r1.lo <= 0:
            return None
        lr = log_enclosure(r1.lo, r1.hi, prec)
        total = total - lr
    return total


def _estimates(stats: OneWayStats, basis: BasisPolys, bracket: UniPoly,
               theta, method: str, prec: int,
               refine_against: Optional[UniPoly] = None) -> Estimates:
    """Estimates at theta; refines interval thetas when enclosures degenerate."""
    weight = Fraction(stats.N if method == "ML" else stats.N - 1)
    kd = basis.f1 * basis.d * weight
    for _ in range(80):
        lo, hi = _theta_pair(theta)
        if lo == hi:
            f1v = basis.f1(lo)
            brv = bracket(lo)
            if f1v == 0 or brv <= 0:
                raise ContractViolationError(
                    "kappa denominator not positive at theta; "
                    "inconsistent statistics")
            mu = Approx.exact(basis.fY(lo) / f1v)
            kappa = Approx.exact(kd(lo) / brv)
        else:
            mu = interval_divide(poly_range(basis.fY, lo, hi),
                                 poly_range(basis.f1, lo, hi))
            kappa = interval_divide(poly_range(kd, lo, hi),
                                    poly_range(bracket, lo, hi))
        loglik = _loglik_enclosure(stats, basis, bracket, lo, hi, method, prec)
        if (mu is not None and kappa is not None and kappa.lo > 0
                and loglik is not None):
            omega = kappa.reciprocal()
            tau = Approx(lo, hi) * omega
            return Estimates(theta=theta, mu=mu, kappa=kappa,
                             omega=omega, tau=tau, loglik=loglik)
        # enclosure too loose: certified refinement against the equation
        if not isinstance(theta, RootInterval) or theta.is_point():
            raise ContractViolationError(
                "value enclosure failed at an exact theta")
        if refine_against is None:
            refine_against = (ml_equation(stats) if method == "ML"
                              else reml_equation(stats)).numerator
        theta = refine_interval(refine_against, theta, theta.width() / 32)
    raise ContractViolationError("value enclosures did not converge")


def estimates_at(stats: OneWayStats,
                 theta: Union[RootInterval, Fraction, int, str],
                 method: str = "ML", prec: int = 256) -> Estimates:
    """Point estimates at a given variance ratio.

    Args:
        stats: sufficient statistics.
        theta: exact nonnegative rational, or an isolating interval from
            the corresponding profile equation.
        method: "ML" or "REML" (selects the kappa weighting).
        prec: working precision in bits for the objective value.

    Returns:
        Estimates with mu = fY/f1, kappa = weight*f1*d/bracket, omega the
        reciprocal, tau = theta*omega, each as a certified enclosure.
    """
    if method not in ("ML", "REML"):
        raise ValueError("method must be ML or REML")
    if not isinstance(theta, RootInterval):
        theta = Fraction(theta)
        if theta < 0:
            raise ValueError("theta must be nonnegative")
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)
    return _estimates(stats, basis, bracket, theta, method, prec)


def profile_loglik(stats: OneWayStats, theta, prec: int = 256) -> Approx:
    """Profile objective N log kappa_hat - sum m_i log(1+n_i theta) - N."""
    return _loglik_at(stats, theta, "ML", prec)


def restricted_loglik(stats: OneWayStats, theta, prec: int = 256) -> Approx:
    """Restricted profile objective with the N-1 weighting and the extra
    -log(f1/d) term."""
    return _loglik_at(stats, theta, "REML", prec)


def _loglik_at(stats: OneWayStats, theta, method: str, prec: int) -> Approx:
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)
    refine_against = None
    for _ in range(80):
        lo, hi = _theta_pair(theta)
        if lo < 0:
            raise ValueError("theta must be nonnegative")
        out = _loglik_enclosure(stats, basis, bracket, lo, hi, method, prec)
        if out is not None:
            return out
        if not isinstance(theta, RootInterval) or theta.is_point():
            raise ContractViolationError(
                "objective enclosure failed at an exact theta")
        if refine_against is None:
            refine_against = (ml_equation(stats) if method == "ML"
                              else reml_equation(stats)).numerator
        theta = refine_interval(refine_against, theta, theta.width() / 32)
    raise ContractViolationError("objective enclosure did not converge")


# ----------------------------------------------------------------------
# Fits
# ----------------------------------------------------------------------

def _fit(stats: OneWayStats, method: str,
         refine_width: Fraction) -> FitReport:
    eq = ml_equation(stats) if method == "ML" else reml_equation(stats)
    basis = basis_polynomials(stats)
    bracket = bracket_poly(stats, basis)

    def loglik_fn(lo, hi, prec):
        return _loglik_enclosure(stats, basis, bracket, lo, hi, method, prec)

    def estimates_fn(theta, prec):
        return _estimates(stats, basis, bracket, theta, method, prec,
                          refine_against=eq.numerator)

    return fit_profile(eq, loglik_fn, estimates_fn, refine_width)


def ml_fit(stats: OneWayStats,
           refine_width: Fraction = Fraction(1, 10 ** 12)) -> FitReport:
    """Global profile-criterion optimum with certified classification."""
    return _fit(stats, "ML", Fraction(refine_width))


def reml_fit(stats: OneWayStats,
             refine_width: Fraction = Fraction(1, 10 ** 12)) -> FitReport:
    """Global restricted-criterion optimum with certified classification."""
    return _fit(stats, "REML", Fraction(refine_width))
