"""Certified real-root isolation for exact rational polynomials.

Roots are certified by Sturm sign-variation counts, never by numeric
eigenvalues, so an interval returned here is a proof: the squarefree part
of the input has exactly one real root inside it. Refinement bisects on
the certified sign change and therefore preserves the certificate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .errors import ContractViolationError, UndefinedInputError
from .polynomials import UniPoly, _int_primitive, _int_pseudo_rem, squarefree_part


def sign(x: Fraction) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _sign_at(int_coeffs: Sequence[int], x: Fraction) -> int:
    """Sign of an integer polynomial at a rational point, integer-only.

    For x = n/d with d > 0, sign(p(n/d)) = sign(sum c_k n^k d^(deg-k)).
    """
    n, d = x.numerator, x.denominator
    acc = 0
    dp = 1
    # Horner in n, tracking the power of d for homogenization;
    # the final acc equals d^deg * p(n/d)
    for c in reversed(int_coeffs):
        acc = acc * n + c * dp
        dp *= d
    return 1 if acc > 0 else (-1 if acc < 0 else 0)


def cauchy_bound(p: UniPoly) -> Fraction:
    """Strict bound B with every real root of p inside (-B, B)."""
    if p.is_zero():
        raise UndefinedInputError("root bound of the zero polynomial")
    lc = abs(p.leading_coeff())
    biggest = max((abs(c) for c in p.coeffs[:-1]), default=Fraction(0))
    return Fraction(1) + biggest / lc


# ----------------------------------------------------------------------
# Sturm chains
# ----------------------------------------------------------------------

def sturm_chain(p: UniPoly) -> List[List[int]]:
    """Canonical Sturm chain as primitive integer coefficient lists.

    Built with positive pseudo-remainder multipliers and positive content
    division, both of which preserve the sign pattern the variation count
    depends on.
    """
    if p.is_zero():
        raise UndefinedInputError("Sturm chain of the zero polynomial")
    p0 = _int_primitive(p.primitive().integer_coeffs())
    chain = [p0]
    if len(p0) > 1:
        p1 = _int_primitive(
            [k * c for k, c in enumerate(p0) if k > 0])
        chain.append(p1)
        while len(chain[-1]) > 0:
            r = _int_pseudo_rem(chain[-2], chain[-1])
            if not r:
                break
            chain.append(_int_primitive([-v for v in r]))
    return chain


def sign_variations(chain: List[List[int]], x: Fraction) -> int:
    signs = []
    for cs in chain:
        s = _sign_at(cs, x)
        if s != 0:
            signs.append(s)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


def count_roots_between(chain: List[List[int]], a: Fraction, b: Fraction) -> int:
    """Distinct real roots in (a, b); requires a, b to be non-roots."""
    return sign_variations(chain, a) - sign_variations(chain, b)


# ----------------------------------------------------------------------
# Isolation
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class RootInterval:
    """Isolating interval for one simple real root of a squarefree polynomial.

    A point interval (lo == hi) records an exact rational root; for a
    regular interval lo < hi and the enclosed root is strictly interior.
    sign_left and sign_right are the signs of the squarefree polynomial
    just left and just right of the root, so they always differ.
    """

    lo: Fraction
    hi: Fraction
    poly_degree: int            # degree of the squarefree polynomial certified against
    sign_left: int              # -1 or +1
    sign_right: int

    def is_point(self) -> bool:
        return self.lo == self.hi

    def width(self) -> Fraction:
        return self.hi - self.lo

    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __post_init__(self):
        if self.lo > self.hi:
            raise ValueError("interval endpoints out of order")
        if self.sign_left not in (-1, 1) or self.sign_right not in (-1, 1):
            raise ValueError("endpoint signs must be -1 or +1")


def _split_points(a: Fraction, b: Fraction):
    """Candidate split points strictly inside (a, b), all distinct."""
    gap = b - a
    yield a + gap / 2
    k = 2
    while True:
        yield a + gap / 2 + gap / (2 ** k)
        yield a + gap / 2 - gap / (2 ** k)
        k += 1


def _bisect_to_width(q_int, lo: Fraction, hi: Fraction,
                     width: Fraction) -> Tuple[Fraction, Fraction]:
    """Shrink a sign-change interval below the target width.

    Precondition: q(lo) and q(hi) are nonzero with opposite signs, and
    exactly one root of q lies between them; both stay true on return.
    """
    s_lo = _sign_at(q_int, lo)
    while hi - lo > width:
        mid = (lo + hi) / 2
        s_mid = _sign_at(q_int, mid)
        if s_mid == 0:
            # landed exactly on the root: return a tight straddle
            delta = min(width / 2, (hi - mid) / 2, (mid - lo) / 2)
            return mid - delta, mid + delta
        if s_mid == s_lo:
            lo = mid
        else:
            hi = mid
    return lo, hi


def _isolate_on(chain, q_int, a: Fraction, b: Fraction, out: list):
    """Recursive bisection; invariant: q(a) != 0, q(b) != 0."""
    n = count_roots_between(chain, a, b)
    if n == 0:
        return
    if n == 1:
        out.append((a, b))
        return
    for mid in _split_points(a, b):
        if _sign_at(q_int, mid) != 0:
            break
    _isolate_on(chain, q_int, a, mid, out)
    _isolate_on(chain, q_int, mid, b, out)


def isolate_real_roots(p: UniPoly, domain: str = "all",
                       max_width: Fraction = Fraction(1, 4)) -> List[RootInterval]:
    """Isolate the distinct real roots of p in the requested domain.

    Args:
        p: nonzero polynomial; reduced to its squarefree part internally.
        domain: "all" for the whole line, "nonnegative" for [0, inf).
        max_width: each returned interval is tightened below this width.

    Returns:
        Disjoint RootIntervals, one per distinct root, sorted by position.
        A root exactly at 0 (only possible in the nonnegative domain when
        the constant term vanishes) is reported as a degenerate point
        interval at 0.
    """
    if p.is_zero():
        raise UndefinedInputError("cannot isolate roots of the zero polynomial")
    if domain not in ("all", "nonnegative"):
        raise ValueError(f"unknown domain {domain!r}")
    q = squarefree_part(p)
    deg = q.degree
    if deg == 0:
        return []
    results: List[RootInterval] = []

    if domain == "nonnegative" and q(Fraction(0)) == 0:
        # simple root at the origin: record it exactly, divide it out
        q = q.exact_divide(UniPoly.variable(q.var)).primitive()
        s_right = sign(q(Fraction(0)))
        # theta * q(theta) just right of 0 has the sign of q(0)
        results.append(RootInterval(
            Fraction(0), Fraction(0), deg, -s_right, s_right))
        if q.degree == 0:
            return results

    chain = sturm_chain(q)
    q_int = chain[0]
    bound = cauchy_bound(q)
    lo = Fraction(0) if domain == "nonnegative" else -bound
    raw: List[Tuple[Fraction, Fraction]] = []
    _isolate_on(chain, q_int, lo, bound, raw)
    for a, b in sorted(raw):
        a, b = _bisect_to_width(q_int, a, b, Fraction(max_width))
        results.append(RootInterval(
            a, b, deg, _sign_at(q_int, a), _sign_at(q_int, b)))
    return results


def refine_interval(p: UniPoly, iv: RootInterval,
                    width: Fraction) -> RootInterval:
    """Shrink a certified isolating interval to the requested width.

    Args:
        p: the polynomial the interval was certified for.
        iv: interval to refine.
        width: positive target width.

    Returns:
        A nested RootInterval of width <= width containing the same root.

    Raises:
        ContractViolationError: the interval does not certify exactly one
            root of p's squarefree part (for example, an interval for a
            different polynomial).
    """
    width = Fraction(width)
    if width <= 0:
        raise ValueError("target width must be positive")
    q = squarefree_part(p)
    q_int = _int_primitive(q.primitive().integer_coeffs())

    if iv.is_point():
        if _sign_at(q_int, iv.lo) != 0:
            raise ContractViolationError(
                "point interval does not sit on a root of the polynomial")
        return iv

    chain = sturm_chain(q)
    if (_sign_at(q_int, iv.lo) == 0 or _sign_at(q_int, iv.hi) == 0
            or count_roots_between(chain, iv.lo, iv.hi) != 1):
        raise ContractViolationError(
            "interval is not a certified isolation for this polynomial")

    lo, hi = _bisect_to_width(q_int, iv.lo, iv.hi, width)
    return RootInterval(lo, hi, iv.poly_degree,
                        _sign_at(q_int, lo), _sign_at(q_int, hi))


# ----------------------------------------------------------------------
# Rigorous range enclosure
# ----------------------------------------------------------------------

def poly_range(p: UniPoly, lo: Fraction, hi: Fraction) -> Tuple[Fraction, Fraction]:
    """Rigorous enclosure of {p(x) : x in [lo, hi]} by interval Horner.

    The returned rational interval contains the exact range (it may be
    wider). Exact endpoints for degenerate input lo == hi.
    """
    lo, hi = Fraction(lo), Fraction(hi)
    if lo > hi:
        raise ValueError("interval endpoints out of order")
    if lo == hi:
        v = p(lo)
        return v, v
    acc_lo = acc_hi = Fraction(0)
    for c in reversed(p.coeffs):
        cands = (acc_lo * lo, acc_lo * hi, acc_hi * lo, acc_hi * hi)
        acc_lo, acc_hi = min(cands) + c, max(cands) + c
    return acc_lo, acc_hi
