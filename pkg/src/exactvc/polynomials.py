"""Exact univariate polynomial arithmetic over the rationals.

Everything in this module is pure: polynomials are immutable value objects
with `fractions.Fraction` coefficients, and no floating point is used
anywhere. The polynomial gcd uses primitive pseudo-remainder sequences over
integer-primitive representatives, which keeps the integer coefficients from
exploding on the large inputs produced by the likelihood-equation builders.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd as int_gcd
from typing import Iterable, Sequence

from .errors import DivisibilityError, UndefinedInputError

Rational = Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


def rat(value) -> Fraction:
    """Coerce ints/strings/Fractions to Fraction (decimal strings are exact)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, float):
        raise TypeError("refusing to coerce float to Rational; pass a string")
    return Fraction(value)


def rat_str(value: Fraction) -> str:
    """Serialize a Rational as 'p/q' or 'p' when q = 1."""
    return str(value)


# ----------------------------------------------------------------------
# UniPoly
# ----------------------------------------------------------------------

class UniPoly:
    """Dense univariate polynomial over Fraction, ascending coefficients.

    Instances are immutable. The zero polynomial stores an empty coefficient
    tuple and reports degree -1. The variable tag only matters for display
    and for refusing to mix polynomials in different variables.
    """

    __slots__ = ("coeffs", "var")

    def __init__(self, coeffs: Iterable, var: str = "theta"):
        cs = [rat(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))
        object.__setattr__(self, "var", var)

    def __setattr__(self, name, value):
        raise AttributeError("UniPoly is immutable")

    # -- basic structure --------------------------------------------------

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def leading_coeff(self) -> Fraction:
        if not self.coeffs:
            return ZERO
        return self.coeffs[-1]

    def coeff(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return ZERO

    @classmethod
    def zero(cls, var: str = "theta") -> "UniPoly":
        return cls((), var)

    @classmethod
    def constant(cls, c, var: str = "theta") -> "UniPoly":
        return cls((rat(c),), var)

    @classmethod
    def variable(cls, var: str = "theta") -> "UniPoly":
        return cls((ZERO, ONE), var)

    @classmethod
    def linear(cls, c0, c1, var: str = "theta") -> "UniPoly":
        """The polynomial c0 + c1*x."""
        return cls((rat(c0), rat(c1)), var)

    def _check_var(self, other: "UniPoly"):
        if self.var != other.var and self.coeffs and other.coeffs:
            raise ValueError(
                f"variable mismatch: {self.var!r} vs {other.var!r}")

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly.constant(other, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        self._check_var(other)
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(
            (self.coeff(k) + other.coeff(k) for k in range(n)),
            self.var if self.coeffs else other.var)

    __radd__ = __add__

    def __neg__(self):
        return UniPoly((-c for c in self.coeffs), self.var)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly.constant(other, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            c = rat(other)
            return UniPoly((ci * c for ci in self.coeffs), self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        self._check_var(other)
        if self.is_zero() or other.is_zero():
            return UniPoly.zero(self.var if self.coeffs else other.var)
        out = [ZERO] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return UniPoly(out, self.var)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power")
        result = UniPoly.constant(1, self.var)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = UniPoly.constant(other, self.var)
        if not isinstance(other, UniPoly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        return hash(self.coeffs)

    def __call__(self, x) -> Fraction:
        """Exact evaluation by Horner's rule."""
        x = rat(x)
        acc = ZERO
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def __repr__(self):
        if self.is_zero():
            return "UniPoly(0)"
        terms = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                terms.append(str(c))
            elif k == 1:
                terms.append(f"{c}*{self.var}")
            else:
                terms.append(f"{c}*{self.var}^{k}")
        return "UniPoly(" + " + ".join(terms) + ")"

    # -- calculus and substitution ----------------------------------------

    def derivative(self) -> "UniPoly":
        return UniPoly(
            (k * c for k, c in enumerate(self.coeffs) if k > 0),
            self.var)

    def compose(self, inner: "UniPoly") -> "UniPoly":
        """Exact composition self(inner(x)); result uses inner's variable."""
        acc = UniPoly.zero(inner.var)
        for c in reversed(self.coeffs):
            acc = acc * inner + UniPoly.constant(c, inner.var)
        return acc

    def with_var(self, var: str) -> "UniPoly":
        return UniPoly(self.coeffs, var)

    # -- division ----------------------------------------------------------

    def divmod(self, divisor: "UniPoly"):
        """Euclidean division over Q; returns (quotient, remainder)."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        self._check_var(divisor)
        var = self.var
        rem = list(self.coeffs)
        dd = divisor.degree
        dlc = divisor.leading_coeff()
        if len(rem) - 1 < dd:
            return UniPoly.zero(var), self
        quot = [ZERO] * (len(rem) - dd)
        for k in range(len(rem) - dd - 1, -1, -1):
            c = rem[k + dd] / dlc
            if c != 0:
                quot[k] = c
                for j, b in enumerate(divisor.coeffs):
                    rem[k + j] -= c * b
        return UniPoly(quot, var), UniPoly(rem[:dd], var)

    def rem(self, divisor: "UniPoly") -> "UniPoly":
        return self.divmod(divisor)[1]

    def exact_divide(self, divisor: "UniPoly") -> "UniPoly":
        """Quotient when the division is exact; DivisibilityError otherwise."""
        if divisor.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = self.divmod(divisor)
        if not r.is_zero():
            raise DivisibilityError(
                f"{divisor!r} does not divide {self!r}")
        return q

    def divides(self, other: "UniPoly") -> bool:
        if self.is_zero():
            return other.is_zero()
        return other.divmod(self)[1].is_zero()

    # -- normal forms -------------------------------------------------------

    def primitive(self) -> "UniPoly":
        """Primitive normal form: coprime integer coefficients, positive
        leading coefficient. Unique representative of the positive-scale
        equivalence class; the zero polynomial maps to itself."""
        if self.is_zero():
            return self
        den_lcm = 1
        for c in self.coeffs:
            den_lcm = den_lcm * c.denominator // int_gcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in self.coeffs]
        g = 0
        for v in ints:
            g = int_gcd(g, v)
        if ints[-1] < 0:
            g = -g
        return UniPoly((Fraction(v, g) for v in ints), self.var)

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        lc = self.leading_coeff()
        return UniPoly((c / lc for c in self.coeffs), self.var)

    def integer_coeffs(self) -> list:
        """Coefficient list as Python ints; requires integer coefficients."""
        out = []
        for c in self.coeffs:
            if c.denominator != 1:
                raise ValueError("polynomial does not have integer coefficients")
            out.append(c.numerator)
        return out

    def content_and_primitive_int(self):
        """Split a nonzero polynomial as content * primitive integer part.

        Returns (content: Fraction, prim: list[int]) with the primitive part
        having gcd 1 and positive leading entry; content carries the sign.
        """
        if self.is_zero():
            raise UndefinedInputError("zero polynomial has no primitive part")
        den_lcm = 1
        for c in self.coeffs:
            den_lcm = den_lcm * c.denominator // int_gcd(den_lcm, c.denominator)
        ints = [int(c * den_lcm) for c in self.coeffs]
        g = 0
        for v in ints:
            g = int_gcd(g, v)
        if ints[-1] < 0:
            g = -g
        return Fraction(g, den_lcm), [v // g for v in ints]


# ----------------------------------------------------------------------
# Integer-level helpers for the remainder sequences
# ----------------------------------------------------------------------

def _int_content(cs: Sequence[int]) -> int:
    g = 0
    for v in cs:
        g = int_gcd(g, v)
    return g if g else 1


def _int_primitive(cs: Sequence[int]) -> list:
    """Divide by the positive content; keeps the sign pattern."""
    g = _int_content(cs)
    return [v // g for v in cs]


def _int_trim(cs: list) -> list:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def _int_pseudo_rem(a: Sequence[int], b: Sequence[int]) -> list:
    """Pseudo-remainder of integer polynomials with a positive multiplier.

    Computes rem(m * a, b) over Z where m = |lc(b)|^(deg a - deg b + 1).
    The positive multiplier keeps the sign of the true rational remainder,
    which the Sturm chain construction relies on.
    """
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    steps = len(a) - len(b) + 1
    m = abs(lb) ** steps
    a = [v * m for v in a]
    for k in range(len(a) - db - 1, -1, -1):
        top = a[k + db]
        if top == 0:
            continue
        # top is divisible by lb at every step because of the premultiplier
        c = top // lb
        a[k + db] = 0
        for j in range(db):
            a[k + j] -= c * b[j]
    return _int_trim(a[:db])


def poly_gcd(p: UniPoly, q: UniPoly) -> UniPoly:
    """Greatest common divisor in primitive normal form.

    Args:
        p, q: polynomials, not both zero.

    Returns:
        The gcd with coprime integer coefficients and positive leading
        coefficient; divides both inputs exactly.
    """
    if p.is_zero() and q.is_zero():
        raise UndefinedInputError("gcd(0, 0) is undefined")
    var = p.var if not p.is_zero() else q.var
    if p.is_zero():
        return q.primitive()
    if q.is_zero():
        return p.primitive()
    a = _int_primitive(p.primitive().integer_coeffs())
    b = _int_primitive(q.primitive().integer_coeffs())
    if len(a) < len(b):
        a, b = b, a
    while b:
        r = _int_pseudo_rem(a, b)
        if r:
            r = _int_primitive(r)
        a, b = b, r
    if a[-1] < 0:
        a = [-v for v in a]
    return UniPoly(a, var)


def squarefree_part(p: UniPoly) -> UniPoly:
    """p / gcd(p, p'), normalized primitive; has the same distinct roots
    as p but all simple."""
    if p.is_zero():
        raise UndefinedInputError("squarefree part of the zero polynomial")
    if p.degree == 0:
        return UniPoly.constant(1, p.var)
    g = poly_gcd(p, p.derivative())
    return p.exact_divide(g).primitive()


def descartes_sign_changes(p: UniPoly) -> int:
    """Number of strict sign alternations in the coefficient sequence.

    Bounds the count of positive real roots from above and matches it
    modulo 2 (Descartes' rule of signs).
    """
    if p.is_zero():
        raise UndefinedInputError("sign changes of the zero polynomial")
    signs = [1 if c > 0 else -1 for c in p.coeffs if c != 0]
    return sum(1 for s, t in zip(signs, signs[1:]) if s != t)


def product(polys: Iterable[UniPoly], var: str = "theta") -> UniPoly:
    out = UniPoly.constant(1, var)
    for p in polys:
        out = out * p
    return out
