"""Exact scalar arithmetic for map parameters and orbits.

Two exact number types are used throughout:

* :class:`fractions.Fraction` for rational data (this covers every decimal
  or ``p/q`` input), and
* :class:`Quad` for elements of a real quadratic field ``Q(sqrt(d))``,
  which is closed under the affine branch maps when beta is a quadratic
  irrational such as the golden ratio.

All branch-membership decisions downstream compare these numbers exactly,
so Markov parameters (orbits that hit critical points) are decided
correctly instead of being precision accidents.  ``to_mpf`` bridges to the
mpmath ball backend used when a map is forced into floating-point mode.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

import mpmath


def _squarefree(n: int) -> tuple[int, int]:
    """Return (s, d) with n = s*s*d and d squarefree."""
    if n <= 0:
        raise ValueError("expected a positive radicand")
    s, d, p = 1, n, 2
    while p * p <= d:
        while d % (p * p) == 0:
            d //= p * p
            s *= p
        p += 1
    return s, d


class Quad:
    """Exact element a + b*sqrt(d) of a real quadratic field.

    b is always nonzero: arithmetic that lands on a rational value returns
    a plain Fraction, so equal numbers are always represented identically
    (this makes mixed Fraction/Quad values usable as dict keys).
    """

    __slots__ = ("a", "b", "d")

    def __init__(self, a, b, d: int):
        s, d0 = _squarefree(d)
        self.a = Fraction(a)
        self.b = Fraction(b) * s
        self.d = d0
        if self.b == 0:
            raise ValueError("rational value; use Fraction instead (see quad())")

    # -- construction -----------------------------------------------------

    def _parts(self, other):
        if isinstance(other, Quad):
            if other.d != self.d:
                raise ValueError("mixed quadratic fields are not supported")
            return other.a, other.b
        if isinstance(other, (int, Fraction)):
            return Fraction(other), Fraction(0)
        return None

    # -- ring operations ---------------------------------------------------

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return quad(self.a + p[0], self.b + p[1], self.d)

    __radd__ = __add__

    def __neg__(self):
        return Quad(-self.a, -self.b, self.d)

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return quad(self.a - p[0], self.b - p[1], self.d)

    def __rsub__(self, other):
        return -(self - other)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        return quad(self.a * a + self.b * b * self.d, self.a * b + self.b * a, self.d)

    __rmul__ = __mul__

    def _inverse(self):
        n = self.a * self.a - self.b * self.b * self.d
        return quad(self.a / n, -self.b / n, self.d)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return quad(self.a / other, self.b / other, self.d)
        if isinstance(other, Quad):
            return self * other._inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        if self._parts(other) is None:
            return NotImplemented
        return other * self._inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out, base = Fraction(1), self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    # -- order -------------------------------------------------------------

    def _sign(self) -> int:
        a, b = self.a, self.b
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        lhs, rhs = a * a, b * b * self.d
        if lhs == rhs:
            return 0
        big_a = lhs > rhs
        return (1 if big_a else -1) if a > 0 else (-1 if big_a else 1)

    def _cmp(self, other) -> int:
        diff = self - other
        if isinstance(diff, Fraction):
            return (diff > 0) - (diff < 0)
        return diff._sign()

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        if isinstance(other, Quad):
            return self.d == other.d and self.a == other.a and self.b == other.b
        if isinstance(other, (int, Fraction)):
            return False  # b != 0, so never rational
        return NotImplemented

    def __hash__(self):
        return hash((self.a, self.b, self.d))

    def __float__(self):
        return as_float(self)

    def __repr__(self):
        sign = "+" if self.b >= 0 else "-"
        return f"({self.a} {sign} {abs(self.b)}*sqrt({self.d}))"


def quad(a, b, d: int):
    """Build a + b*sqrt(d), collapsing to Fraction when b == 0."""
    a, b = Fraction(a), Fraction(b)
    if b == 0:
        return a
    return Quad(a, b, d)


def as_float(x) -> float:
    """Round an exact scalar to the nearest double.

    Quad parts can be astronomically large with a tiny sum (orbit
    coefficients grow geometrically), so the combination is done in mpmath
    at a precision that covers the integer parts.
    """
    if isinstance(x, Quad):
        bits = max(
            x.a.numerator.bit_length(), x.a.denominator.bit_length(),
            x.b.numerator.bit_length(), x.b.denominator.bit_length(),
        )
        with mpmath.workprec(bits + 96):
            v = (mpmath.mpf(x.a.numerator) / x.a.denominator
                 + mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d))
            return float(v)
    return float(x)


def to_mpf(x, prec: int) -> mpmath.mpf:
    """Convert an exact scalar to an mpf rounded at ``prec`` bits."""
    with mpmath.workprec(prec):
        if isinstance(x, Quad):
            return (mpmath.mpf(x.a.numerator) / x.a.denominator
                    + mpmath.mpf(x.b.numerator) / x.b.denominator * mpmath.sqrt(x.d))
        x = Fraction(x)
        return mpmath.mpf(x.numerator) / x.denominator


_RAT = re.compile(r"^\s*(-?\d+)\s*(?:/\s*(\d+))?\s*$")
_DEC = re.compile(r"^\s*-?\d+\.\d+\s*$")
_SQRT = re.compile(r"^\s*sqrt\(\s*(\d+)\s*\)\s*$")
_AFFINE = re.compile(
    r"^\s*\(?\s*(-?\d+)\s*([+-])\s*(?:(\d+)\s*\*\s*)?sqrt\(\s*(\d+)\s*\)\s*\)?"
    r"\s*(?:/\s*(\d+))?\s*$")
_ROOT = re.compile(
    r"^\s*root\(\s*(-?\d+)\s*,\s*(-?\d+)\s*,\s*(-?\d+)\s*\)\s*$")


def parse_scalar(spec):
    """Parse a scalar spec into an exact number.

    Accepted forms: int, Fraction, Quad, decimal string ("2.6"), rational
    string ("13/5"), "sqrt(D)", "(P+Q*sqrt(D))/R", and "root(a,b,c)" for
    the largest real root of a*x^2 + b*x + c.  Python floats are read
    through their shortest decimal repr.
    """
    if isinstance(spec, (int, Fraction, Quad)):
        return Fraction(spec) if isinstance(spec, int) else spec
    if isinstance(spec, float):
        return Fraction(repr(spec))
    if not isinstance(spec, str):
        raise ValueError(f"cannot parse scalar spec {spec!r}")
    if _RAT.match(spec) or _DEC.match(spec):
        return Fraction(spec.replace(" ", ""))
    m = _SQRT.match(spec)
    if m:
        return quad(0, 1, int(m.group(1)))
    m = _AFFINE.match(spec)
    if m:
        p, sgn, q, d, r = m.groups()
        q = Fraction(int(q or 1)) * (1 if sgn == "+" else -1)
        r = int(r or 1)
        return quad(Fraction(int(p), r), q / r, int(d))
    m = _ROOT.match(spec)
    if m:
        a, b, c = (int(g) for g in m.groups())
        if a == 0:
            raise ValueError("root(a,b,c) needs a != 0")
        disc = b * b - 4 * a * c
        if disc < 0:
            raise ValueError("root(a,b,c) has no real root")
        s, d = _squarefree(disc) if disc > 0 else (0, 1)
        if disc == 0 or d == 1:
            root_disc = math.isqrt(disc)
            return max(Fraction(-b + root_disc, 2 * a), Fraction(-b - root_disc, 2 * a))
        lo = quad(Fraction(-b, 2 * a), Fraction(-s, 2 * a), d)
        hi = quad(Fraction(-b, 2 * a), Fraction(s, 2 * a), d)
        return hi if hi > lo else lo
    raise ValueError(f"cannot parse scalar spec {spec!r}")


def scalar_str(x) -> str:
    """Canonical string form (exact for Fraction/Quad, repr for float)."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, Quad):
        return repr(x)
    return repr(x)
