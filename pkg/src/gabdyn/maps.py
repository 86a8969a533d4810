"""Generalized (alpha,beta)-transformations and one-sided-limit dynamics.

A map is the piecewise-affine interval map with k branches of constant
slope ``+-beta`` and offset ``alpha``; branch i lives on
``[c_{i-1}, c_i)`` (the last branch is closed at 1) with critical points
``c_i = (i - alpha) / beta``.  Branch orientations come from a sign
vector.  Itineraries of one-sided limits (kneading sequences) are driven
through :func:`eval_sided`, which tracks which side of a point the orbit
approaches from; orientation-reversing branches exchange the two sides.

All map data is exact (Fraction or quadratic field element).  Orbits and
codings run on the exact backend by default; ``backend="ball"`` forces
mpmath ball arithmetic with the precision-escalation guard.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import mpmath

from .arith import Quad, as_float, parse_scalar, scalar_str, to_mpf
from .errors import (AlphaOutOfRange, BetaOutOfRange, PrecisionExhausted,
                     SignLengthMismatch)

LEFT = "left"
RIGHT = "right"
_FLIP = {LEFT: RIGHT, RIGHT: LEFT}

DEFAULT_PRECISION_BITS = 256
PRECISION_CAP = 65536


class SidedPoint(NamedTuple):
    """A one-sided limit lim_{y -> value +- 0}; (0,left) and (1,right) are
    outside [0,1] and therefore forbidden."""

    value: object
    side: str


def ceil_exact(x) -> int:
    """Smallest integer >= x for an exact scalar."""
    if isinstance(x, (int, Fraction)):
        x = Fraction(x)
        return -((-x.numerator) // x.denominator)
    n = math.ceil(as_float(x))
    while n < x:
        n += 1
    while n - 1 >= x:
        n -= 1
    return n


@dataclass(frozen=True)
class MapParams:
    """Immutable parameters of one generalized (alpha,beta)-transformation.

    Fields are exact scalars; ``criticals`` is the full tuple
    ``(c_0=0, c_1, ..., c_k=1)``.  Instances are pure data and safe to
    share across threads.
    """

    alpha: object
    beta: object
    signs: tuple
    k: int
    criticals: tuple
    precision_bits: int = DEFAULT_PRECISION_BITS
    backend: str = "exact"
    _floats: dict = field(default_factory=dict, compare=False, repr=False)

    def interior_criticals(self):
        return self.criticals[1:-1]

    def branch_slope(self, i: int):
        return self.beta if self.signs[i - 1] > 0 else -self.beta

    def branch_offset(self, i: int):
        """Exact additive offset: T(x) = slope*x + offset on branch i."""
        if self.signs[i - 1] > 0:
            return self.alpha - i + 1
        return -self.alpha + i

    def float_data(self):
        """Cached float views (criticals, slopes, offsets) for numerics."""
        if not self._floats:
            self._floats["crit"] = [as_float(c) for c in self.criticals]
            self._floats["slope"] = [as_float(self.branch_slope(i)) for i in range(1, self.k + 1)]
            self._floats["off"] = [as_float(self.branch_offset(i)) for i in range(1, self.k + 1)]
        return self._floats

    def describe(self) -> dict:
        return {
            "alpha": scalar_str(self.alpha),
            "beta": scalar_str(self.beta),
            "signs": list(self.signs),
            "k": self.k,
            "precision_bits": self.precision_bits,
            "backend": self.backend,
        }


def build_map(alpha, beta, signs, precision_bits: int = DEFAULT_PRECISION_BITS,
              backend: str = "exact") -> MapParams:
    """Construct a MapParams from (alpha, beta, sign vector).

    alpha and beta accept anything :func:`gabdyn.arith.parse_scalar` does.
    The sign vector must have one entry per branch, where the branch count
    is the smallest integer >= alpha + beta.
    """
    alpha = parse_scalar(alpha)
    beta = parse_scalar(beta)
    if not beta > 1:
        raise BetaOutOfRange(f"beta must be > 1, got {scalar_str(beta)}")
    if not (0 <= alpha < 1):
        raise AlphaOutOfRange(f"alpha must be in [0,1), got {scalar_str(alpha)}")
    k = ceil_exact(alpha + beta)
    signs = tuple(int(s) for s in signs)
    if len(signs) != k or any(s not in (-1, 1) for s in signs):
        raise SignLengthMismatch(
            f"need {k} signs in {{+1,-1}} for alpha+beta in ({k - 1},{k}], got {signs}")
    criticals = (Fraction(0),) + tuple((i - alpha) / beta for i in range(1, k)) + (Fraction(1),)
    for lo, hi in zip(criticals, criticals[1:]):
        assert lo < hi, "critical points must be strictly increasing"
    if backend not in ("exact", "ball"):
        raise ValueError(f"unknown backend {backend!r}")
    return MapParams(alpha=alpha, beta=beta, signs=signs, k=k,
                     criticals=criticals, precision_bits=precision_bits, backend=backend)


def map_from_json(obj: dict) -> MapParams:
    """Build a map from the JSON wire format
    {"alpha": ..., "beta": ..., "signs": [...], "precision_bits": ...}."""
    return build_map(obj["alpha"], obj["beta"], obj["signs"],
                     precision_bits=int(obj.get("precision_bits", DEFAULT_PRECISION_BITS)),
                     backend=obj.get("backend", "exact"))


def branch_of(m: MapParams, x) -> int:
    """Branch index of a plain point: [c_{i-1}, c_i) for i < k, last closed."""
    for i in range(1, m.k):
        if x < m.criticals[i]:
            return i
    return m.k


def branch_of_sided(m: MapParams, p: SidedPoint) -> int:
    """Branch containing points infinitesimally on p's side."""
    v, side = p
    if side == RIGHT:
        i = 1
        for c in m.interior_criticals():
            if c <= v:
                i += 1
        return i
    i = 1
    for c in m.interior_criticals():
        if c < v:
            i += 1
    return i


def affine(m: MapParams, i: int, x):
    """Evaluate the affine extension of branch i at x."""
    return m.branch_slope(i) * x + m.branch_offset(i)


def eval_map(m: MapParams, x):
    """One step of the map; returns (T(x), branch index).  Total on [0,1]."""
    if not (0 <= x <= 1):
        raise ValueError("x must lie in [0,1]")
    i = branch_of(m, x)
    return affine(m, i, x), i


def eval_sided(m: MapParams, p: SidedPoint):
    """One step of the sided dynamics; returns (image SidedPoint, symbol).

    The symbol is the branch the one-sided neighborhood falls in; the side
    flips exactly when the branch is orientation reversing.
    """
    if (p.value == 0 and p.side == LEFT) or (p.value == 1 and p.side == RIGHT):
        raise ValueError(f"sided point {p} lies outside [0,1]")
    i = branch_of_sided(m, p)
    y = affine(m, i, p.value)
    side = p.side if m.signs[i - 1] > 0 else _FLIP[p.side]
    assert not ((y == 0 and side == LEFT) or (y == 1 and side == RIGHT))
    return SidedPoint(y, side), i


def sided_orbit(m: MapParams, p: SidedPoint, n: int):
    """n sided steps; returns (list of n+1 SidedPoints, list of n symbols)."""
    pts, syms = [p], []
    for _ in range(n):
        p, s = eval_sided(m, p)
        pts.append(p)
        syms.append(s)
    return pts, syms


class OrbitResult(tuple):
    """Orbit points with an attached rigorous error bound.

    Behaves as the tuple (x_0, ..., x_n); ``error_bound`` is 0.0 on the
    exact backend and the accumulated ball radius (growing by a factor
    beta per step) on the ball backend.
    """

    error_bound: float
    precision_used: int

    def __new__(cls, points, error_bound: float, precision_used: int):
        self = super().__new__(cls, points)
        self.error_bound = error_bound
        self.precision_used = precision_used
        return self


def orbit(m: MapParams, x, n: int) -> OrbitResult:
    """Iterate the map n times from x; element 0 is x itself."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if m.backend == "ball":
        pts, rad, prec = _ball_orbit(m, x, n)
        return OrbitResult(pts, rad, prec)
    x = parse_scalar(x)
    pts = [x]
    for _ in range(n):
        x, _ = eval_map(m, x)
        pts.append(x)
    return OrbitResult(pts, 0.0, 0)


class _AmbiguousAtPrecision(Exception):
    pass


def _ball_step(m, x, rad, crit, eps):
    """One ball step; raises _AmbiguousAtPrecision when the ball straddles
    a branch boundary."""
    i = 1
    for c in crit:
        if abs(x - c) <= rad:
            raise _AmbiguousAtPrecision
        if x > c:
            i += 1
    slope = to_mpf(m.branch_slope(i), mpmath.mp.prec)
    off = to_mpf(m.branch_offset(i), mpmath.mp.prec)
    y = slope * x + off
    rad = abs(slope) * rad + eps * max(1, abs(y))
    return y, rad, i


def _ball_run(m, x0, n, prec):
    with mpmath.workprec(prec):
        eps = mpmath.mpf(2) ** (3 - prec)
        crit = [to_mpf(c, prec) for c in m.interior_criticals()]
        x, rad = to_mpf(parse_scalar(x0), prec), mpmath.mpf(2) ** (1 - prec)
        pts, syms = [float(x)], []
        for _ in range(n):
            x, rad, i = _ball_step(m, x, rad, crit, eps)
            if x < -rad or x > 1 + rad:
                raise _AmbiguousAtPrecision  # drifted outside [0,1]: precision artifact
            pts.append(float(x))
            syms.append(i)
        return pts, syms, float(rad)


def _ball_orbit(m, x0, n, want_symbols=False):
    """Run the ball backend with precision escalation (doubling to a cap)."""
    prec = m.precision_bits
    while True:
        try:
            pts, syms, rad = _ball_run(m, x0, n, prec)
            return (syms if want_symbols else pts), rad, prec
        except _AmbiguousAtPrecision:
            prec *= 2
            if prec > PRECISION_CAP:
                raise PrecisionExhausted(
                    f"orbit of {x0!r} cannot be separated from a critical point "
                    f"at {PRECISION_CAP} bits") from None
