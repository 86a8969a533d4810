"""Itineraries, follower sets, and kneading data.

The coding map sends a point to the sequence of open cells its orbit
visits; points whose orbit hits a critical point have no itinerary.  The
kneading data consists of the itineraries of the one-sided limits at 0,
1, and each interior critical point.  After one step every critical
sequence lands on (0, right) or (1, left), so its shifted tail is the a-
or b-sequence; this structural fact is recomputed honestly here and
asserted, not assumed.

Follower sets are computed geometrically: the follower interval of a word
u is the image of its cylinder, and the followers are the cells whose
interior that interval meets.  Touching a cell at a single point does not
create a follower (matching the open-cell coding).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import AmbiguousCoding, PrecisionExhausted
from .maps import (LEFT, RIGHT, MapParams, SidedPoint, _ball_orbit, affine,
                   branch_of, branch_of_sided, eval_map, eval_sided)


@dataclass(frozen=True)
class Itinerary:
    """A finite itinerary; ``exact`` is False when the word was truncated
    because ball arithmetic could not separate an orbit point from a
    critical point."""

    word: tuple
    exact: bool = True

    def __len__(self):
        return len(self.word)


def itinerary(m: MapParams, x, n: int) -> Itinerary:
    """First n symbols of the coding of x.

    Raises AmbiguousCoding when the orbit hits a critical point exactly
    (exact backend); on the ball backend a shortened, inexact word is
    returned instead once precision escalation is exhausted.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    if m.backend == "ball":
        try:
            syms, _, _ = _ball_orbit(m, x, n, want_symbols=True)
            return Itinerary(tuple(syms), True)
        except PrecisionExhausted:
            syms = _ball_prefix(m, x, n)
            return Itinerary(tuple(syms), False)
    word = []
    for t in range(n):
        if x in m.criticals:
            raise AmbiguousCoding(f"orbit hits critical point {x} at step {t}")
        x, i = eval_map(m, x)
        word.append(i)
    return Itinerary(tuple(word), True)


def _ball_prefix(m: MapParams, x, n: int):
    """Longest itinerary prefix computable on the ball backend."""
    lo, hi = 0, n
    while lo < hi:  # largest n' whose full word resolves
        mid = (lo + hi + 1) // 2
        try:
            _ball_orbit(m, x, mid, want_symbols=True)
            lo = mid
        except PrecisionExhausted:
            hi = mid - 1
    syms, _, _ = _ball_orbit(m, x, lo, want_symbols=True) if lo else ([], 0, 0)
    return syms


@dataclass(frozen=True)
class KneadingData:
    """Kneading sequences of a map to a fixed depth.

    ``a``/``b`` are the itineraries of 0+ and 1-; ``crit_right[i]`` and
    ``crit_left[i]`` are the itineraries of c_i + 0 and c_i - 0 for
    interior critical points.  ``precision_used`` is 0 on the exact
    backend.
    """

    map: MapParams
    depth: int
    a: tuple
    b: tuple
    crit_right: dict = field(repr=False)
    crit_left: dict = field(repr=False)
    precision_used: int = 0
    complete: bool = True

    def sequence(self, line: str) -> tuple:
        if line == "a":
            return self.a
        if line == "b":
            return self.b
        raise ValueError(f"unknown line {line!r}")

    def adj(self, i: int, side: str):
        """The adjacent critical sequence: adj exchanges the two one-sided
        itineraries at c_i."""
        return self.crit_left[i] if side == RIGHT else self.crit_right[i]

    def to_json(self) -> dict:
        return {
            "a": list(self.a),
            "b": list(self.b),
            "crit_right": {str(i): list(w) for i, w in sorted(self.crit_right.items())},
            "crit_left": {str(i): list(w) for i, w in sorted(self.crit_left.items())},
            "depth": self.depth,
            "precision_used": self.precision_used,
        }


def _sided_symbols(m: MapParams, p: SidedPoint, depth: int):
    syms = []
    for _ in range(depth):
        p, s = eval_sided(m, p)
        syms.append(s)
    return tuple(syms)


def _sided_symbols_ball(m: MapParams, p: SidedPoint, depth: int):
    """Sided chain on the ball backend: the first step from an exact
    critical point is done exactly, the rest runs as a ball orbit."""
    q, s0 = eval_sided(m, p)
    if depth == 1:
        return (s0,), m.precision_bits
    syms, _, prec = _ball_orbit(m, q.value, depth - 1, want_symbols=True)
    return (s0, *syms), prec


def kneading_sequences(m: MapParams, depth: int) -> KneadingData:
    """Compute a, b, and all critical sequences to the given depth."""
    if depth < 1:
        raise ValueError("depth must be >= 1")
    starts = {"a": SidedPoint(Fraction(0), RIGHT), "b": SidedPoint(Fraction(1), LEFT)}
    crit_r = {i: SidedPoint(m.criticals[i], RIGHT) for i in range(1, m.k)}
    crit_l = {i: SidedPoint(m.criticals[i], LEFT) for i in range(1, m.k)}
    if m.backend == "ball":
        prec_used = m.precision_bits
        try:
            seqs = {}
            for key, p in {**starts, **{("r", i): p for i, p in crit_r.items()},
                           **{("l", i): p for i, p in crit_l.items()}}.items():
                syms, prec = _sided_symbols_ball(m, p, depth)
                prec_used = max(prec_used, prec)
                seqs[key] = syms
        except PrecisionExhausted as exc:
            raise PrecisionExhausted(
                f"kneading to depth {depth} exceeds the precision cap; "
                f"use the exact backend for Markov parameters") from exc
        return KneadingData(m, depth, seqs["a"], seqs["b"],
                            {i: seqs[("r", i)] for i in range(1, m.k)},
                            {i: seqs[("l", i)] for i in range(1, m.k)},
                            precision_used=prec_used)
    a = _sided_symbols(m, starts["a"], depth)
    b = _sided_symbols(m, starts["b"], depth)
    cr = {i: _sided_symbols(m, p, depth) for i, p in crit_r.items()}
    cl = {i: _sided_symbols(m, p, depth) for i, p in crit_l.items()}
    for i in range(1, m.k):
        assert cr[i][0] == i + 1 and cl[i][0] == i
        for w in (cr[i], cl[i]):
            tail = w[1:]
            assert tail == a[:len(tail)] or tail == b[:len(tail)], \
                "critical sequence tail must be a or b"
    return KneadingData(m, depth, a, b, cr, cl)


def _image_interval(m: MapParams, iv, cell: int):
    lo, hi = affine(m, cell, iv[0]), affine(m, cell, iv[1])
    return (hi, lo) if m.signs[cell - 1] < 0 else (lo, hi)


def _successor_interval(m: MapParams, iv, cell: int, nxt: int):
    """[nxt]-part of the image of a vertex interval living in ``cell``;
    None when the overlap has empty interior."""
    lo, hi = _image_interval(m, iv, cell)
    s_lo = max(lo, m.criticals[nxt - 1])
    s_hi = min(hi, m.criticals[nxt])
    if s_lo < s_hi:
        return (s_lo, s_hi)
    return None


def follower_interval(m: MapParams, u) -> tuple | None:
    """Interval of the follower set sigma^{|u|}[u]; None if u is not in
    the language."""
    if not u:
        return (Fraction(0), Fraction(1))
    cur = (m.criticals[u[0] - 1], m.criticals[u[0]])
    for t in range(1, len(u)):
        cur = _successor_interval(m, cur, u[t - 1], u[t])
        if cur is None:
            return None
    return _image_interval(m, cur, u[-1])


def followers(m: MapParams, u) -> set:
    """Follower set S(u): symbols i with u*i in the language.

    Empty iff u itself is not in the language.  Computed from the
    follower interval; a cell is a follower exactly when its interior
    meets that interval.
    """
    img = follower_interval(m, u)
    if img is None:
        return set()
    out = set()
    for l in range(1, m.k + 1):
        if max(img[0], m.criticals[l - 1]) < min(img[1], m.criticals[l]):
            out.add(l)
    return out


def in_language(m: MapParams, u) -> bool:
    return follower_interval(m, u) is not None


def signed_lex_key(m: MapParams, word):
    """Key tuple realizing the signed lexicographic order on itineraries:
    the coding map is order preserving on each branch under this key."""
    key, orient = [], 1
    for s in word:
        key.append(orient * s)
        orient *= m.signs[s - 1]
    return tuple(key)
