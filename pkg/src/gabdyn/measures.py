"""Point-mass measures on [0,1]: empirical measures, W1 distance,
observable averages.

W1 is the integral of the absolute CDF difference, which metrizes weak*
convergence on [0,1] and is exactly computable for atomic measures.  A
prepared fixed-target variant scores many small candidate measures
against one large target in O(l log M) per candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import as_float
from .maps import MapParams, orbit

DITHER_BITS = 50


@dataclass(frozen=True)
class EmpiricalMeasure:
    """Sorted atoms (position in [0,1], weight > 0) with total weight 1."""

    positions: np.ndarray
    weights: np.ndarray

    @classmethod
    def from_points(cls, points, weights=None) -> "EmpiricalMeasure":
        pos = np.asarray([as_float(p) for p in points], dtype=float)
        w = (np.full(len(pos), 1.0 / len(pos)) if weights is None
             else np.asarray(weights, dtype=float))
        order = np.argsort(pos, kind="stable")
        pos, w = pos[order], w[order]
        # aggregate coincident atoms
        keep = np.concatenate(([True], np.diff(pos) > 0))
        idx = np.cumsum(keep) - 1
        agg = np.zeros(keep.sum())
        np.add.at(agg, idx, w)
        m = cls(positions=pos[keep], weights=agg / agg.sum())
        return m

    def __post_init__(self):
        assert abs(float(self.weights.sum()) - 1.0) < 1e-12
        assert np.all(np.diff(self.positions) >= 0)

    def __len__(self):
        return len(self.positions)

    def to_rows(self):
        return list(zip(self.positions.tolist(), self.weights.tolist()))


def _orbit_float(m: MapParams, x0: float, n: int, seed: int) -> np.ndarray:
    """Single float orbit with a seeded dither of one ulp-scale kick per
    step.  The dither keeps digit statistics faithful for maps whose
    branches are exactly representable in binary (beta = 2 orbits would
    otherwise collapse onto dyadic fixed points)."""
    f = m.float_data()
    crit = np.array(f["crit"][1:-1])
    slope = np.array(f["slope"])
    off = np.array(f["off"])
    rng = np.random.default_rng(seed)
    eps = 2.0 ** -DITHER_BITS
    out = np.empty(n)
    x = float(x0)
    for t in range(n):
        out[t] = x
        i = int(np.searchsorted(crit, x, side="right"))
        x = slope[i] * x + off[i] + eps * (rng.random() - 0.5)
        x = min(max(x, 0.0), 1.0)
    return out


def empirical_measure(m: MapParams, x0, n: int, engine: str = "auto",
                      seed: int = 0) -> EmpiricalMeasure:
    """Uniform measure on the first n orbit points of x0.

    ``engine="exact"`` iterates exactly (cheap for integer beta, where
    denominators stay bounded); ``engine="float"`` uses a seeded dithered
    float orbit suitable for long statistical runs.  ``auto`` picks exact
    for short runs or integer beta, float otherwise.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if engine == "auto":
        int_beta = isinstance(m.beta, Fraction) and m.beta.denominator == 1
        engine = "exact" if (int_beta or n <= 4096) and m.backend == "exact" else "float"
    if engine == "exact":
        pts = orbit(m, x0, n - 1)
        return EmpiricalMeasure.from_points(pts)
    return EmpiricalMeasure.from_points(_orbit_float(m, as_float(x0), n, seed))


def _cdf_arrays(mu: EmpiricalMeasure):
    return mu.positions, np.cumsum(mu.weights)


def _step_cdf(mu: EmpiricalMeasure, xs: np.ndarray) -> np.ndarray:
    cum = np.concatenate(([0.0], np.cumsum(mu.weights)))
    return cum[np.searchsorted(mu.positions, xs, side="right")]


def w1_distance(mu: EmpiricalMeasure, nu: EmpiricalMeasure) -> float:
    """Exact W1 distance: integral over [0,1] of |F_mu - F_nu|."""
    xs = np.union1d(mu.positions, nu.positions)
    f1 = _step_cdf(mu, xs)
    f2 = _step_cdf(nu, xs)
    widths = np.diff(np.concatenate((xs, [1.0])))
    return float(np.sum(np.abs(f1 - f2) * widths))


class W1Fixed:
    """W1 distance to one fixed target measure, prepared so that scoring
    a small candidate costs O(len(candidate) * log len(target)).

    On each segment where the candidate CDF is a constant c, the target
    CDF crosses level c at a single quantile, so the absolute-difference
    integral splits into two signed pieces computed from a prefix
    integral of the target CDF.
    """

    def __init__(self, target: EmpiricalMeasure):
        tx, tw = _cdf_arrays(target)
        self.knots = np.concatenate(([0.0], tx, [1.0]))   # segment boundaries
        self.fv = np.concatenate(([0.0], tw))             # F_target on each segment
        self.ci = np.concatenate(([0.0], np.cumsum(self.fv * np.diff(self.knots))))
        self.tw = tw
        self.tx = tx

    def _int_f(self, x: np.ndarray) -> np.ndarray:
        """Integral of the target CDF over [0, x]."""
        j = np.clip(np.searchsorted(self.knots, x, side="right") - 1, 0, len(self.fv) - 1)
        return self.ci[j] + self.fv[j] * (x - self.knots[j])

    def _quantile(self, c: np.ndarray) -> np.ndarray:
        """Smallest x with F_target(x) >= c (1.0 past the last level)."""
        return np.concatenate((self.tx, [1.0]))[np.searchsorted(self.tw, c, side="left")]

    def __call__(self, positions, weights) -> float:
        pos = np.asarray(positions, dtype=float)
        w = np.asarray(weights, dtype=float)
        order = np.argsort(pos, kind="stable")
        pos, w = pos[order], w[order]
        c = np.concatenate(([0.0], np.cumsum(w)))   # candidate CDF per segment
        c[-1] = 1.0
        lo = np.concatenate(([0.0], pos))
        hi = np.concatenate((pos, [1.0]))
        q = np.clip(self._quantile(c), lo, hi)
        int_lo, int_q, int_hi = self._int_f(lo), self._int_f(q), self._int_f(hi)
        below = c * (q - lo) - (int_q - int_lo)       # F_target <= c left of q
        above = (int_hi - int_q) - c * (hi - q)       # F_target >= c right of q
        return float(np.sum(np.abs(below) + np.abs(above)))


def observable_average(mu: EmpiricalMeasure, f) -> float:
    """Integral of f against the measure; f is a vectorizable callable."""
    vals = np.asarray(f(mu.positions), dtype=float)
    return float(np.sum(vals * mu.weights))


def cell_observable(m: MapParams, values):
    """Per-symbol observable as a function on [0,1]: x maps to
    values[cell(x) - 1] with the half-open cell convention."""
    crit = np.array(m.float_data()["crit"][1:-1])
    vals = np.asarray(values, dtype=float)

    def f(x):
        return vals[np.searchsorted(crit, np.asarray(x), side="right")]

    return f
