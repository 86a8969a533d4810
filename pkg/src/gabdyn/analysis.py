"""Graph and spectral analysis of truncated Markov diagrams.

Strongly connected components, topological entropy as the log Perron root
of the component adjacency matrix, the measure of maximal entropy pushed
to [0,1], and the pressure of symbol-weighted shifts.

The MME construction exploits a structural fact of constant-slope maps:
on the (infinite) irreducible diagram the vector of vertex-interval
lengths is a right Perron eigenvector with eigenvalue beta, which forces
the projected conditional measure on each vertex interval to be uniform.
The projected density is therefore sum_C u_C 1_{J_C} (left Perron vector
u), normalized; on a truncation this converges from within and is exact
whenever the diagram is finite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .arith import as_float
from .diagram import MarkovDiagram
from .errors import NoComponentFound, NonConvergence

POWER_ITERATION_CAP = 100_000


@dataclass(frozen=True)
class IrreducibleComponent:
    """A strongly connected vertex set of a truncated diagram."""

    diagram: MarkovDiagram
    vids: tuple
    closed: bool            # no arrow leaves the component (within the truncation)
    n0: int | None          # smallest n with A_n and B_n both inside
    deepest: int | None     # largest line index represented inside
    contains_deep: bool

    def size(self) -> int:
        return len(self.vids)

    def adjacency(self) -> np.ndarray:
        idx = {v: i for i, v in enumerate(self.vids)}
        mat = np.zeros((len(self.vids), len(self.vids)))
        for a, b in self.diagram.arrows:
            if a in idx and b in idx:
                mat[idx[a], idx[b]] = 1.0
        return mat

    def intervals(self):
        return [self.diagram.vertices[v].interval() for v in self.vids]

    def symbols(self):
        return [self.diagram.vertices[v].symbol for v in self.vids]


def _line_membership(diagram: MarkovDiagram, vset):
    """(n0, deepest) over the line vertices of a rules-built diagram."""
    per_line = {}
    for (line, n), vid in diagram.line_vid.items():
        per_line.setdefault(line, {})[n] = vid in vset
    if set(per_line) != {"A", "B"}:
        return None, None
    n0 = None
    deepest = None
    max_n = min(max(d) for d in per_line.values())
    for n in range(max_n + 1):
        if per_line["A"].get(n) and per_line["B"].get(n):
            if n0 is None:
                n0 = n
            deepest = n
    return n0, deepest


def scc_irreducible(diagram: MarkovDiagram):
    """Strongly connected components, distinguished one first.

    The distinguished component is the closed component containing line
    vertices of the largest index the truncation admits; raises
    NoComponentFound when no component contains both lines.
    """
    import networkx as nx

    comps = []
    for scc in nx.strongly_connected_components(diagram.graph()):
        vset = frozenset(scc)
        closed = all(b in vset for a, b in diagram.arrows if a in vset)
        n0, deepest = _line_membership(diagram, vset)
        comps.append(IrreducibleComponent(
            diagram=diagram, vids=tuple(sorted(vset)), closed=closed,
            n0=n0, deepest=deepest,
            contains_deep=n0 is not None and deepest is not None and deepest >= n0))
    # deepest line coverage first, then size; stable deterministic order
    comps.sort(key=lambda c: (-(c.deepest if c.deepest is not None else -1), -len(c.vids),
                              c.vids))
    return comps


def distinguished_component(diagram: MarkovDiagram) -> IrreducibleComponent:
    comps = scc_irreducible(diagram)
    if not comps or comps[0].deepest is None:
        raise NoComponentFound("no component contains both kneading lines; "
                               "increase the truncation depth N")
    return comps[0]


@dataclass(frozen=True)
class SpectralResult:
    value: float            # log Perron root
    eigenvector: np.ndarray
    left_eigenvector: np.ndarray
    truncation: int
    residual: float
    iterations: int


def _perron(mat: np.ndarray, tolerance: float) -> tuple:
    """Dominant eigenpair of a nonnegative matrix by shifted power
    iteration (the +I shift removes rotating eigenvalues on periodic
    graphs without moving the eigenvector)."""
    n = mat.shape[0]
    shifted = mat + np.eye(n)
    v = np.full(n, 1.0 / n)
    lam = 1.0
    for it in range(1, POWER_ITERATION_CAP + 1):
        w = shifted @ v
        norm = w.max()
        if norm == 0:
            return 0.0, v, 0.0, it
        v = w / norm
        lam = norm - 1.0
        resid = float(np.abs(mat @ v - lam * v).max() / max(v.max(), 1e-300))
        if resid < tolerance:
            return lam, v, resid, it
    raise NonConvergence(
        f"power iteration residual {resid:.3e} above {tolerance:.3e} "
        f"after {POWER_ITERATION_CAP} iterations")


def entropy_estimate(component: IrreducibleComponent,
                     tolerance: float = 1e-12) -> SpectralResult:
    """log of the Perron root of the component adjacency matrix.

    Approximates h_top from below; nondecreasing under nested truncations
    and converging to log beta for transitive constant-slope maps.
    """
    if not component.vids:
        raise NoComponentFound("empty component")
    mat = component.adjacency()
    lam, v, resid, it = _perron(mat, tolerance)
    lam_l, u, resid_l, it_l = _perron(mat.T, tolerance)
    value = math.log(lam) if lam > 0 else float("-inf")
    return SpectralResult(value=value, eigenvector=v, left_eigenvector=u,
                          truncation=component.diagram.N,
                          residual=max(resid, resid_l), iterations=max(it, it_l))


@dataclass(frozen=True)
class MMEHistogram:
    """Projected measure of maximal entropy, binned on [0,1]."""

    edges: tuple
    masses: tuple
    pieces: tuple           # (lo, hi, weight) density pieces, weights exact-area-normalized
    entropy: float

    def to_rows(self):
        return [(self.edges[i], self.edges[i + 1], self.masses[i])
                for i in range(len(self.masses))]


def mme_density_pieces(component: IrreducibleComponent,
                       spectral: SpectralResult | None = None,
                       tolerance: float = 1e-12):
    """Density of the projected MME as weighted indicator pieces
    (one per component vertex, weight u_C / Z on its interval)."""
    if spectral is None:
        spectral = entropy_estimate(component, tolerance)
    u = spectral.left_eigenvector
    ivs = component.intervals()
    z = sum(float(u[i]) * (as_float(hi) - as_float(lo)) for i, (lo, hi) in enumerate(ivs))
    return [(lo, hi, float(u[i]) / z) for i, (lo, hi) in enumerate(ivs)]


def mme_estimate(component: IrreducibleComponent, bins: int,
                 tolerance: float = 1e-12) -> MMEHistogram:
    """Stationary MME pushed to [0,1] through vertex intervals, reported
    as a histogram with ``bins`` uniform cells (total mass 1)."""
    spectral = entropy_estimate(component, tolerance)
    pieces = mme_density_pieces(component, spectral)
    edges = [Fraction(i, bins) for i in range(bins + 1)]
    masses = np.zeros(bins)
    for lo, hi, w in pieces:
        flo, fhi = as_float(lo), as_float(hi)
        i0 = max(0, min(bins - 1, math.floor(flo * bins)))
        i1 = max(0, min(bins - 1, math.ceil(fhi * bins) - 1))
        for i in range(i0, i1 + 1):
            blo, bhi = i / bins, (i + 1) / bins
            overlap = min(fhi, bhi) - max(flo, blo)
            if overlap > 0:
                masses[i] += w * overlap
    total = masses.sum()
    if total > 0:
        masses /= total
    return MMEHistogram(edges=tuple(float(e) for e in edges), masses=tuple(masses),
                        pieces=tuple(pieces), entropy=spectral.value)


def pressure(component: IrreducibleComponent, observable, t: float,
             tolerance: float = 1e-12) -> float:
    """log Perron root of the arrow matrix weighted by
    exp(t * observable[symbol of target vertex]); equals the entropy at
    t = 0.  ``observable`` maps symbols 1..k to reals (sequence)."""
    idx = {v: i for i, v in enumerate(component.vids)}
    syms = component.symbols()
    mat = np.zeros((len(idx), len(idx)))
    for a, b in component.diagram.arrows:
        if a in idx and b in idx:
            mat[idx[a], idx[b]] = math.exp(t * observable[syms[idx[b]] - 1])
    lam, _, _, _ = _perron(mat, tolerance)
    if lam <= 0:
        raise NonConvergence("weighted Perron root vanished")
    return math.log(lam)
