"""Periodic orbits, diagram cycles, shadowing witnesses, and periodic
approximation of measures.

``realize_periodic`` inverts the coding map on a periodic word: the word
fixes an affine branch composition with slope of modulus beta^l > 1, so
the candidate point is the unique fixed point; admissibility is then
checked, not assumed.

``hr_witness`` produces, for a cut index j on either kneading line, a
periodic symbolic point p and a word u contained both in the kneading
block between cut times and in one period of p, with
|u| >= R_j - R_m - N1.  Cases C, D, E use the explicit cycle recipes of
the classification; everything else falls back to a generic closure
search: run the kneading line from cut m to cut j, exit at any successor
of the branching vertex, and walk back to the start inside the
irreducible component.  Witness words come from diagram cycles, so they
are admissible by construction; each witness is re-verified by plain
substring search.
"""

from __future__ import annotations

from dataclasses import dataclass

import networkx as nx

from .analysis import IrreducibleComponent, distinguished_component
from .coding import KneadingData, kneading_sequences
from .diagram import (Classification, CutTimes, MarkovDiagram, _cell_interval,
                      _event_for, build_diagram, classify, cut_times)
from .errors import (BudgetExceeded, CriticalCollision, DepthExceeded,
                     NoWitnessInBudget, NotAdmissible)
from .maps import MapParams, affine, branch_of, eval_map
from .measures import EmpiricalMeasure, W1Fixed
from .arith import as_float


# ---------------------------------------------------------------------------
# realizing periodic words as orbits
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PeriodicOrbit:
    """An admissible periodic word together with its realized point orbit.

    The orbit is the unique fixed point of the word's branch composition;
    the multiplier is sign * beta^len(word) with |multiplier| > 1.
    """

    map: MapParams
    word: tuple
    points: tuple
    multiplier_sign: int

    def __len__(self):
        return len(self.word)

    def measure(self) -> EmpiricalMeasure:
        return EmpiricalMeasure.from_points(self.points)

    def multiplier_float(self) -> float:
        return self.multiplier_sign * as_float(self.map.beta) ** len(self.word)


def realize_periodic(m: MapParams, word) -> PeriodicOrbit:
    """Solve for the periodic orbit with the given itinerary.

    Raises NotAdmissible when the fixed point leaves [0,1] or its
    itinerary disagrees with the word, CriticalCollision when the orbit
    passes through an interior critical point.
    """
    word = tuple(int(s) for s in word)
    if not word:
        raise ValueError("word must be nonempty")
    if any(not 1 <= s <= m.k for s in word):
        raise NotAdmissible(f"symbols outside 1..{m.k}")
    slope, off = 1, 0
    for s in word:
        slope, off = m.branch_slope(s) * slope, m.branch_slope(s) * off + m.branch_offset(s)
    x0 = off / (1 - slope)
    pts = [x0]
    x = x0
    for s in word[:-1]:
        x = affine(m, s, x)
        pts.append(x)
    for t, (x, s) in enumerate(zip(pts, word)):
        if not 0 <= x <= 1:
            raise NotAdmissible(f"orbit point {t} leaves [0,1]")
        if x in m.criticals[1:-1]:
            raise CriticalCollision(f"orbit point {t} is a critical point")
        if branch_of(m, x) != s:
            raise NotAdmissible(f"itinerary mismatch at step {t}")
    closing = affine(m, word[-1], pts[-1])
    assert closing == x0
    return PeriodicOrbit(map=m, word=word, points=tuple(pts),
                         multiplier_sign=1 if slope > 0 else -1)


def min_rotation(word: tuple) -> tuple:
    """Lexicographically minimal rotation (canonical form of a cycle)."""
    best = word
    for i in range(1, len(word)):
        rot = word[i:] + word[:i]
        if rot < best:
            best = rot
    return best


# ---------------------------------------------------------------------------
# cycle enumeration
# ---------------------------------------------------------------------------

def enumerate_cycles(component: IrreducibleComponent, max_len: int, budget=None):
    """Vertex cycles of the component: all simple cycles up to max_len
    plus pairwise concatenations at a shared vertex, deduplicated by
    rotation.  Deterministic order (length, then vertex word).  Raises
    BudgetExceeded when more than ``budget`` cycles would be emitted."""
    if max_len <= 0:
        return []
    g = component.diagram.graph().subgraph(component.vids)
    simples = []
    for cyc in nx.simple_cycles(g, length_bound=max_len):
        simples.append(tuple(cyc))
    out = {min_rotation(c) for c in simples}
    for i, c1 in enumerate(simples):
        for c2 in simples[i:]:
            if len(c1) + len(c2) > max_len:
                continue
            shared = set(c1) & set(c2)
            if not shared:
                continue
            v = min(shared)
            r1 = c1[c1.index(v):] + c1[:c1.index(v)]
            r2 = c2[c2.index(v):] + c2[:c2.index(v)]
            out.add(min_rotation(r1 + r2))
    cycles = sorted(out, key=lambda c: (len(c), c))
    if budget is not None and len(cycles) > budget:
        raise BudgetExceeded(f"{len(cycles)} cycles exceed budget {budget}")
    return cycles


def cycle_words(component: IrreducibleComponent, max_len: int, budget=None):
    """Canonical symbol words of the component cycles."""
    dia = component.diagram
    words = {min_rotation(tuple(dia.vertices[v].symbol for v in cyc))
             for cyc in enumerate_cycles(component, max_len, budget)}
    return sorted(words, key=lambda w: (len(w), w))


# ---------------------------------------------------------------------------
# witness machinery (Hofbauer-Raith style shadowing)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HRWitness:
    """A shadowing witness for cut j: one period of a periodic symbolic
    word p, and a word u contained both in that period and in the
    kneading block x_{[R_m, R_j)}, with slack = |u| - (R_j - R_m - N1)."""

    side: str
    j: int
    m: int
    case: str
    method: str
    word: tuple          # one period of p
    u: tuple
    N0: int
    N1: int
    slack: int


@dataclass(frozen=True)
class WitnessContext:
    """Shared data for witness searches on one map: kneading, cut times,
    classification, a rules diagram, its distinguished component, and the
    constants m0, N0, n1, N1 of the default policy."""

    map: MapParams
    kneading: KneadingData
    cuts: CutTimes
    classification: Classification
    diagram: MarkovDiagram
    component: IrreducibleComponent
    m0: int
    N0: int
    n1: int
    N1: int

    def line_word(self, side: str):
        return self.kneading.sequence(side)


def _component_paths(ctx: WitnessContext):
    return ctx.diagram.graph().subgraph(ctx.component.vids)


def witness_context(m: MapParams, depth: int, N: int | None = None) -> WitnessContext:
    """Build the default witness context at the given kneading depth.

    N0 = max(R'_{m0}, S'_{m0}) for the smallest m0 whose branch-aligned
    cut times on both lines reach past the component entry index; N1 =
    N0 + n1 where n1 bounds return paths inside the component.
    """
    if N is None:
        N = max(4, depth - 2)
    kn = kneading_sequences(m, depth)
    cuts = cut_times(m, kn, depth)
    cls = classify(kn, cuts)
    dia = build_diagram(kn, cuts, N)
    comp = distinguished_component(dia)
    n0 = (comp.n0 if comp.n0 is not None else 0) + 1  # +1 covers the critical-set lines
    m0 = 0
    while m0 + 1 < min(len(cuts.Ra), len(cuts.Sb)) and \
            (cuts.Ra[m0] < n0 or cuts.Sb[m0] < n0):
        m0 += 1
    N0 = max(cuts.Ra[m0], cuts.Sb[m0])
    rounds = dia.rounds()
    comp_set = set(comp.vids)
    src = [v for v in comp.vids if rounds.get(v, 10 ** 9) <= n0]
    dst = [v for v in comp.vids if rounds.get(v, 10 ** 9) <= N0]
    sub = dia.graph().subgraph(comp_set)
    n1 = 1
    for s in src:
        lengths = nx.single_source_shortest_path_length(sub, s)
        for d in dst:
            if d in lengths:
                n1 = max(n1, lengths[d])
            else:
                n1 = max(n1, 1)
    return WitnessContext(map=m, kneading=kn, cuts=cuts, classification=cls,
                          diagram=dia, component=comp, m0=m0, N0=N0, n1=n1, N1=N0 + n1)


def _contains(hay: tuple, needle: tuple) -> bool:
    if not needle:
        return True
    n = len(needle)
    return any(hay[i:i + n] == needle for i in range(len(hay) - n + 1))


def verify_witness(ctx: WitnessContext, w: HRWitness) -> bool:
    """Independent re-check: substring containments and the length bound."""
    br = ctx.cuts.branch(w.side)
    block = ctx.line_word(w.side)[br[w.m]:br[w.j]]
    ok_len = len(w.u) >= br[w.j] - br[w.m] - w.N1
    return ok_len and _contains(block, w.u) and _contains(w.word, w.u)


def _mk_witness(ctx, side, j, m, case, method, word, u) -> HRWitness:
    br = ctx.cuts.branch(side)
    slack = len(u) - (br[j] - br[m] - ctx.N1)
    return HRWitness(side=side, j=j, m=m, case=case, method=method,
                     word=tuple(word), u=tuple(u), N0=ctx.N0, N1=ctx.N1, slack=slack)


def _line_vid(ctx, side: str, n: int):
    return ctx.diagram.line_vid.get(("A" if side == "a" else "B", n))


def _cell_successor_vid(ctx, side: str, j: int):
    """A full-cell successor of the branching vertex of cut j (case E/C
    ingredient); None when there is none inside the component."""
    ev = _event_for(ctx.map, side, ctx.cuts, j)
    cells = list(ev.middles)
    if ev.far_is_cell:
        cells.append(ev.far_symbol)
    if ev.cont_is_cell:
        cells.append(ev.cont_symbol)
    for c in sorted(set(cells)):
        vid = ctx.diagram.vid_of(_cell_interval(ctx.map, c))
        if vid is not None and vid in set(ctx.component.vids):
            return vid
    return None


def _path_symbols(ctx, src_vid: int, dst_vid: int):
    """Symbols along a shortest component path src .. dst, excluding the
    destination; None when unreachable."""
    sub = _component_paths(ctx)
    if src_vid not in sub or dst_vid not in sub:
        return None
    try:
        path = nx.shortest_path(sub, src_vid, dst_vid)
    except nx.NetworkXNoPath:
        return None
    return [ctx.diagram.vertices[v].symbol for v in path[:-1]], len(path) - 1


def _case_cde_witness(ctx, side: str, j: int, case: str):
    """Explicit constructions for cases C, D, E."""
    other = "b" if side == "a" else "a"
    own_br, oth_br = ctx.cuts.branch(side), ctx.cuts.branch(other)
    own_w, oth_w = ctx.line_word(side), ctx.line_word(other)
    pj = ctx.classification.link[side].get(j)
    if case == "E":
        start = _cell_successor_vid(ctx, side, j)
        tgt = _line_vid(ctx, side, own_br[ctx.m0])
        if start is None or tgt is None:
            return None
        got = _path_symbols(ctx, start, tgt)
        if got is None:
            return None
        tail, _ = got
        word = list(own_w[own_br[ctx.m0]:own_br[j]]) + tail
        mwit = max(ctx.m0, 1)
        u = own_w[own_br[mwit]:own_br[j]]
        return _mk_witness(ctx, side, j, mwit, case, "construction", word, u)
    if pj is None:
        return None
    if case == "C":
        if pj < 1 or oth_br[pj] <= oth_br[ctx.m0]:
            return None
        start = _cell_successor_vid(ctx, other, pj)
        tgt = _line_vid(ctx, other, oth_br[ctx.m0])
        if start is None or tgt is None:
            return None
        got = _path_symbols(ctx, start, tgt)
        if got is None:
            return None
        tail, _ = got
        word = list(oth_w[oth_br[ctx.m0]:oth_br[pj]]) + tail
        u = oth_w[oth_br[ctx.m0]:oth_br[pj]]
        return _mk_witness(ctx, side, j, j - 1, case, "construction", word, u)
    if case == "D":
        if pj + 1 >= len(oth_br):
            return None
        u_idx = oth_br[pj + 1] - oth_br[pj] - 1  # cut-arrow target index on the other line
        word = list(oth_w[oth_br[pj] + 1:oth_br[pj + 1]]) + list(oth_w[u_idx:oth_br[pj] + 1])
        u = oth_w[:oth_br[pj]]
        return _mk_witness(ctx, side, j, j - 1, case, "construction", word, u)
    return None


def _generic_witness(ctx, side: str, j: int, case: str, budget: int):
    """Close the kneading run from cut m to cut j into a diagram cycle:
    line arrows to the branching vertex, any exit arrow, shortest path
    home through the component.  u is the full kneading block, so the
    slack is exactly N1."""
    own_br = ctx.cuts.branch(side)
    own_w = ctx.line_word(side)
    attempts = 0
    best = None
    for m in range(j - 1, max(ctx.m0, 1) - 1, -1):
        start = _line_vid(ctx, side, own_br[m])
        branch_vid = _line_vid(ctx, side, own_br[j] - 1)
        if start is None or branch_vid is None:
            continue
        for succ in ctx.diagram.successors(branch_vid):
            attempts += 1
            if attempts > budget:
                raise NoWitnessInBudget(
                    f"no witness for {side}-cut {j} within {budget} attempts",
                    best_slack=best)
            got = _path_symbols(ctx, succ, start)
            if got is None:
                continue
            tail, _ = got
            word = list(own_w[own_br[m]:own_br[j]]) + tail
            u = own_w[own_br[m]:own_br[j]]
            wit = _mk_witness(ctx, side, j, m, case, "search", word, u)
            if verify_witness(ctx, wit):
                return wit
            best = wit.slack if best is None or wit.slack > best else best
    raise NoWitnessInBudget(f"no witness for {side}-cut {j}", best_slack=best)


def hr_witness(ctx: WitnessContext, j: int, side: str = "a",
               search_budget: int = 10_000,
               N0: int | None = None, N1: int | None = None):
    """Witness for cut j (branch-aligned) on the given line.

    Returns (witness, construction_witness or None): cases C/D/E also run
    their explicit construction so callers can check agreement with the
    generic search.  N0 and N1 default to the context's policy values.
    Raises DepthExceeded when j violates R_j > N0 or exceeds the computed
    cut range."""
    import dataclasses

    if N0 is not None or N1 is not None:
        ctx = dataclasses.replace(ctx, N0=ctx.N0 if N0 is None else N0,
                                  N1=ctx.N1 if N1 is None else N1)
    br = ctx.cuts.branch(side)
    if j < 1 or j >= len(br):
        raise DepthExceeded(f"cut {j} beyond computed range on line {side}")
    if br[j] <= ctx.N0:
        raise DepthExceeded(f"R_{j} = {br[j]} <= N0 = {ctx.N0}: witness not required")
    try:
        case = ctx.classification.case_of(side, j)
    except DepthExceeded:
        case = "?"
    constructed = None
    if case in ("C", "D", "E"):
        constructed = _case_cde_witness(ctx, side, j, case)
        if constructed is not None and not verify_witness(ctx, constructed):
            constructed = None
    searched = _generic_witness(ctx, side, j, case, search_budget)
    return searched, constructed


# ---------------------------------------------------------------------------
# periodic approximation of measures (density of periodic measures)
# ---------------------------------------------------------------------------

def _shadow_words(m: MapParams, target: EmpiricalMeasure, max_len: int, limit: int):
    """Candidate periodic words read off the target's own atoms: each atom
    is an orbit point, so its forward itinerary windows shadow the
    empirical measure."""
    crit = m.float_data()["crit"][1:-1]
    slope = m.float_data()["slope"]
    off = m.float_data()["off"]
    words = []
    stride = max(1, len(target.positions) // max(1, limit))
    for x in target.positions[::stride][:limit]:
        w = []
        for _ in range(max_len):
            i = 0
            for c in crit:
                if x >= c:
                    i += 1
            w.append(i + 1)
            x = slope[i] * x + off[i]
            if not 0.0 <= x <= 1.0:
                x = min(max(x, 0.0), 1.0)
        words.append(tuple(w))
    return words


def approximate_by_periodic(m: MapParams, target: EmpiricalMeasure, max_len: int,
                            budget: int = 100_000,
                            component: IrreducibleComponent | None = None):
    """Best periodic-orbit approximation of the target in W1 distance.

    Candidates are canonical rotations of (a) diagram cycles up to
    max_len and (b) prefixes of itinerary windows read off the target's
    atoms; each admissible candidate is realized exactly and scored.  The
    candidate stream is ordered by (length, word), so results are
    monotone in max_len under a fixed budget.  Raises BudgetExceeded when
    no admissible candidate exists within the budget.
    """
    scorer = W1Fixed(target)
    candidates = set()
    if component is not None:
        try:
            for w in cycle_words(component, max_len, budget=budget):
                candidates.add(w)
        except BudgetExceeded:
            pass
    for w in _shadow_words(m, target, max_len, limit=max(8, budget // (4 * max(1, max_len)))):
        for cut in range(1, len(w) + 1):
            candidates.add(min_rotation(w[:cut]))
    best = None
    scored = 0
    for word in sorted(candidates, key=lambda w: (len(w), w)):
        if scored >= budget:
            break
        scored += 1
        try:
            po = realize_periodic(m, word)
        except NotAdmissible:
            continue
        mu = po.measure()
        dist = scorer(mu.positions, mu.weights)
        if best is None or (dist, word) < (best[1], best[0].word):
            best = (po, dist)
    if best is None:
        raise BudgetExceeded(f"no admissible periodic word within budget {budget}")
    return best
