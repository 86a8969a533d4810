"""Hofbauer Markov diagrams, cut times, and the branch classification.

The diagram is built two independent ways and cross-checked:

* :func:`build_diagram` follows the combinatorial rules: line arrows
  ``A_n -> A_{n+1}``, a cut arrow from each branching vertex to a vertex
  of the line named by the classification, full-cell arrows for the
  middle pieces of a branching image, and base-cell arrows to every
  depth-0 cell.  Intervals are used only to merge set-equal vertices.
* :func:`build_diagram_interval` ignores all of that and just closes the
  depth-0 cells under interval successors ``D = [l] /\\ T(C)`` for N
  rounds.

Cut-time bookkeeping uses two aligned index systems.  The *literal*
sequence follows the defining recursion ``R_{m+1} = min{n > R_m :
#S(x_{[0,n-1)}) >= 2}`` (so R_1 = 1 always, via the empty word whose
follower set is the whole alphabet).  The *branch-aligned* sequence
``R'_m = R_{m+1} - 1`` indexes the actual branching vertices
``A_{R'_m - 1}``; every structural statement (arrows, subword identities,
the P/Q maps, shadowing witnesses) lives in branch-aligned indices, which
is the only alignment under which those identities close.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction

import networkx as nx

from .arith import as_float, scalar_str
from .coding import KneadingData
from .errors import DepthExceeded, InsufficientKneadingDepth, NotAPath
from .maps import LEFT, RIGHT, MapParams, SidedPoint, affine, branch_of_sided, eval_sided

LINES = ("a", "b")


# ---------------------------------------------------------------------------
# line engine: vertex intervals along the a- and b-lines
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _LineState:
    """Interval of one line vertex.  The moving endpoint (the kneading
    orbit point) sits at ``lo`` when mov_at == "lo", pointing right, or at
    ``hi`` pointing left; the other endpoint is the anchor."""

    lo: object
    hi: object
    mov_at: str
    cell: int

    def anchor(self) -> SidedPoint:
        if self.mov_at == "lo":
            return SidedPoint(self.hi, LEFT)
        return SidedPoint(self.lo, RIGHT)

    def interval(self):
        return (self.lo, self.hi)


@dataclass(frozen=True)
class _BranchEvent:
    """One branching of a line vertex: the image of vertex ``v`` spans
    critical points, splitting into a continuation piece, a far piece
    (the cut-arrow target), and full-cell middle pieces."""

    v: int
    followers: tuple
    cont_symbol: int
    far_symbol: int
    far_interval: tuple
    middles: tuple
    cont_is_cell: bool
    far_is_cell: bool


def _initial_state(m: MapParams, side: str) -> _LineState:
    if side == "a":
        return _LineState(Fraction(0), m.criticals[1], "lo", 1)
    return _LineState(m.criticals[m.k - 1], Fraction(1), "hi", m.k)


def _cell_of(m: MapParams, lo) -> int:
    return branch_of_sided(m, SidedPoint(lo, RIGHT))


def _is_cell(m: MapParams, piece, cell: int) -> bool:
    return piece[0] == m.criticals[cell - 1] and piece[1] == m.criticals[cell]


def _step(m: MapParams, st: _LineState, v: int):
    """Map one line vertex forward; returns (next state, event or None)."""
    flip = m.signs[st.cell - 1] < 0
    y0, y1 = affine(m, st.cell, st.lo), affine(m, st.cell, st.hi)
    img = (y1, y0) if flip else (y0, y1)
    mov_at = ({"lo": "hi", "hi": "lo"}[st.mov_at]) if flip else st.mov_at
    spanned = [c for c in m.interior_criticals() if img[0] < c < img[1]]
    if not spanned:
        cell = _cell_of(m, img[0])
        return _LineState(img[0], img[1], mov_at, cell), None
    bounds = [img[0], *spanned, img[1]]
    pieces = list(zip(bounds, bounds[1:]))
    cells = [_cell_of(m, p[0]) for p in pieces]
    if mov_at == "lo":
        cont, far = 0, len(pieces) - 1
    else:
        cont, far = len(pieces) - 1, 0
    middles = tuple(cells[i] for i in range(len(pieces)) if i not in (cont, far))
    event = _BranchEvent(
        v=v,
        followers=tuple(sorted(cells)),
        cont_symbol=cells[cont],
        far_symbol=cells[far],
        far_interval=pieces[far],
        middles=middles,
        cont_is_cell=_is_cell(m, pieces[cont], cells[cont]),
        far_is_cell=_is_cell(m, pieces[far], cells[far]),
    )
    nxt = _LineState(pieces[cont][0], pieces[cont][1], mov_at, cells[cont])
    return nxt, event


_LINE_CACHE: dict = {}


def line_data(m: MapParams, side: str, depth: int):
    """States 0..depth and branch events (v < depth) of one line, cached
    and extended on demand."""
    states, events = _LINE_CACHE.setdefault((m, side), ([_initial_state(m, side)], []))
    while len(states) <= depth:
        nxt, ev = _step(m, states[-1], len(states) - 1)
        states.append(nxt)
        if ev is not None:
            events.append(ev)
    return states, events


def _events_upto(events, vmax: int):
    return [e for e in events if e.v <= vmax]


# ---------------------------------------------------------------------------
# cut times
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CutTimes:
    """Cut times of both kneading lines, to word depth ``depth``.

    ``R``/``S`` are the literal sequences of the defining recursion
    (R_0 = 0, R_1 = 1, then one entry per branching); ``Ra``/``Sb`` are
    the branch-aligned sequences R'_m = R_{m+1} - 1 whose entries point at
    the branching vertices A_{R'_m - 1} / B_{S'_m - 1}.  ``partial`` is
    True because deeper cuts may always exist past the scan depth.
    """

    map: MapParams
    depth: int
    R: tuple
    S: tuple
    Ra: tuple
    Sb: tuple
    partial: bool = True

    def literal(self, side: str) -> tuple:
        return self.R if side == "a" else self.S

    def branch(self, side: str) -> tuple:
        return self.Ra if side == "a" else self.Sb

    def diff_br(self, side: str, m: int):
        """Branch-aligned first difference r'_m (m >= 1)."""
        arr = self.branch(side)
        if m < 1 or m >= len(arr):
            raise DepthExceeded(f"branch-aligned cut {m} on line {side} not computed")
        return arr[m] - arr[m - 1]

    def num_events(self, side: str) -> int:
        return len(self.branch(side)) - 1


def cut_times(m: MapParams, kneading: KneadingData | None, depth: int) -> CutTimes:
    """Detect all cut times with R_m <= depth on both lines.

    The follower-count test runs geometrically: vertex ``v`` branches
    exactly when its image interval spans a critical point, which is the
    condition #S(x_{[0,v+1)}) >= 2 at n = v + 2.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    lit, br = {}, {}
    for side in LINES:
        _, events = line_data(m, side, depth)
        evs = _events_upto(events, depth - 2)
        lit[side] = (0, 1, *[e.v + 2 for e in evs])
        br[side] = (0, *[e.v + 1 for e in evs])
    return CutTimes(map=m, depth=depth, R=lit["a"], S=lit["b"],
                    Ra=br["a"], Sb=br["b"])


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

def _event_for(m: MapParams, side: str, cuts: CutTimes, mm: int) -> _BranchEvent:
    _, events = line_data(m, side, cuts.depth)
    evs = _events_upto(events, cuts.depth - 2)
    if mm < 1 or mm > len(evs):
        raise DepthExceeded(f"no branch event {mm} on line {side} within depth")
    return evs[mm - 1]


def _tail_of_event(m: MapParams, side: str, cuts: CutTimes, mm: int) -> str:
    """Which kneading line the cut arrow of branch event ``mm`` targets.

    This is sigma(f_m) of the classification: the anchor of the vertex at
    the previous branch-aligned cut time is a critical-set point, and its
    image is (0, right) or (1, left)."""
    states, _ = line_data(m, side, cuts.depth)
    st = states[cuts.branch(side)[mm - 1]]
    anchor = st.anchor()
    assert anchor.value in m.criticals[1:-1], "anchor must be an interior critical point"
    q, _ = eval_sided(m, anchor)
    if q.value == 0 and q.side == RIGHT:
        return "a"
    if q.value == 1 and q.side == LEFT:
        return "b"
    raise AssertionError("critical-set point does not land on a kneading start")


@dataclass
class Classification:
    """Branch classes, the P/Q index maps, and the case labels, all in
    branch-aligned indices.

    ``cls[side][m]`` is 1 when the cut arrow targets the a-line (classes
    A1/B1) and 2 for the b-line (A2/B2).  ``link[side][m]`` is the index q
    with r'_m - 1 equal to the q-th branch-aligned cut time of the target
    line (the maps P and Q); None when the scan depth cannot certify it.
    ``case[side][j]`` is one of "A".."F" or None when undecidable at this
    depth.
    """

    map: MapParams
    depth: int
    cls: dict
    in3: dict
    link: dict
    case: dict
    violations: list = field(default_factory=list)

    @property
    def P(self) -> dict:
        return {mm: q for mm, q in self.link["a"].items()
                if self.cls["a"][mm] == 2 and q is not None}

    @property
    def Q(self) -> dict:
        return {mm: q for mm, q in self.link["b"].items()
                if self.cls["b"][mm] == 1 and q is not None}

    def class_name(self, side: str, mm: int) -> str:
        base = "A" if side == "a" else "B"
        return f"{base}{self.cls[side][mm]}"

    def case_of(self, side: str, j: int) -> str:
        c = self.case[side].get(j)
        if c is None:
            raise DepthExceeded(f"case of {side}-cut {j} needs deeper data")
        return c


def classify(kneading: KneadingData, cuts: CutTimes) -> Classification:
    """Classify every branch event available at the cut-time depth."""
    m = kneading.map
    cls, in3, link = {}, {}, {}
    violations = []
    for side in LINES:
        n = cuts.num_events(side)
        cls[side], in3[side], link[side] = {}, {}, {}
        for mm in range(1, n + 1):
            tail = _tail_of_event(m, side, cuts, mm)
            cls[side][mm] = 1 if tail == "a" else 2
            ev = _event_for(m, side, cuts, mm)
            in3[side][mm] = bool(ev.middles) or ev.far_is_cell or ev.cont_is_cell
            target = cuts.branch("a" if tail == "a" else "b")
            val = cuts.diff_br(side, mm) - 1
            q = bisect.bisect_left(target, val)
            if q < len(target) and target[q] == val:
                link[side][mm] = q
            elif val > target[-1]:
                link[side][mm] = None  # not certifiable at this depth
            else:
                link[side][mm] = None
                violations.append((side, mm, val))
    case = {side: _cases(side, cls, in3, link, cuts) for side in LINES}
    return Classification(map=m, depth=cuts.depth, cls=cls, in3=in3,
                          link=link, case=case, violations=violations)


def _cases(side: str, cls, in3, link, cuts: CutTimes) -> dict:
    """Case labels following the decomposition N = A1 u A2^(1..3) u A3 u A4
    (mirrored for the b-line by swapping the roles of the two lines)."""
    other = "b" if side == "a" else "a"
    own = 1 if side == "a" else 2          # class value meaning "returns to own line"
    out = {}
    for j in sorted(cls[side]):
        if cls[side][j] == own:
            out[j] = "A"
            continue
        if in3[side][j]:
            out[j] = "E"
            continue
        pj = link[side][j]
        nxt = cls[side].get(j + 1)
        if nxt is None:
            out[j] = None
            continue
        if nxt == own:
            out[j] = "B"
            continue
        if pj is None:
            out[j] = None
            continue
        if pj >= 1 and pj not in in3[other]:
            out[j] = None  # event P(j) on the other line is beyond depth
            continue
        if pj >= 1 and in3[other][pj]:
            out[j] = "C"
            continue
        nxt_other = cls[other].get(pj + 1)
        if nxt_other is None:
            out[j] = None
        elif nxt_other == (2 if side == "a" else 1):
            out[j] = "D"
        else:
            out[j] = "F"
    return out


# ---------------------------------------------------------------------------
# the diagram
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Vertex:
    """One merged diagram vertex: a closed subinterval of a cell."""

    vid: int
    lo: object
    hi: object
    symbol: int
    tags: tuple

    def interval(self):
        return (self.lo, self.hi)

    def label(self) -> str:
        tag = ",".join(self.tags[:3]) + ("..." if len(self.tags) > 3 else "")
        return f"{tag} [{as_float(self.lo):.6g},{as_float(self.hi):.6g}]"


class MarkovDiagram:
    """A truncated Markov diagram with set-equal vertices merged.

    Vertices are canonically ordered by interval, so two diagrams over the
    same map agree iff their :meth:`signature` values agree.  Immutable
    once built.
    """

    def __init__(self, m: MapParams, N: int, interval_tags: dict, arrows, builder: str):
        self.map = m
        self.N = N
        self.builder = builder
        ivs = sorted(interval_tags)
        self._vid = {iv: i for i, iv in enumerate(ivs)}
        self.vertices = [
            Vertex(vid=i, lo=iv[0], hi=iv[1],
                   symbol=branch_of_sided(m, SidedPoint(iv[0], RIGHT)),
                   tags=tuple(interval_tags[iv]))
            for i, iv in enumerate(ivs)
        ]
        self.arrows = frozenset((self._vid[a], self._vid[b]) for a, b in arrows)
        self.line_vid = {}
        for v in self.vertices:
            for t in v.tags:
                if t[0] in ("A", "B") and t[1:].isdigit():
                    self.line_vid[(t[0], int(t[1:]))] = v.vid
        self._graph = None

    # -- queries ------------------------------------------------------------

    def vid_of(self, interval):
        return self._vid.get(interval)

    def successors(self, vid: int):
        return sorted(b for a, b in self.arrows if a == vid)

    def cell_vids(self):
        m = self.map
        return [self._vid[(m.criticals[i - 1], m.criticals[i])] for i in range(1, m.k + 1)]

    def graph(self) -> nx.DiGraph:
        if self._graph is None:
            g = nx.DiGraph()
            g.add_nodes_from(range(len(self.vertices)))
            g.add_edges_from(sorted(self.arrows))
            self._graph = g
        return self._graph

    def rounds(self) -> dict:
        """BFS round at which each vertex is reached from the depth-0
        cells (membership in the sets D_n)."""
        dist = {v: 0 for v in self.cell_vids()}
        frontier = list(dist)
        r = 0
        while frontier:
            r += 1
            nxt = []
            for v in frontier:
                for w in self.successors(v):
                    if w not in dist:
                        dist[w] = r
                        nxt.append(w)
            frontier = nxt
        return dist

    def signature(self):
        return (tuple(v.interval() for v in self.vertices), tuple(sorted(self.arrows)))

    # -- output -------------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "N": self.N,
            "builder": self.builder,
            "vertices": [
                {"id": v.vid, "lo": scalar_str(v.lo), "hi": scalar_str(v.hi),
                 "lo_float": as_float(v.lo), "hi_float": as_float(v.hi),
                 "symbol": v.symbol, "tags": list(v.tags)}
                for v in self.vertices
            ],
            "arrows": [list(a) for a in sorted(self.arrows)],
        }

    def to_dot(self) -> str:
        lines = ["digraph markov {", "  rankdir=LR;"]
        for v in self.vertices:
            lines.append(f'  v{v.vid} [label="{v.label()}"];')
        for a, b in sorted(self.arrows):
            lines.append(f"  v{a} -> v{b};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def _cell_interval(m: MapParams, i: int):
    return (m.criticals[i - 1], m.criticals[i])


def build_diagram(kneading: KneadingData, cuts: CutTimes, N: int) -> MarkovDiagram:
    """Combinatorial construction: line vertices 0..N on both lines plus
    base cells, with rule-generated arrows, merged by interval equality."""
    m = kneading.map
    if cuts.depth < N + 2:
        raise InsufficientKneadingDepth(
            f"cut times to depth {cuts.depth} cannot support diagram depth {N}")
    interval_tags: dict = {}
    arrows = set()

    def add_vertex(iv, tag):
        interval_tags.setdefault(iv, []).append(tag)

    states = {}
    for side, name in (("a", "A"), ("b", "B")):
        st, _ = line_data(m, side, N + 1)
        states[side] = st
        for n in range(N + 1):
            add_vertex(st[n].interval(), f"{name}{n}")
    for i in range(2, m.k):
        add_vertex(_cell_interval(m, i), f"cell{i}")

    # line arrows, including the boundary arrow when A_{N+1} merges into
    # an existing vertex
    for side in LINES:
        st = states[side]
        for n in range(N + 1):
            tgt = st[n + 1].interval()
            if n + 1 > N and tgt not in interval_tags:
                continue
            arrows.add((st[n].interval(), tgt))

    # cut arrows and middle-cell arrows from each branching vertex
    for side in LINES:
        _, events = line_data(m, side, cuts.depth)
        tail_states = states
        br = cuts.branch(side)
        for mm, ev in enumerate(_events_upto(events, cuts.depth - 2), start=1):
            if ev.v > N:
                break
            tail = _tail_of_event(m, side, cuts, mm)
            tgt_idx = ev.v - br[mm - 1]  # r'_m - 1
            src = states[side][ev.v].interval()
            arrows.add((src, tail_states[tail][tgt_idx].interval()))
            for l in ev.middles:
                arrows.add((src, _cell_interval(m, l)))

    # base cells map onto everything at depth 0
    for i in range(2, m.k):
        for l in range(1, m.k + 1):
            arrows.add((_cell_interval(m, i), _cell_interval(m, l)))

    return MarkovDiagram(m, N, interval_tags, arrows, builder="rules")


def _interval_successors(m: MapParams, iv, cell: int):
    lo, hi = affine(m, cell, iv[0]), affine(m, cell, iv[1])
    if m.signs[cell - 1] < 0:
        lo, hi = hi, lo
    out = []
    for l in range(1, m.k + 1):
        s_lo, s_hi = max(lo, m.criticals[l - 1]), min(hi, m.criticals[l])
        if s_lo < s_hi:
            out.append(((s_lo, s_hi), l))
    return out


def build_diagram_interval(m: MapParams, N: int) -> MarkovDiagram:
    """Independent oracle construction: close the depth-0 cells under
    interval successors for N rounds (no kneading or cut-time input)."""
    interval_tags: dict = {}
    cells = {}
    for i in range(1, m.k + 1):
        iv = _cell_interval(m, i)
        interval_tags[iv] = [f"D0.{i}"]
        cells[iv] = i
    arrows = set()
    frontier = list(cells)
    known = dict(cells)
    for rnd in range(1, N + 1):
        nxt = []
        for iv in frontier:
            for succ, l in _interval_successors(m, iv, known[iv]):
                arrows.add((iv, succ))
                if succ not in known:
                    known[succ] = l
                    interval_tags[succ] = [f"D{rnd}"]
                    nxt.append(succ)
        frontier = nxt
    # boundary vertices keep only arrows into the truncation
    for iv in frontier:
        for succ, _ in _interval_successors(m, iv, known[iv]):
            if succ in known:
                arrows.add((iv, succ))
    return MarkovDiagram(m, N, interval_tags, arrows, builder="interval")


def diagrams_equal(d1: MarkovDiagram, d2: MarkovDiagram) -> bool:
    return d1.signature() == d2.signature()


def project_path(diagram: MarkovDiagram, vids) -> tuple:
    """Project a vertex path to its symbol word; checks every pair is an
    arrow."""
    vids = list(vids)
    for a, b in zip(vids, vids[1:]):
        if (a, b) not in diagram.arrows:
            raise NotAPath(f"{a} -> {b} is not an arrow")
    return tuple(diagram.vertices[v].symbol for v in vids)


# ---------------------------------------------------------------------------
# the lexicographic diagnostic for case F
# ---------------------------------------------------------------------------

FIRST_HOLDS = "FirstHolds"
SECOND_HOLDS = "SecondHolds"
BOTH = "Both"
UNDETERMINED = "Undetermined"


def _lex_gt_const(const: int, seq) -> str | None:
    """Does const^infinity lexicographically exceed the sequence?  True /
    False on the first differing term, None when the scan is equal
    throughout."""
    for x in seq:
        if const > x:
            return True
        if const < x:
            return False
    return None


def lex_condition(classification: Classification, cuts: CutTimes, j: int,
                  horizon: int, side: str = "a") -> str:
    """Finite-depth check of the case-F dichotomy: the constant sequence
    S'_{P(j)} must dominate the forward r-differences, or R'_j must
    dominate the forward s-differences (strict lexicographic order).

    Returns FirstHolds / SecondHolds / Both / Undetermined; raises
    DepthExceeded when fewer than ``horizon`` comparison terms are
    available and none of them decided the order.
    """
    other = "b" if side == "a" else "a"
    own, oth = cuts.branch(side), cuts.branch(other)
    pj = classification.link[side].get(j)
    if pj is None or j >= len(own):
        raise DepthExceeded(f"cut {j} on line {side} lacks P(j) or depth")
    const1 = oth[pj]
    seq1 = [own[j + i] - own[j + i - 1] - 1 for i in range(1, min(horizon + 1, len(own) - j))]
    const2 = own[j]
    seq2 = [oth[pj + i] - oth[pj + i - 1] - 1 for i in range(1, min(horizon + 1, len(oth) - pj))]
    first = _lex_gt_const(const1, seq1)
    second = _lex_gt_const(const2, seq2)
    if first is None and len(seq1) < horizon:
        raise DepthExceeded(f"first comparison exhausted after {len(seq1)} terms")
    if second is None and len(seq2) < horizon:
        raise DepthExceeded(f"second comparison exhausted after {len(seq2)} terms")
    if first and second:
        return BOTH
    if first:
        return FIRST_HOLDS
    if second:
        return SECOND_HOLDS
    return UNDETERMINED
