"""Maps into the circle and the arc, their fiber products, and the A/B
dichotomy that disconnects any common refinement of the two circle maps
``x ↦ e^{2πix}`` and ``y ↦ e^{2πi(y + c)}`` for non-integer ``c``.

A circle map is stored as a real PL lift in units of full turns; two maps
agree exactly when their lifts differ by an integer constant on every
component of the domain.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import floor, ceil

from .certified import as_fraction
from .space import (
    ClosedSet,
    GraphError,
    MetricGraph,
    PLFunction,
    Point,
    extrema,
    graph_components,
    interval,
    pl_compose,
    pl_max,
    pl_sub,
)

__all__ = [
    "ArcMap",
    "CircleMap",
    "CompositionCheck",
    "FiberProductError",
    "Verdict",
    "closed_preimage",
    "compose_check",
    "fiber_product_circle",
    "hoehn_check",
    "shift_map",
]

UNIT = interval()


class FiberProductError(ValueError):
    """The fiber product is not a finite 1-complex (or is empty)."""


@dataclass(frozen=True)
class CircleMap:
    """``x ↦ exp(2πi · lift(x))``."""

    domain: MetricGraph
    lift: PLFunction

    def __post_init__(self):
        if self.lift.graph != self.domain:
            raise GraphError("lift lives on a different graph")

    def angle(self, p: Point) -> Fraction:
        """The image as a fraction of a turn in ``[0, 1)``."""
        v = self.lift(p)
        return v - floor(v)


@dataclass(frozen=True)
class ArcMap:
    """A map into ``[0, 1]``."""

    domain: MetricGraph
    values: PLFunction

    def __post_init__(self):
        if self.values.graph != self.domain:
            raise GraphError("values live on a different graph")
        ex = extrema(self.values)
        if ex.min.value < 0 or ex.max.value > 1:
            raise GraphError(f"values leave [0, 1]: range [{ex.min.value}, {ex.max.value}]")

    def is_surjective(self) -> bool:
        ex = extrema(self.values)
        return ex.min.value == 0 and ex.max.value == 1


def identity_map(graph: MetricGraph = UNIT) -> CircleMap:
    e = next(iter(graph.edges.values()))
    return CircleMap(graph, PLFunction(graph, {e.id: [(0, 0), (e.length, e.length)]}))


def shift_map(c, graph: MetricGraph = UNIT) -> CircleMap:
    """``y ↦ exp(2πi(y + c))`` on the unit interval."""
    c = as_fraction(c)
    return CircleMap(graph, PLFunction(graph, {"e": [(0, c), (1, 1 + c)]}))


def _unit_domain(m: CircleMap, name: str):
    if len(m.domain.edges) != 1 or next(iter(m.domain.edges.values())).length != 1 or not m.domain.is_arc():
        raise GraphError(f"{name} must be defined on the unit interval")


# ---------------------------------------------------------------------------
# composition


@dataclass(frozen=True)
class CompositionCheck:
    equal: bool
    point: Point | None = None
    left_angle: Fraction | None = None
    right_angle: Fraction | None = None
    difference: Fraction | None = None

    def __bool__(self):
        return self.equal


def _lift_difference_check(graph: MetricGraph, left: PLFunction, right: PLFunction) -> CompositionCheck:
    diff = pl_sub(left, right)
    comps = graph_components(graph)

    def mismatch(p: Point):
        la, ra = left(p), right(p)
        return CompositionCheck(False, p, la - floor(la), ra - floor(ra), la - ra)

    for verts, edges in zip(comps.vertices, comps.edges):
        base = diff.vertex_value(verts[0])
        if base.denominator != 1:
            return mismatch(graph.vertex_point(verts[0]))
        for eid in edges:
            pts = diff.pieces[eid]
            for t, v in pts:
                if v.denominator != 1:
                    return mismatch(graph.point(eid, t))
            for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
                if v0 != v1:
                    return mismatch(graph.point(eid, (t0 + t1) / 2))
            if any(v != base for _, v in pts):
                # integer values but a jump between pieces cannot happen for PL
                return mismatch(graph.point(eid, pts[0][0]))
    return CompositionCheck(True)


def compose_check(f: CircleMap, r: ArcMap, g: CircleMap, s: ArcMap) -> CompositionCheck:
    """Whether ``f ∘ r = g ∘ s`` exactly, else a point where they differ."""
    if r.domain != s.domain:
        raise GraphError("r and s must share their domain")
    _unit_domain(f, "f")
    _unit_domain(g, "g")
    return _lift_difference_check(r.domain, pl_compose(f.lift, r.values), pl_compose(g.lift, s.values))


# ---------------------------------------------------------------------------
# the A/B dichotomy


def closed_preimage(m: ArcMap, a, b) -> ClosedSet:
    """``m⁻¹([a, b])`` with generator ``max(a − m, m − b)``."""
    a, b = as_fraction(a), as_fraction(b)
    if a > b:
        raise ValueError(f"empty interval [{a}, {b}]")
    v = m.values
    return ClosedSet(pl_max(pl_sub(PLFunction.constant(v.graph, a), v), pl_sub(v, b)))


@dataclass
class Verdict:
    outcome: str  # disconnection-certified | composition-mismatch | not-surjective | dichotomy-violation
    evidence: dict = field(default_factory=dict)

    @property
    def disconnected(self) -> bool:
        return self.outcome == "disconnection-certified"


def family_shift(f: CircleMap, g: CircleMap) -> Fraction:
    """The ``c`` with ``f`` the identity lift and ``g`` the lift ``y + c``."""
    _unit_domain(f, "f")
    _unit_domain(g, "g")
    if f.lift != identity_map(f.domain).lift:
        raise ValueError("family precondition: f must have lift x")
    e = next(iter(g.domain.edges.values()))
    c = g.lift.value_at(e.id, 0)
    if pl_sub(g.lift, c) != identity_map(g.domain).lift:
        raise ValueError("family precondition: g must have lift y + c")
    if c.denominator == 1:
        raise ValueError("family precondition: the shift c must not be an integer")
    return c


def hoehn_check(W: MetricGraph, r: ArcMap, s: ArcMap, f: CircleMap, g: CircleMap) -> Verdict:
    """Certify that ``W`` is disconnected, or say which hypothesis fails first.

    Stages: surjectivity of ``r`` and ``s``; ``f ∘ r = g ∘ s``; the closed
    sets ``A = r⁻¹[0, ½] ∩ s⁻¹[½, 1]`` and ``B = r⁻¹[½, 1] ∩ s⁻¹[0, ½]``
    partition ``W``; hence ``W`` splits.
    """
    c = family_shift(f, g)
    if r.domain != W or s.domain != W:
        raise GraphError("r and s must be defined on W")
    for name, m in (("r", r), ("s", s)):
        ex = extrema(m.values)
        if not m.is_surjective():
            return Verdict("not-surjective", {
                "map": name, "min": ex.min.value, "max": ex.max.value,
                "point": ex.argmin if ex.min.value != 0 else ex.argmax,
            })
    comp = compose_check(f, r, g, s)
    if not comp:
        return Verdict("composition-mismatch", {
            "point": comp.point, "f_angle": comp.left_angle, "g_angle": comp.right_angle,
            "difference": comp.difference, "r_value": r.values(comp.point), "s_value": s.values(comp.point),
        })
    half = Fraction(1, 2)
    A = closed_preimage(r, 0, half) & closed_preimage(s, half, 1)
    B = closed_preimage(r, half, 1) & closed_preimage(s, 0, half)
    ra, rb = A.region, B.region
    missed = (ra | rb).complement()
    if not missed.is_empty():
        p = missed.sample_point()
        return Verdict("dichotomy-violation", {"kind": "union", "point": p,
                                               "r_value": r.values(p), "s_value": s.values(p)})
    both = ra & rb
    if not both.is_empty():
        p = both.sample_point()
        return Verdict("dichotomy-violation", {"kind": "intersection", "point": p,
                                               "r_value": r.values(p), "s_value": s.values(p)})
    if ra.is_empty() or rb.is_empty():
        raise AssertionError("A and B must both be nonempty once r is surjective")
    comps = graph_components(W)
    if comps.count < 2:
        raise AssertionError("a connected W passed every stage; the dichotomy argument is broken")
    side = []
    for verts in comps.vertices:
        p = W.vertex_point(verts[0])
        side.append("A" if ra.contains(p) else "B")
    return Verdict("disconnection-certified", {
        "components": comps.count, "shift": c, "A": A, "B": B,
        "component_sides": side, "component_vertices": comps.vertices,
        "a_point": ra.sample_point(), "b_point": rb.sample_point(),
    })


# ---------------------------------------------------------------------------
# fiber products over the circle


def _clip_level(a, b, cst, n, x0, x1, y0, y1):
    """Points of ``a·x − b·y + cst = n`` inside the box, as a segment or point."""
    pts = set()
    if b != 0:
        for x in (x0, x1):
            y = (a * x + cst - n) / b
            if y0 <= y <= y1:
                pts.add((x, y))
    if a != 0:
        for y in (y0, y1):
            x = (n - cst + b * y) / a
            if x0 <= x <= x1:
                pts.add((x, y))
    pts = sorted(pts)
    if not pts:
        return None
    return (pts[0], pts[-1])


def fiber_product_circle(f: CircleMap, g: CircleMap):
    """``W = {(x, y) : lift_f(x) − lift_g(y) ∈ ℤ}`` with its two projections.

    Returns ``(W, r, s)``; vertices are the sorted points ``v0, v1, ...`` and
    edges ``e0, e1, ...`` with length the larger coordinate extent.
    """
    _unit_domain(f, "f")
    _unit_domain(g, "g")
    (fe,) = f.domain.edges.values()
    (ge,) = g.domain.edges.values()
    fp, gp = f.lift.pieces[fe.id], g.lift.pieces[ge.id]
    segments, points = set(), set()
    for (x0, F0), (x1, F1) in zip(fp, fp[1:]):
        a = (F1 - F0) / (x1 - x0)
        fc = F0 - a * x0
        for (y0, G0), (y1, G1) in zip(gp, gp[1:]):
            b = (G1 - G0) / (y1 - y0)
            gc = G0 - b * y0
            cst = fc - gc  # phi = a x - b y + cst
            corners = [a * x - b * y + cst for x in (x0, x1) for y in (y0, y1)]
            lo, hi = min(corners), max(corners)
            if a == 0 and b == 0:
                if lo.denominator == 1:
                    raise FiberProductError(
                        f"the fiber product contains the whole cell [{x0},{x1}]x[{y0},{y1}]")
                continue
            for n in range(ceil(lo), floor(hi) + 1):
                piece = _clip_level(a, b, cst, n, x0, x1, y0, y1)
                if piece is None:
                    continue
                p, q = piece
                if p == q:
                    points.add(p)
                else:
                    segments.add((p, q))
    if not segments and not points:
        raise FiberProductError("the fiber product is empty")
    segments = _split_at_junctions(segments)
    ends = {p for s in segments for p in s}
    vertices = sorted(ends | points)
    names = {p: f"v{i}" for i, p in enumerate(vertices)}
    segs = sorted(segments)
    edges = []
    for i, (p, q) in enumerate(segs):
        edges.append((f"e{i}", names[p], names[q], max(abs(q[0] - p[0]), abs(q[1] - p[1]))))
    W = MetricGraph([names[p] for p in vertices], edges)

    def coord(k):
        pieces = {f"e{i}": [(0, p[k]), (max(abs(q[0] - p[0]), abs(q[1] - p[1])), q[k])]
                  for i, (p, q) in enumerate(segs)}
        iso = {names[p]: p[k] for p in vertices}
        return PLFunction(W, pieces, isolated=iso)

    r, s = ArcMap(W, coord(0)), ArcMap(W, coord(1))
    if not compose_check(f, r, g, s):
        raise AssertionError("the fiber product does not commute")
    return W, r, s


def _split_at_junctions(segments):
    pts = {p for s in segments for p in s}
    out = set()
    for p, q in segments:
        inner = []
        for z in pts:
            if z in (p, q):
                continue
            # z on the open segment (p, q)?
            cross = (q[0] - p[0]) * (z[1] - p[1]) - (q[1] - p[1]) * (z[0] - p[0])
            if cross == 0 and min(p, q) < z < max(p, q):
                inner.append(z)
        chain = [p] + sorted(inner) + [q]
        for u, v in zip(chain, chain[1:]):
            out.add((min(u, v), max(u, v)))
    return out
