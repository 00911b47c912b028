"""Metric graphs, piecewise-linear functions and their open/closed sets.

A compactum is modelled by a finite metric graph, an element of C(X) by a
continuous piecewise-linear function with rational breakpoints, and an open
set by the strict superlevel set ``{g > 0}`` of such a function.  Every
question asked of these objects (extrema, covering, containment,
connectivity) is answered with exact rational arithmetic.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Sequence

from . import _poly
from .certified import DEFAULT_WIDTH, CertifiedValue, as_fraction

__all__ = [
    "ClosedSet",
    "Edge",
    "Extrema",
    "GraphError",
    "MetricGraph",
    "OpenSet",
    "PLFunction",
    "PiecewisePoly",
    "Point",
    "Region",
    "circle",
    "ball",
    "covers",
    "extrema",
    "graph_components",
    "interval",
    "is_empty",
    "mesh_cells",
    "open_components",
    "pl_abs",
    "pl_add",
    "pl_algebra",
    "pl_compose",
    "pl_eval",
    "pl_max",
    "pl_min",
    "pl_mul",
    "pl_scale",
    "pl_sub",
    "set_contains",
    "set_intersect",
    "set_ops",
    "set_union",
    "superlevel",
]


class GraphError(ValueError):
    """Invalid graph data or objects living on different graphs."""


# ---------------------------------------------------------------------------
# graphs and points


@dataclass(frozen=True)
class Edge:
    id: str
    u: str
    v: str
    length: Fraction


class MetricGraph:
    """A finite 1-complex whose edges carry positive rational lengths.

    Loops and multi-edges are allowed; the circle is one vertex with one loop.
    Edge ``e`` is parametrised by ``t`` in ``[0, e.length]`` running from
    ``e.u`` to ``e.v``.
    """

    def __init__(self, vertices: Iterable[str], edges: Iterable[tuple]):
        self.vertices = tuple(str(v) for v in vertices)
        if not self.vertices:
            raise GraphError("a graph needs at least one vertex")
        if len(set(self.vertices)) != len(self.vertices):
            raise GraphError("duplicate vertex id")
        vset = set(self.vertices)
        self.edges: dict[str, Edge] = {}
        for eid, u, v, length in edges:
            eid, u, v = str(eid), str(u), str(v)
            length = as_fraction(length)
            if eid in self.edges:
                raise GraphError(f"duplicate edge id {eid!r}")
            if u not in vset or v not in vset:
                raise GraphError(f"edge {eid!r} has an undeclared endpoint")
            if length <= 0:
                raise GraphError(f"edge {eid!r} must have positive length")
            self.edges[eid] = Edge(eid, u, v, length)
        self._incident: dict[str, list[tuple[str, int]]] = {v: [] for v in self.vertices}
        for e in self.edges.values():
            self._incident[e.u].append((e.id, 0))
            self._incident[e.v].append((e.id, 1))

    @cached_property
    def _key(self):
        return (self.vertices, tuple((e.id, e.u, e.v, e.length) for e in self.edges.values()))

    def __eq__(self, other):
        return isinstance(other, MetricGraph) and self._key == other._key

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        return f"MetricGraph({len(self.vertices)} vertices, {len(self.edges)} edges)"

    def incident(self, vertex: str) -> list[tuple[str, int]]:
        """``(edge id, end)`` pairs at ``vertex``; end 0 is ``t = 0``, 1 is ``t = length``."""
        return self._incident[vertex]

    def endpoint(self, edge: str, end: int) -> str:
        e = self.edges[edge]
        return e.u if end == 0 else e.v

    def point(self, edge: str, t) -> Point:
        if edge not in self.edges:
            raise GraphError(f"unknown edge {edge!r}")
        e = self.edges[edge]
        t = as_fraction(t)
        if not 0 <= t <= e.length:
            raise GraphError(f"parameter {t} outside edge {edge!r} of length {e.length}")
        vertex = e.u if t == 0 else e.v if t == e.length else None
        return Point(edge, t, vertex)

    def vertex_point(self, vertex: str) -> Point:
        if vertex not in self._incident:
            raise GraphError(f"unknown vertex {vertex!r}")
        inc = self._incident[vertex]
        if not inc:
            return Point(None, Fraction(0), vertex)
        eid, end = inc[0]
        return Point(eid, Fraction(0) if end == 0 else self.edges[eid].length, vertex)

    @property
    def is_connected(self) -> bool:
        return graph_components(self).count == 1

    def is_arc(self) -> bool:
        """True for a path graph with at least one edge (a homeomorph of [0, 1])."""
        if not self.edges or not self.is_connected:
            return False
        if any(e.u == e.v for e in self.edges.values()):
            return False
        degrees = [len(self._incident[v]) for v in self.vertices]
        return len(self.edges) == len(self.vertices) - 1 and max(degrees) <= 2


def interval(length=1, *, edge: str = "e", u: str = "0", v: str = "1") -> MetricGraph:
    """The arc ``[0, length]`` as a one-edge graph."""
    return MetricGraph([u, v], [(edge, u, v, length)])


def circle(length=1, *, edge: str = "e", vertex: str = "o") -> MetricGraph:
    """The circle: one vertex and one loop."""
    return MetricGraph([vertex], [(edge, vertex, vertex, length)])


@dataclass(frozen=True, eq=False)
class Point:
    """A point of a metric graph: an edge parameter, canonicalised at vertices.

    Build points with :meth:`MetricGraph.point`; endpoint parameters are then
    recognised as their vertex, so points of different edges meeting at a
    vertex compare equal.
    """

    edge: str | None
    t: Fraction
    vertex: str | None = None

    def _key(self):
        return ("v", self.vertex) if self.vertex is not None else ("e", self.edge, self.t)

    def __eq__(self, other):
        return isinstance(other, Point) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        if self.vertex is not None:
            return f"Point(vertex={self.vertex!r})"
        return f"Point({self.edge!r}, {self.t})"


@dataclass(frozen=True)
class Components:
    count: int
    vertices: tuple[tuple[str, ...], ...]
    edges: tuple[tuple[str, ...], ...]


def graph_components(X: MetricGraph) -> Components:
    """Connected components, in order of first vertex."""
    parent = {v: v for v in X.vertices}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for e in X.edges.values():
        ra, rb = find(e.u), find(e.v)
        if ra != rb:
            parent[max(ra, rb, key=X.vertices.index)] = min(ra, rb, key=X.vertices.index)
    groups: dict[str, list[str]] = {}
    for v in X.vertices:
        groups.setdefault(find(v), []).append(v)
    roots = list(groups)
    edges = {r: [] for r in roots}
    for e in X.edges.values():
        edges[find(e.u)].append(e.id)
    return Components(
        len(roots), tuple(tuple(groups[r]) for r in roots), tuple(tuple(edges[r]) for r in roots)
    )


# ---------------------------------------------------------------------------
# piecewise-linear functions


def _interp(pieces, t: Fraction) -> Fraction:
    ts = [p[0] for p in pieces]
    i = bisect.bisect_left(ts, t)
    if i < len(ts) and ts[i] == t:
        return pieces[i][1]
    (t0, v0), (t1, v1) = pieces[i - 1], pieces[i]
    return v0 + (v1 - v0) * (t - t0) / (t1 - t0)


def _simplify(pieces) -> tuple:
    out = [pieces[0]]
    for k in range(1, len(pieces) - 1):
        (t0, v0), (t1, v1), (t2, v2) = out[-1], pieces[k], pieces[k + 1]
        if (v1 - v0) * (t2 - t1) != (v2 - v1) * (t1 - t0):
            out.append(pieces[k])
    out.append(pieces[-1])
    return tuple(out)


class PLFunction:
    """A continuous piecewise-linear function on a metric graph.

    ``pieces`` maps each edge id to its breakpoints ``(t, value)``, strictly
    increasing in ``t`` from 0 to the edge length.  Collinear breakpoints are
    dropped, so equal functions have equal representations.  Vertices with
    no incident edge take their values from ``isolated``.
    """

    __slots__ = ("graph", "pieces", "isolated", "__weakref__")

    def __init__(self, graph: MetricGraph, pieces: dict, *, isolated: dict | None = None,
                 check: bool = True):
        self.graph = graph
        isolated = isolated or {}
        self.isolated = {}
        for v in graph.vertices:
            if not graph.incident(v):
                if v not in isolated:
                    raise GraphError(f"no value for isolated vertex {v!r}")
                self.isolated[v] = as_fraction(isolated[v])
        norm = {}
        for eid in graph.edges:
            if eid not in pieces:
                raise GraphError(f"no breakpoints for edge {eid!r}")
            pts = tuple((as_fraction(t), as_fraction(v)) for t, v in pieces[eid])
            norm[eid] = pts
        if check:
            extra = set(pieces) - set(graph.edges)
            if extra:
                raise GraphError(f"breakpoints for unknown edges {sorted(extra)}")
            for eid, pts in norm.items():
                L = graph.edges[eid].length
                if len(pts) < 2 or pts[0][0] != 0 or pts[-1][0] != L:
                    raise GraphError(f"edge {eid!r}: breakpoints must start at 0 and end at {L}")
                if any(a[0] >= b[0] for a, b in zip(pts, pts[1:])):
                    raise GraphError(f"edge {eid!r}: breakpoints must strictly increase")
            for v in graph.vertices:
                vals = {
                    norm[eid][0][1] if end == 0 else norm[eid][-1][1]
                    for eid, end in graph.incident(v)
                }
                if len(vals) > 1:
                    raise GraphError(f"discontinuous at vertex {v!r}: values {sorted(vals)}")
        self.pieces = {eid: _simplify(pts) for eid, pts in norm.items()}

    @classmethod
    def constant(cls, graph: MetricGraph, c) -> PLFunction:
        c = as_fraction(c)
        return cls(graph, {e.id: ((0, c), (e.length, c)) for e in graph.edges.values()},
                   isolated={v: c for v in graph.vertices}, check=False)

    @classmethod
    def from_callable(cls, graph: MetricGraph, fn: Callable, ts: dict | None = None) -> PLFunction:
        """Interpolate ``fn(edge, t)`` at the given (or endpoint-only) parameters.

        Isolated vertices get ``fn(None, vertex)``.
        """
        pieces = {}
        for e in graph.edges.values():
            grid = sorted(set([Fraction(0), e.length] + [as_fraction(t) for t in (ts or {}).get(e.id, ())]))
            pieces[e.id] = [(t, fn(e.id, t)) for t in grid]
        iso = {v: fn(None, v) for v in graph.vertices if not graph.incident(v)}
        return cls(graph, pieces, isolated=iso)

    def __call__(self, p: Point) -> Fraction:
        return pl_eval(self, p)

    def value_at(self, edge: str, t) -> Fraction:
        return _interp(self.pieces[edge], as_fraction(t))

    def vertex_value(self, vertex: str) -> Fraction:
        inc = self.graph.incident(vertex)
        if not inc:
            return self.isolated[vertex]
        eid, end = inc[0]
        pts = self.pieces[eid]
        return pts[0][1] if end == 0 else pts[-1][1]

    def breakpoints(self, edge: str) -> tuple:
        return tuple(t for t, _ in self.pieces[edge])

    def __eq__(self, other):
        return (isinstance(other, PLFunction) and self.graph == other.graph
                and self.pieces == other.pieces and self.isolated == other.isolated)

    def __hash__(self):
        return hash((tuple(sorted(self.pieces.items())), tuple(sorted(self.isolated.items()))))

    def __repr__(self):
        body = ", ".join(
            f"{e}: " + " ".join(f"({t},{v})" for t, v in pts) for e, pts in self.pieces.items()
        )
        return f"PLFunction({body})"

    def __add__(self, other):
        return pl_add(self, other)

    def __radd__(self, other):
        return pl_add(self, other)

    def __sub__(self, other):
        return pl_sub(self, other)

    def __rsub__(self, other):
        return pl_sub(other if isinstance(other, PLFunction) else PLFunction.constant(self.graph, other), self)

    def __neg__(self):
        return pl_scale(self, -1)

    def __mul__(self, other):
        if isinstance(other, PLFunction):
            return pl_mul(self, other)
        return pl_scale(self, other)

    __rmul__ = __mul__

    def __abs__(self):
        return pl_abs(self)


def _same_graph(a: PLFunction | PiecewisePoly, b: PLFunction | PiecewisePoly):
    if a.graph is not b.graph and a.graph != b.graph:
        raise GraphError("functions live on different graphs")


def pl_eval(f: PLFunction, p: Point) -> Fraction:
    """Value of ``f`` at ``p``; a vertex point gives the shared vertex value."""
    if p.vertex is not None and p.edge is None:
        return f.vertex_value(p.vertex)
    if p.edge not in f.graph.edges:
        raise GraphError(f"point on unknown edge {p.edge!r}")
    return f.value_at(p.edge, p.t)


def _combine(f: PLFunction, g: PLFunction, op, crossings: bool) -> PLFunction:
    _same_graph(f, g)
    pieces = {}
    for eid in f.graph.edges:
        ts = sorted(set(f.breakpoints(eid)) | set(g.breakpoints(eid)))
        fv = [f.value_at(eid, t) for t in ts]
        gv = [g.value_at(eid, t) for t in ts]
        pts = []
        for k, t in enumerate(ts):
            if crossings and k > 0:
                d0, d1 = fv[k - 1] - gv[k - 1], fv[k] - gv[k]
                if (d0 < 0 < d1) or (d1 < 0 < d0):
                    tc = ts[k - 1] + (t - ts[k - 1]) * d0 / (d0 - d1)
                    vc = f.value_at(eid, tc)
                    pts.append((tc, op(vc, vc)))
            pts.append((t, op(fv[k], gv[k])))
        pieces[eid] = pts
    iso = {v: op(a, g.isolated[v]) for v, a in f.isolated.items()}
    return PLFunction(f.graph, pieces, isolated=iso, check=False)


def _coerce(f: PLFunction, g) -> PLFunction:
    return g if isinstance(g, PLFunction) else PLFunction.constant(f.graph, g)


def pl_add(f: PLFunction, g) -> PLFunction:
    return _combine(f, _coerce(f, g), lambda a, b: a + b, False)


def pl_sub(f: PLFunction, g) -> PLFunction:
    return _combine(f, _coerce(f, g), lambda a, b: a - b, False)


def pl_scale(f: PLFunction, c) -> PLFunction:
    c = as_fraction(c)
    return PLFunction(f.graph, {e: [(t, c * v) for t, v in pts] for e, pts in f.pieces.items()},
                      isolated={v: c * x for v, x in f.isolated.items()}, check=False)


def pl_min(f: PLFunction, g) -> PLFunction:
    return _combine(f, _coerce(f, g), min, True)


def pl_max(f: PLFunction, g) -> PLFunction:
    return _combine(f, _coerce(f, g), max, True)


def pl_abs(f: PLFunction) -> PLFunction:
    return pl_max(f, pl_scale(f, -1))


def pl_algebra(op: str, f: PLFunction, g=None) -> PLFunction:
    """Dispatch ``add``, ``sub``, ``scale``, ``min``, ``max`` or ``abs``."""
    table = {"add": pl_add, "sub": pl_sub, "scale": pl_scale, "min": pl_min, "max": pl_max}
    if op == "abs":
        return pl_abs(f)
    if op not in table:
        raise ValueError(f"unknown operation {op!r}")
    return table[op](f, g)


def pl_sum(fs: Sequence[PLFunction]) -> PLFunction:
    if not fs:
        raise ValueError("empty sum")
    out = fs[0]
    for f in fs[1:]:
        out = pl_add(out, f)
    return out


def pl_compose(outer: PLFunction, inner: PLFunction) -> PLFunction:
    """``outer ∘ inner`` where ``outer`` lives on a single edge ``[0, L]``.

    ``inner`` must take values in ``[0, L]``; the edge parameter of ``outer``
    is read as the input coordinate.
    """
    if len(outer.graph.edges) != 1:
        raise GraphError("the outer function must live on a single edge")
    (oe,) = outer.graph.edges.values()
    obps = outer.breakpoints(oe.id)
    pieces = {}
    for eid, pts in inner.pieces.items():
        out = []
        for k, (t, v) in enumerate(pts):
            if not 0 <= v <= oe.length:
                raise GraphError(f"inner value {v} leaves the domain [0, {oe.length}]")
            if k > 0:
                t0, v0 = pts[k - 1]
                lo, hi = min(v0, v), max(v0, v)
                crossing = [b for b in obps if lo < b < hi]
                if v < v0:
                    crossing.reverse()
                for b in crossing:
                    tb = t0 + (t - t0) * (b - v0) / (v - v0)
                    out.append((tb, outer.value_at(oe.id, b)))
            out.append((t, outer.value_at(oe.id, v)))
        pieces[eid] = out
    iso = {}
    for v, x in inner.isolated.items():
        if not 0 <= x <= oe.length:
            raise GraphError(f"inner value {x} leaves the domain [0, {oe.length}]")
        iso[v] = outer.value_at(oe.id, x)
    return PLFunction(inner.graph, pieces, isolated=iso, check=False)


# ---------------------------------------------------------------------------
# piecewise polynomials


class PiecewisePoly:
    """Continuous piecewise polynomial of degree at most 4 on a metric graph.

    ``pieces[edge]`` is a tuple of ``(a, b, coeffs)`` partitioning
    ``[0, length]``; coefficients run from low to high degree in the edge
    parameter ``t``.  Isolated vertices carry constants in ``isolated``.
    """

    MAX_DEGREE = 4

    __slots__ = ("graph", "pieces", "isolated")

    def __init__(self, graph: MetricGraph, pieces: dict, *, isolated: dict | None = None,
                 check: bool = True):
        self.graph = graph
        isolated = isolated or {}
        self.isolated = {v: as_fraction(isolated[v]) for v in graph.vertices if not graph.incident(v)}
        self.pieces = {
            e: tuple((as_fraction(a), as_fraction(b), _poly.trim(c)) for a, b, c in ps) for e, ps in pieces.items()
        }
        if check:
            self._validate()

    def _validate(self):
        for eid, e in self.graph.edges.items():
            ps = self.pieces.get(eid)
            if not ps or ps[0][0] != 0 or ps[-1][1] != e.length:
                raise GraphError(f"edge {eid!r}: pieces must partition [0, {e.length}]")
            for (a0, b0, c0), (a1, b1, c1) in zip(ps, ps[1:]):
                if b0 != a1:
                    raise GraphError(f"edge {eid!r}: pieces leave a gap at {b0}")
                if _poly.peval(c0, b0) != _poly.peval(c1, a1):
                    raise GraphError(f"edge {eid!r}: discontinuity at {b0}")
            for a, b, c in ps:
                if a >= b:
                    raise GraphError(f"edge {eid!r}: empty piece [{a}, {b}]")
                if _poly.degree(c) > self.MAX_DEGREE:
                    raise GraphError(f"degree {_poly.degree(c)} exceeds the cap of {self.MAX_DEGREE}")
        for v in self.graph.vertices:
            vals = set()
            for eid, end in self.graph.incident(v):
                a, b, c = self.pieces[eid][0] if end == 0 else self.pieces[eid][-1]
                vals.add(_poly.peval(c, a if end == 0 else b))
            if len(vals) > 1:
                raise GraphError(f"discontinuous at vertex {v!r}")

    @classmethod
    def from_pl(cls, f: PLFunction) -> PiecewisePoly:
        pieces = {}
        for eid, pts in f.pieces.items():
            ps = []
            for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
                s = (v1 - v0) / (t1 - t0)
                ps.append((t0, t1, (v0 - s * t0, s)))
            pieces[eid] = ps
        return cls(f.graph, pieces, isolated=f.isolated, check=False)

    def value_at(self, edge: str, t) -> Fraction:
        t = as_fraction(t)
        for a, b, c in self.pieces[edge]:
            if a <= t <= b:
                return _poly.peval(c, t)
        raise GraphError(f"parameter {t} outside edge {edge!r}")

    def __call__(self, p: Point) -> Fraction:
        if p.edge is None:
            return self.isolated[p.vertex]
        return self.value_at(p.edge, p.t)

    @property
    def degree(self) -> int:
        return max((_poly.degree(c) for ps in self.pieces.values() for _, _, c in ps), default=0)

    def _binary(self, other: PiecewisePoly, op) -> PiecewisePoly:
        _same_graph(self, other)
        pieces = {}
        for eid in self.graph.edges:
            cuts = sorted({a for a, _, _ in self.pieces[eid]} | {a for a, _, _ in other.pieces[eid]}
                          | {self.graph.edges[eid].length})
            ps = []
            for a, b in zip(cuts, cuts[1:]):
                m = (a + b) / 2
                ps.append((a, b, op(self._coeffs_at(eid, m), other._coeffs_at(eid, m))))
            pieces[eid] = ps
        iso = {v: op((x,), (other.isolated[v],))[0] for v, x in self.isolated.items()}
        out = PiecewisePoly(self.graph, pieces, isolated=iso, check=False)
        if out.degree > self.MAX_DEGREE:
            raise GraphError(f"degree {out.degree} exceeds the cap of {self.MAX_DEGREE}")
        return out

    def _coeffs_at(self, edge, t):
        for a, b, c in self.pieces[edge]:
            if a <= t <= b:
                return c
        raise GraphError(f"parameter {t} outside edge {edge!r}")

    def __add__(self, other):
        return self._binary(_as_pp(other, self.graph), _poly.padd)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(_as_pp(other, self.graph), lambda a, b: _poly.padd(a, _poly.pscale(b, -1)))

    def __rsub__(self, other):
        return _as_pp(other, self.graph) - self

    def __mul__(self, other):
        if isinstance(other, (PLFunction, PiecewisePoly)):
            return self._binary(_as_pp(other, self.graph), _poly.pmul)
        c = as_fraction(other)
        return PiecewisePoly(self.graph, {e: [(a, b, _poly.pscale(p, c)) for a, b, p in ps]
                                          for e, ps in self.pieces.items()},
                             isolated={v: c * x for v, x in self.isolated.items()}, check=False)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1


def _as_pp(x, graph: MetricGraph) -> PiecewisePoly:
    if isinstance(x, PiecewisePoly):
        return x
    if isinstance(x, PLFunction):
        return PiecewisePoly.from_pl(x)
    return PiecewisePoly.from_pl(PLFunction.constant(graph, x))


def pl_mul(f: PLFunction, g: PLFunction) -> PiecewisePoly:
    """Exact product of two PL functions (piecewise quadratic)."""
    _same_graph(f, g)
    return PiecewisePoly.from_pl(f) * PiecewisePoly.from_pl(g)


# ---------------------------------------------------------------------------
# extrema


@dataclass(frozen=True)
class Extrema:
    min: CertifiedValue
    max: CertifiedValue
    argmin: Point
    argmax: Point


def _locate(graph: MetricGraph, where) -> Point:
    eid, t = where
    return graph.vertex_point(t) if eid is None else graph.point(eid, t)


def _pl_extrema(f: PLFunction) -> Extrema:
    values = [(v, (eid, t)) for eid, pts in f.pieces.items() for t, v in pts]
    values += [(x, (None, v)) for v, x in f.isolated.items()]
    if not values:
        raise GraphError("an empty graph has no function values")
    lo = min(values, key=lambda item: item[0])
    hi = max(values, key=lambda item: item[0])
    return Extrema(CertifiedValue.exact(lo[0]), CertifiedValue.exact(hi[0]),
                   _locate(f.graph, lo[1]), _locate(f.graph, hi[1]))


def _pp_extrema(h: PiecewisePoly, width: Fraction) -> Extrema:
    eps = width
    fixed = [_poly.Candidate(x, x, x, (None, v)) for v, x in h.isolated.items()]
    for _ in range(12):
        cands = list(fixed)
        for eid, ps in h.pieces.items():
            for a, b, c in ps:
                for cand in _poly.piece_candidates(c, a, b, eps):
                    cand.where = (eid, cand.where)
                    cands.append(cand)
        vmin, cmin_ = _poly.combine_min(cands)
        vmax, cmax_ = _poly.combine_max(cands)
        if vmin.width <= width and vmax.width <= width:
            return Extrema(vmin, vmax, _locate(h.graph, cmin_.where), _locate(h.graph, cmax_.where))
        eps = eps / 1024
    raise ArithmeticError("could not certify extrema to the requested width")


def extrema(h: PLFunction | PiecewisePoly, width=DEFAULT_WIDTH) -> Extrema:
    """Certified minimum and maximum with attaining (or nearly attaining) points.

    PL and piecewise-quadratic inputs give exact rationals.  For cubic and
    quartic pieces the critical points are isolated exactly and the values
    certified to ``width``.
    """
    if isinstance(h, PLFunction):
        return _pl_extrema(h)
    return _pp_extrema(h, as_fraction(width))


def sup_norm(h: PLFunction | PiecewisePoly, width=DEFAULT_WIDTH) -> CertifiedValue:
    ex = extrema(h, width)
    lo = max(-ex.min.upper, ex.max.lower, 0)
    hi = max(-ex.min.lower, ex.max.upper)
    return CertifiedValue(lo, max(lo, hi))


# ---------------------------------------------------------------------------
# regions: exact finite unions of points and open segments


@dataclass(frozen=True)
class _Cells:
    cuts: tuple  # 0 = c_0 < ... < c_r = length
    points: tuple  # r + 1 flags; the end flags mirror vertex membership
    segments: tuple  # r flags for (c_k, c_{k+1})

    def refine(self, new_cuts) -> _Cells:
        cuts = sorted(set(self.cuts) | set(new_cuts))
        if len(cuts) == len(self.cuts):
            return self
        pts, segs = [], []
        for c in cuts:
            i = bisect.bisect_left(self.cuts, c)
            pts.append(self.points[i] if self.cuts[i] == c else self.segments[i - 1])
        for a in cuts[:-1]:
            i = bisect.bisect_right(self.cuts, a) - 1
            segs.append(self.segments[i])
        return _Cells(tuple(cuts), tuple(pts), tuple(segs))

    def simplified(self) -> _Cells:
        """Drop interior cuts that separate nothing."""
        cuts, pts, segs = [self.cuts[0]], [self.points[0]], []
        for k in range(1, len(self.cuts)):
            seg = self.segments[k - 1]
            if len(cuts) > 1 and segs[-1] == pts[-1] == seg:
                cuts.pop()
                pts.pop()
            else:
                segs.append(seg)
            cuts.append(self.cuts[k])
            pts.append(self.points[k])
        return _Cells(tuple(cuts), tuple(pts), tuple(segs))


class Region:
    """An exactly represented subset of a metric graph.

    Each edge is cut into finitely many points and open segments, each either
    wholly in or wholly out; vertices carry their own flag.  Every superlevel
    and sublevel set of a PL function is a region, and regions are closed
    under Boolean operations, closure and interior.
    """

    __slots__ = ("graph", "cells", "vertices")

    def __init__(self, graph: MetricGraph, cells: dict, vertices: frozenset):
        self.graph, self.cells, self.vertices = graph, cells, frozenset(vertices)

    # construction -------------------------------------------------------

    @classmethod
    def from_predicate(cls, f: PLFunction, pred: Callable[[Fraction], bool]) -> Region:
        """``{x : pred(f(x))}`` for a sign-type predicate (``>0``, ``<=0`` ...)."""
        cells = {}
        for eid, pts in f.pieces.items():
            cuts = [pts[0][0]]
            for (t0, v0), (t1, v1) in zip(pts, pts[1:]):
                if (v0 < 0 < v1) or (v1 < 0 < v0):
                    cuts.append(t0 + (t1 - t0) * v0 / (v0 - v1))
                cuts.append(t1)
            vals = [f.value_at(eid, c) for c in cuts]
            mids = [f.value_at(eid, (a + b) / 2) for a, b in zip(cuts, cuts[1:])]
            cells[eid] = _Cells(tuple(cuts), tuple(pred(v) for v in vals), tuple(pred(v) for v in mids))
        verts = frozenset(
            v for v in f.graph.vertices if pred(f.vertex_value(v))
        )
        return cls(f.graph, cells, verts)._sync()

    @classmethod
    def positive(cls, f: PLFunction) -> Region:
        return cls.from_predicate(f, lambda v: v > 0)

    @classmethod
    def nonpositive(cls, f: PLFunction) -> Region:
        return cls.from_predicate(f, lambda v: v <= 0)

    @classmethod
    def empty(cls, graph: MetricGraph) -> Region:
        cells = {e.id: _Cells((Fraction(0), e.length), (False, False), (False,)) for e in graph.edges.values()}
        return cls(graph, cells, frozenset())

    @classmethod
    def whole(cls, graph: MetricGraph) -> Region:
        return cls.empty(graph).complement()

    @classmethod
    def from_items(cls, graph: MetricGraph, cuts: dict, points: set, segments: set, vertices: set) -> Region:
        """Build from explicit cut lists and the included ``(edge, k)`` items."""
        cells = {}
        for eid, cs in cuts.items():
            r = len(cs) - 1
            cells[eid] = _Cells(
                tuple(cs),
                tuple((eid, k) in points for k in range(r + 1)),
                tuple((eid, k) in segments for k in range(r)),
            )
        return cls(graph, cells, frozenset(vertices))._sync()

    def _sync(self) -> Region:
        # end-point flags follow the vertex set
        cells = {}
        for eid, c in self.cells.items():
            e = self.graph.edges[eid]
            pts = list(c.points)
            pts[0] = e.u in self.vertices
            pts[-1] = e.v in self.vertices
            cells[eid] = _Cells(c.cuts, tuple(pts), c.segments)
        self.cells = cells
        return self

    # algebra ------------------------------------------------------------

    def _check(self, other: Region):
        if self.graph is not other.graph and self.graph != other.graph:
            raise GraphError("regions live on different graphs")

    def _binary(self, other: Region, op) -> Region:
        self._check(other)
        cells = {}
        for eid in self.graph.edges:
            a, b = self.cells[eid], other.cells[eid]
            a, b = a.refine(b.cuts), b.refine(a.cuts)
            cells[eid] = _Cells(
                a.cuts,
                tuple(op(x, y) for x, y in zip(a.points, b.points)),
                tuple(op(x, y) for x, y in zip(a.segments, b.segments)),
            )
        verts = {v for v in self.graph.vertices if op(v in self.vertices, v in other.vertices)}
        return Region(self.graph, cells, frozenset(verts))._sync()

    def __or__(self, other: Region) -> Region:
        return self._binary(other, lambda x, y: x or y)

    def __and__(self, other: Region) -> Region:
        return self._binary(other, lambda x, y: x and y)

    def __sub__(self, other: Region) -> Region:
        return self._binary(other, lambda x, y: x and not y)

    def complement(self) -> Region:
        cells = {
            eid: _Cells(c.cuts, tuple(not x for x in c.points), tuple(not x for x in c.segments))
            for eid, c in self.cells.items()
        }
        verts = frozenset(v for v in self.graph.vertices if v not in self.vertices)
        return Region(self.graph, cells, verts)._sync()

    def _end_segments(self, vertex: str) -> list[bool]:
        out = []
        for eid, end in self.graph.incident(vertex):
            segs = self.cells[eid].segments
            out.append(segs[0] if end == 0 else segs[-1])
        return out

    def closure(self) -> Region:
        cells = {}
        for eid, c in self.cells.items():
            pts = list(c.points)
            for k in range(1, len(pts) - 1):
                pts[k] = pts[k] or c.segments[k - 1] or c.segments[k]
            cells[eid] = _Cells(c.cuts, tuple(pts), c.segments)
        verts = {v for v in self.graph.vertices if v in self.vertices or any(self._end_segments(v))}
        return Region(self.graph, cells, frozenset(verts))._sync()

    def interior(self) -> Region:
        cells = {}
        for eid, c in self.cells.items():
            pts = list(c.points)
            for k in range(1, len(pts) - 1):
                pts[k] = pts[k] and c.segments[k - 1] and c.segments[k]
            cells[eid] = _Cells(c.cuts, tuple(pts), c.segments)
        verts = {v for v in self.vertices if all(self._end_segments(v))}
        return Region(self.graph, cells, frozenset(verts))._sync()

    def boundary(self) -> Region:
        """Closure minus the set itself."""
        return self.closure() - self

    # predicates ---------------------------------------------------------

    def is_empty(self) -> bool:
        if self.vertices:
            return False
        return not any(any(c.points) or any(c.segments) for c in self.cells.values())

    def is_open(self) -> bool:
        return self == self.interior()

    def is_closed(self) -> bool:
        return self == self.closure()

    def issubset(self, other: Region) -> bool:
        return (self - other).is_empty()

    def _canonical(self):
        return (
            tuple(sorted((eid, c.simplified()) for eid, c in self.cells.items())),
            tuple(sorted(self.vertices)),
        )

    def __eq__(self, other):
        if not isinstance(other, Region):
            return NotImplemented
        self._check(other)
        return (self - other).is_empty() and (other - self).is_empty()

    def __hash__(self):
        return hash(self._canonical())

    def contains(self, p: Point) -> bool:
        if p.vertex is not None:
            return p.vertex in self.vertices
        c = self.cells[p.edge]
        i = bisect.bisect_left(c.cuts, p.t)
        if i < len(c.cuts) and c.cuts[i] == p.t:
            return c.points[i]
        return c.segments[i - 1]

    def contains_open_interval(self, edge: str, a, b) -> bool:
        """Whether the open segment ``(a, b)`` of ``edge`` lies inside."""
        c = self.cells[edge].refine([as_fraction(a), as_fraction(b)])
        i, j = c.cuts.index(a), c.cuts.index(b)
        return all(c.segments[i:j]) and all(c.points[i + 1:j])

    def sample_point(self) -> Point | None:
        """A deterministic point of the region (vertices first, then edges)."""
        for v in self.graph.vertices:
            if v in self.vertices:
                return self.graph.vertex_point(v)
        for eid, c in self.cells.items():
            for k, (a, b) in enumerate(zip(c.cuts, c.cuts[1:])):
                if c.segments[k]:
                    return self.graph.point(eid, (a + b) / 2)
            for k in range(1, len(c.cuts) - 1):
                if c.points[k]:
                    return self.graph.point(eid, c.cuts[k])
        return None

    def finite_points(self) -> list[Point]:
        """The points of a region containing no segment (e.g. a boundary)."""
        if any(any(c.segments) for c in self.cells.values()):
            raise ValueError("region contains segments")
        out = [self.graph.vertex_point(v) for v in self.graph.vertices if v in self.vertices]
        for eid, c in self.cells.items():
            out += [self.graph.point(eid, c.cuts[k]) for k in range(1, len(c.cuts) - 1) if c.points[k]]
        return out

    # connectivity -------------------------------------------------------

    def components(self) -> list[Region]:
        """Connected components, deterministic order."""
        parent: dict = {}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        def union(a, b):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[rb] = ra

        order = []
        for v in self.graph.vertices:
            if v in self.vertices:
                parent[("v", v)] = ("v", v)
                order.append(("v", v))

        def node(eid, k):
            c = self.cells[eid]
            if k == 0:
                return ("v", self.graph.edges[eid].u)
            if k == len(c.cuts) - 1:
                return ("v", self.graph.edges[eid].v)
            return ("p", eid, k)

        for eid, c in self.cells.items():
            for k in range(1, len(c.cuts) - 1):
                if c.points[k]:
                    parent[("p", eid, k)] = ("p", eid, k)
                    order.append(("p", eid, k))
            for k, inside in enumerate(c.segments):
                if not inside:
                    continue
                s = ("s", eid, k)
                parent[s] = s
                order.append(s)
                for end in (k, k + 1):
                    n = node(eid, end)
                    if n in parent:
                        union(n, s)
        groups: dict = {}
        for item in order:
            groups.setdefault(find(item), []).append(item)
        out = []
        for items in groups.values():
            verts = {it[1] for it in items if it[0] == "v"}
            pts = {(it[1], it[2]) for it in items if it[0] == "p"}
            segs = {(it[1], it[2]) for it in items if it[0] == "s"}
            cuts = {eid: c.cuts for eid, c in self.cells.items()}
            out.append(Region.from_items(self.graph, cuts, pts, segs, verts))
        return out

    # conversion ---------------------------------------------------------

    def open_generator(self) -> PLFunction:
        """A PL function ``g`` with ``{g > 0}`` equal to this (open) region.

        Values are 1 on included cut points and segment midpoints, 0 elsewhere.
        """
        if not self.is_open():
            raise ValueError("region is not open")
        pieces = {}
        for eid, c in self.cells.items():
            pts = []
            for k, t in enumerate(c.cuts):
                pts.append((t, Fraction(int(c.points[k]))))
                if k < len(c.segments):
                    pts.append(((t + c.cuts[k + 1]) / 2, Fraction(int(c.segments[k]))))
            pieces[eid] = pts
        iso = {v: Fraction(int(v in self.vertices)) for v in self.graph.vertices if not self.graph.incident(v)}
        return PLFunction(self.graph, pieces, isolated=iso, check=False)

    def to_open_set(self) -> OpenSet:
        return OpenSet(self.open_generator())

    def to_closed_set(self) -> ClosedSet:
        if not self.is_closed():
            raise ValueError("region is not closed")
        return ClosedSet(self.complement().open_generator())

    def range_of(self, f: PLFunction) -> tuple[Fraction, Fraction] | None:
        """Min and max of ``f`` over the closure of the region (``None`` if empty)."""
        vals = [f.vertex_value(v) for v in self.vertices]
        for eid, c in self.cells.items():
            bps = f.breakpoints(eid)
            for k, t in enumerate(c.cuts):
                if 0 < k < len(c.cuts) - 1 and c.points[k]:
                    vals.append(f.value_at(eid, t))
            for k, inside in enumerate(c.segments):
                if inside:
                    a, b = c.cuts[k], c.cuts[k + 1]
                    vals += [f.value_at(eid, a), f.value_at(eid, b)]
                    vals += [f.value_at(eid, t) for t in bps if a < t < b]
        if not vals:
            return None
        return min(vals), max(vals)


def ball(graph: MetricGraph, p: Point, r) -> Region:
    """The open ball of radius ``r`` about ``p``, for ``r`` below half of every
    distance from ``p`` to a vertex other than itself and below every half edge.
    """
    r = as_fraction(r)
    min_len = min(e.length for e in graph.edges.values())
    if r <= 0 or 2 * r >= min_len:
        raise ValueError("radius too large for the local ball construction")
    cuts = {eid: [Fraction(0), e.length] for eid, e in graph.edges.items()}
    segs, pts, verts = set(), set(), set()
    if p.vertex is not None:
        verts.add(p.vertex)
        for eid, end in graph.incident(p.vertex):
            L = graph.edges[eid].length
            cuts[eid].append(r if end == 0 else L - r)
    else:
        L = graph.edges[p.edge].length
        if not (r < p.t < L - r):
            raise ValueError("ball would reach a vertex; shrink the radius")
        cuts[p.edge] += [p.t - r, p.t, p.t + r]
    for eid in cuts:
        cuts[eid] = sorted(set(cuts[eid]))
    if p.vertex is not None:
        for eid, end in graph.incident(p.vertex):
            cs = cuts[eid]
            segs.add((eid, 0) if end == 0 else (eid, len(cs) - 2))
    else:
        cs = cuts[p.edge]
        k = cs.index(p.t)
        segs |= {(p.edge, k - 1), (p.edge, k)}
        pts.add((p.edge, k))
    return Region.from_items(graph, cuts, pts, segs, verts)


# ---------------------------------------------------------------------------
# open and closed sets


class OpenSet:
    """The strict superlevel set ``{x : generator(x) > 0}``."""

    __slots__ = ("generator", "_region")

    def __init__(self, generator: PLFunction):
        self.generator = generator
        self._region = None

    @property
    def graph(self) -> MetricGraph:
        return self.generator.graph

    @property
    def region(self) -> Region:
        if self._region is None:
            self._region = Region.positive(self.generator)
        return self._region

    def is_empty(self) -> bool:
        return is_empty(self)

    def complement(self) -> ClosedSet:
        return ClosedSet(self.generator)

    def closure(self) -> ClosedSet:
        return self.region.closure().to_closed_set()

    def __contains__(self, p: Point) -> bool:
        return self.generator(p) > 0

    def __or__(self, other):
        return set_union(self, other)

    def __and__(self, other):
        return set_intersect(self, other)

    def __eq__(self, other):
        return isinstance(other, OpenSet) and self.region == other.region

    def __hash__(self):
        return hash(self.region)

    def __repr__(self):
        return f"OpenSet({self.generator!r} > 0)"


class ClosedSet:
    """The sublevel set ``{x : generator(x) <= 0}``."""

    __slots__ = ("generator", "_region")

    def __init__(self, generator: PLFunction):
        self.generator = generator
        self._region = None

    @property
    def graph(self) -> MetricGraph:
        return self.generator.graph

    @property
    def region(self) -> Region:
        if self._region is None:
            self._region = Region.nonpositive(self.generator)
        return self._region

    def complement(self) -> OpenSet:
        return OpenSet(self.generator)

    def is_empty(self) -> bool:
        return extrema(self.generator).min.value > 0

    def __contains__(self, p: Point) -> bool:
        return self.generator(p) <= 0

    def __or__(self, other: ClosedSet) -> ClosedSet:
        return ClosedSet(pl_min(self.generator, other.generator))

    def __and__(self, other: ClosedSet) -> ClosedSet:
        return ClosedSet(pl_max(self.generator, other.generator))

    def __eq__(self, other):
        return isinstance(other, ClosedSet) and self.region == other.region

    def __hash__(self):
        return hash(self.region)

    def __repr__(self):
        return f"ClosedSet({self.generator!r} <= 0)"


def superlevel(f: PLFunction, c=0) -> OpenSet:
    """``{x : f(x) > c}``."""
    return OpenSet(pl_sub(f, c))


def is_empty(U: OpenSet) -> bool:
    return extrema(U.generator).max.value <= 0


def set_union(U: OpenSet, V: OpenSet) -> OpenSet:
    return OpenSet(pl_max(U.generator, V.generator))


def set_intersect(U: OpenSet, V: OpenSet) -> OpenSet:
    return OpenSet(pl_min(U.generator, V.generator))


def set_ops(op: str, U: OpenSet, V: OpenSet) -> OpenSet:
    if op == "union":
        return set_union(U, V)
    if op == "intersect":
        return set_intersect(U, V)
    raise ValueError(f"unknown set operation {op!r}")


def set_contains(V: OpenSet, U: OpenSet) -> bool:
    """Whether ``V ⊆ U``: U's generator is positive wherever V's is."""
    return V.region.issubset(U.region)


@dataclass(frozen=True)
class CoverCheck:
    covered: bool
    witness: Point | None

    def __bool__(self):
        return self.covered


def covers(X: MetricGraph, sets: Sequence[OpenSet]) -> CoverCheck:
    """Whether the sets cover ``X``; otherwise a point no set contains."""
    if not sets:
        p = X.vertex_point(X.vertices[0])
        return CoverCheck(False, p)
    for U in sets:
        if U.graph != X:
            raise GraphError("open set on a different graph")
    top = sets[0].generator
    for U in sets[1:]:
        top = pl_max(top, U.generator)
    ex = extrema(top)
    if ex.min.value > 0:
        return CoverCheck(True, None)
    return CoverCheck(False, ex.argmin)


def open_components(U: OpenSet) -> list[OpenSet]:
    """Connected components of ``U`` as pairwise disjoint open sets."""
    return [c.to_open_set() for c in U.region.components()]


def _dyadic_cuts(e: Edge, depth: int) -> list[Fraction]:
    n = 2**depth
    return [e.length * Fraction(k, n) for k in range(n + 1)]


def mesh_cells(X: MetricGraph, depth: int) -> list[OpenSet]:
    """Open cells at dyadic resolution ``2**-depth`` (relative to each edge).

    Per edge (in declaration order) every open interval between two grid
    points, ordered by left then right endpoint; then, per vertex, the open
    star reaching one grid step into every incident edge end.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    out = []
    all_cuts = {f.id: _dyadic_cuts(f, depth) for f in X.edges.values()}
    for e in X.edges.values():
        cuts = all_cuts[e.id]
        for i in range(len(cuts)):
            for j in range(i + 1, len(cuts)):
                segs = {(e.id, k) for k in range(i, j)}
                pts = {(e.id, k) for k in range(i + 1, j)}
                out.append(Region.from_items(X, all_cuts, pts, segs, set()).to_open_set())
    for v in X.vertices:
        if not X.incident(v):
            continue
        segs = set()
        for eid, end in X.incident(v):
            segs.add((eid, 0) if end == 0 else (eid, 2**depth - 1))
        out.append(Region.from_items(X, all_cuts, set(), segs, {v}).to_open_set())
    return out
