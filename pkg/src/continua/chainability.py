"""Chainability formulas, cover nerves, chain search and the two witness
constructions relating them.

``psi0``, ``psi1``, ``psi2`` and ``sigma_inner`` evaluate the formulas on
concrete PL tuples.  ``build_witness`` turns a chain refinement of
``{f_i > eps}`` into functions ``g''`` that make the inner formula small;
``extract_chain`` goes the other way, reading a chain refinement of
``{f_i > 0}`` off any such witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from pysat.solvers import Solver

from .certified import DEFAULT_WIDTH, CertifiedValue, as_fraction, cmax, cmin
from .space import (
    MetricGraph,
    OpenSet,
    PLFunction,
    Region,
    GraphError,
    ball,
    covers,
    extrema,
    is_empty,
    pl_abs,
    pl_min,
    pl_mul,
    pl_scale,
    pl_sub,
    pl_sum,
    set_contains,
    set_intersect,
    sup_norm,
    superlevel,
)

__all__ = [
    "ChainCertificate",
    "ChainError",
    "Cover",
    "CoverError",
    "Exhausted",
    "Nerve",
    "Witness",
    "WitnessError",
    "build_witness",
    "extract_chain",
    "find_chain_refinement",
    "nerve_and_is_chain",
    "prune_chain",
    "psi0",
    "psi1",
    "psi2",
    "refines",
    "search_chain_refinement",
    "sigma_inner",
]


class CoverError(ValueError):
    """The sets do not cover the graph; ``witness`` is an uncovered point."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ChainError(ValueError):
    """A chain condition failed (also raised for connectedness violations)."""


class WitnessError(ValueError):
    """A hypothesis or an internal check of a witness construction failed."""


# ---------------------------------------------------------------------------
# the formulas


def _check_graph(fs: Sequence[PLFunction]):
    graph = fs[0].graph
    for f in fs[1:]:
        if f.graph != graph:
            raise GraphError("functions live on different graphs")
    return graph


def psi0(fs: Sequence[PLFunction]) -> CertifiedValue:
    """``‖S‖ − ‖ ‖S‖ − S ‖`` for ``S = Σ|f_i|``, which is ``min S``."""
    if not fs:
        raise ValueError("psi0 needs at least one function")
    _check_graph(fs)
    s = pl_sum([pl_abs(f) for f in fs])
    top = sup_norm(s).value
    return CertifiedValue.exact(top - sup_norm(pl_sub(PLFunction.constant(s.graph, top), s)).value)


def psi1(gs: Sequence[PLFunction], width=DEFAULT_WIDTH) -> CertifiedValue:
    """Largest ``√‖g_i g_j‖`` over index pairs at distance two or more (0 if none)."""
    if gs:
        _check_graph(gs)
    best = CertifiedValue.exact(0)
    for i in range(len(gs)):
        for j in range(i + 2, len(gs)):
            best = cmax(best, sup_norm(pl_mul(gs[i], gs[j])).sqrt(width))
    return best


def _check_h(fs, gs, hs):
    if len(hs) != len(gs) or any(len(row) != len(fs) for row in hs):
        raise ValueError(f"h must be an {len(gs)}x{len(fs)} matrix indexed h[j][i]")


def psi2(fs: Sequence[PLFunction], gs: Sequence[PLFunction], hs) -> CertifiedValue:
    """``max_j min_i ‖(|f_i| − |g_j|) − |h[j][i]|‖``."""
    if not fs or not gs:
        raise ValueError("psi2 needs nonempty f and g")
    _check_h(fs, gs, hs)
    _check_graph(list(fs) + list(gs) + [h for row in hs for h in row])
    best = None
    for j, g in enumerate(gs):
        ag = pl_abs(g)
        row = min(
            sup_norm(pl_sub(pl_sub(pl_abs(f), ag), pl_abs(hs[j][i]))).value for i, f in enumerate(fs)
        )
        best = row if best is None else max(best, row)
    return CertifiedValue.exact(best)


@dataclass
class Witness:
    """Functions ``g`` (length m) and ``h`` (m×k, ``h[j][i]``) plus parameters.

    ``eps`` is the threshold read by ``extract_chain``; ``eps_prime`` and
    ``delta`` record the forward construction and may be ``None``.
    """

    m: int
    g: list
    h: list
    eps: Fraction
    eps_prime: Fraction | None = None
    delta: Fraction | None = None
    assignment: list | None = None
    trace: dict | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.m != len(self.g) or self.m < 1:
            raise ValueError("m must equal the number of g functions and be at least 1")
        self.eps = as_fraction(self.eps)
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.eps_prime is not None:
            self.eps_prime = as_fraction(self.eps_prime)
        if self.delta is not None:
            self.delta = as_fraction(self.delta)


def sigma_parts(fs: Sequence[PLFunction], w: Witness, width=DEFAULT_WIDTH) -> dict:
    """Each ingredient of the inner formula, with ``dagger`` the inner max."""
    k, m = len(fs), w.m
    p0f = psi0(fs)
    p0g = psi0(w.g)
    p1 = psi1(w.g, width / (2 * m))
    p2 = psi2(fs, w.g, w.h)
    gap = p0f.dotminus(p0g.scale(k))
    dagger = cmax(gap, p1.scale(m), p2.scale(m))
    return {"psi0_f": p0f, "psi0_g": p0g, "psi1": p1, "psi2": p2, "gap": gap,
            "dagger": dagger, "value": cmin(p0f, dagger)}


def sigma_inner(fs: Sequence[PLFunction], w: Witness, width=DEFAULT_WIDTH) -> CertifiedValue:
    """``min(ψ₀(f), max(ψ₀(f) ∸ kψ₀(g), mψ₁(g), mψ₂(f, g, h)))``.

    Any witness gives an upper bound on the infimum over witnesses.
    """
    _check_h(fs, w.g, w.h)
    return sigma_parts(fs, w, width)["value"]


# ---------------------------------------------------------------------------
# covers, nerves, refinement


class Cover:
    """An ordered finite open cover of a graph."""

    def __init__(self, graph: MetricGraph, sets: Sequence[OpenSet]):
        self.graph = graph
        self.sets = list(sets)
        check = covers(graph, self.sets)
        if not check:
            raise CoverError(f"not a cover: {check.witness} is in no set", check.witness)

    def __len__(self):
        return len(self.sets)

    def __getitem__(self, i):
        return self.sets[i]

    def __iter__(self):
        return iter(self.sets)


@dataclass(frozen=True)
class Nerve:
    size: int
    edges: frozenset  # pairs (i, j), i < j, zero-based

    def neighbours(self, i: int) -> list[int]:
        return sorted({b for a, b in self.edges if a == i} | {a for a, b in self.edges if b == i})


@dataclass(frozen=True)
class ChainCheck:
    nerve: Nerve
    is_chain: bool
    violation: tuple | None  # (i, j, "missing" | "long-range"), zero-based

    def __bool__(self):
        return self.is_chain


def nerve(sets: Sequence[OpenSet]) -> Nerve:
    edges = set()
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not is_empty(set_intersect(sets[i], sets[j])):
                edges.add((i, j))
    return Nerve(len(sets), frozenset(edges))


def nerve_and_is_chain(C: Cover | Sequence[OpenSet]) -> ChainCheck:
    """The nerve and whether it is exactly the path 1–2–…–m."""
    sets = C.sets if isinstance(C, Cover) else list(C)
    N = nerve(sets)
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            adjacent = j == i + 1
            if adjacent and (i, j) not in N.edges:
                return ChainCheck(N, False, (i, j, "missing"))
            if not adjacent and (i, j) in N.edges:
                return ChainCheck(N, False, (i, j, "long-range"))
    return ChainCheck(N, True, None)


@dataclass(frozen=True)
class Refinement:
    assignment: tuple | None  # j -> minimal i, zero-based
    failed: int | None

    def __bool__(self):
        return self.assignment is not None


def refines(V: Cover | Sequence[OpenSet], U: Cover | Sequence[OpenSet]) -> Refinement:
    """Map each ``V_j`` to the least ``i`` with ``V_j ⊆ U_i``."""
    vs = V.sets if isinstance(V, Cover) else list(V)
    us = U.sets if isinstance(U, Cover) else list(U)
    out = []
    for j, v in enumerate(vs):
        i = next((i for i, u in enumerate(us) if set_contains(v, u)), None)
        if i is None:
            return Refinement(None, j)
        out.append(i)
    return Refinement(tuple(out), None)


@dataclass
class ChainCertificate:
    """An ordered chain cover, optionally refining a target cover."""

    chain: list
    assignment: tuple | None = None
    target: list | None = None
    depth: int | None = None

    @property
    def graph(self) -> MetricGraph:
        return self.chain[0].graph

    def verify(self) -> list[str]:
        """Re-check everything from scratch; returns the list of failures."""
        problems = []
        if not self.chain:
            return ["empty chain"]
        for j, V in enumerate(self.chain):
            if V.is_empty():
                problems.append(f"link {j + 1} is empty")
        cover = covers(self.graph, self.chain)
        if not cover:
            problems.append(f"chain misses {cover.witness}")
        check = nerve_and_is_chain(self.chain)
        if not check:
            i, j, kind = check.violation
            problems.append(f"links {i + 1} and {j + 1}: {kind} intersection")
        if self.target is not None:
            if self.assignment is None or len(self.assignment) != len(self.chain):
                problems.append("assignment does not match the chain")
            else:
                ref = refines(self.chain, self.target)
                if not ref:
                    problems.append(f"link {ref.failed + 1} lies in no target set")
                elif tuple(ref.assignment) != tuple(self.assignment):
                    problems.append("assignment is not the minimal one")
        return problems

    @property
    def ok(self) -> bool:
        return not self.verify()


# ---------------------------------------------------------------------------
# chain search over the finite mesh space


@dataclass(frozen=True)
class Exhausted:
    """No chain refinement is built from cells of this depth."""

    depth: int

    def __bool__(self):
        return False


class _Mesh:
    """The finite space of vertices, grid points and open grid segments.

    Open sets of this space are exactly the unions of open mesh cells.
    """

    def __init__(self, X: MetricGraph, depth: int):
        self.X, self.depth, self.n = X, depth, 2**depth
        self.elements: list[tuple] = []
        index = {}

        def add(el):
            index[el] = len(self.elements)
            self.elements.append(el)

        for v in X.vertices:
            add(("v", v))
        for eid in X.edges:
            for k in range(1, self.n):
                add(("p", eid, k))
            for k in range(self.n):
                add(("s", eid, k))
        self.index = index
        self.adjacent: list[tuple[int, int]] = []
        for eid, e in X.edges.items():
            for k in range(self.n):
                s = index[("s", eid, k)]
                left = ("v", e.u) if k == 0 else ("p", eid, k)
                right = ("v", e.v) if k == self.n - 1 else ("p", eid, k + 1)
                self.adjacent.append((index[left], s))
                self.adjacent.append((index[right], s))
        self.is_point = [el[0] != "s" for el in self.elements]

    def diameter_bound(self) -> int:
        """Upper bound on the diameter of the adjacency graph (exact when small)."""
        nbrs = [[] for _ in self.elements]
        for a, b in self.adjacent:
            nbrs[a].append(b)
            nbrs[b].append(a)

        def ecc(src):
            dist = {src: 0}
            frontier = [src]
            while frontier:
                nxt = []
                for a in frontier:
                    for b in nbrs[a]:
                        if b not in dist:
                            dist[b] = dist[a] + 1
                            nxt.append(b)
                frontier = nxt
            return max(dist.values())

        if len(self.elements) <= 600:
            return max(ecc(e) for e in range(len(self.elements)))
        return 2 * ecc(0)

    def cuts(self):
        return {eid: [e.length * Fraction(k, self.n) for k in range(self.n + 1)] for eid, e in self.X.edges.items()}

    def region(self, members) -> Region:
        pts, segs, verts = set(), set(), set()
        for i in members:
            el = self.elements[i]
            if el[0] == "v":
                verts.add(el[1])
            elif el[0] == "p":
                pts.add((el[1], el[2]))
            else:
                segs.add((el[1], el[2]))
        return Region.from_items(self.X, self.cuts(), pts, segs, verts)

    def labels(self, sets: Sequence[OpenSet]) -> list[set]:
        """For each element, the indices of the sets containing it."""
        out = [set() for _ in self.elements]
        grid = self.cuts()
        for i, U in enumerate(sets):
            r = U.region
            for v in r.vertices:
                if ("v", v) in self.index:
                    out[self.index[("v", v)]].add(i)
            for eid, cuts in grid.items():
                c = r.cells[eid].refine(cuts)
                where = {t: n for n, t in enumerate(c.cuts)}
                at = [where[t] for t in cuts]
                for k in range(1, self.n):
                    if c.points[at[k]]:
                        out[self.index[("p", eid, k)]].add(i)
                for k in range(self.n):
                    lo, hi = at[k], at[k + 1]
                    if all(c.segments[lo:hi]) and all(c.points[lo + 1:hi]):
                        out[self.index[("s", eid, k)]].add(i)
        return out


class _ChainSAT:
    """Order-encoded search for a Lipschitz position map onto ``0..H-1``.

    Element ``e`` sits at position ``pos(e)``; link ``j`` collects positions
    ``2j-1, 2j, 2j+1``.  Adjacent elements differ by at most one position and
    points sit at even positions, which makes every link open, consecutive
    links meet exactly in the odd positions, and links two apart disjoint.
    """

    def __init__(self, mesh: _Mesh, labels, k: int, H: int, *, hit: str, segment_first: bool):
        self.mesh, self.labels, self.k, self.H = mesh, labels, k, H
        N = len(mesh.elements)
        self.nvars = 0
        self.le = [[self._new() for _ in range(H - 1)] for _ in range(N)]
        self.m = (H + 1) // 2
        self.lab = [[self._new() for _ in range(k)] for _ in range(self.m)]
        self.clauses = []
        self._encode(hit, segment_first)

    def _new(self):
        self.nvars += 1
        return self.nvars

    def _le(self, e, h):
        # literal for pos(e) <= h, or a constant
        if h < 0:
            return False
        if h >= self.H - 1:
            return True
        return self.le[e][h]

    def _at_clause(self, e, h):
        """Literals whose disjunction says ``pos(e) != h``."""
        lits = []
        a, b = self._le(e, h), self._le(e, h - 1)
        if a is False or b is True:
            return None  # already impossible
        if a is not True:
            lits.append(-a)
        if b is not False:
            lits.append(b)
        return lits

    def _links_of(self, h):
        return [h // 2] if h % 2 == 0 else [(h - 1) // 2, (h + 1) // 2]

    def _encode(self, hit, segment_first):
        H, C = self.H, self.clauses
        N = len(self.mesh.elements)
        for e in range(N):
            for h in range(H - 2):
                C.append([-self.le[e][h], self.le[e][h + 1]])
        for a, b in self.mesh.adjacent:
            for x, y in ((a, b), (b, a)):
                for h in range(H - 2):
                    C.append([-self.le[x][h], self.le[y][h + 1]])
        has_neighbour = [False] * N
        for a, b in self.mesh.adjacent:
            has_neighbour[a] = has_neighbour[b] = True
        for e in range(N):
            if self.mesh.is_point[e] and has_neighbour[e]:
                for h in range(1, H, 2):
                    cl = self._at_clause(e, h)
                    if cl is not None:
                        C.append(cl)
            missing = [i for i in range(self.k) if i not in self.labels[e]]
            if not missing:
                continue
            for h in range(H):
                base = self._at_clause(e, h)
                if base is None:
                    continue
                for j in self._links_of(h):
                    for i in missing:
                        C.append(base + [-self.lab[j][i]])
        for j in range(self.m):
            C.append([self.lab[j][i] for i in range(self.k)])
        if hit == "all":
            for h in range(H):
                # some element sits exactly at h
                lits = []
                for e in range(N):
                    x = self._new()
                    # x -> pos(e) <= h and pos(e) > h - 1
                    le_h, le_prev = self._le(e, h), self._le(e, h - 1)
                    if le_h is False or le_prev is True:
                        C.append([-x])
                    else:
                        if le_h is not True:
                            C.append([-x, le_h])
                        if le_prev is not False:
                            C.append([-x, -le_prev])
                    lits.append(x)
                C.append(lits)
        else:
            bottom = [e for e in range(N) if not segment_first or not self.mesh.is_point[e]]
            C.append([self.le[e][0] for e in bottom] if H > 1 else [])
            if hit == "ends" and H > 1:
                C.append([-self.le[e][H - 2] for e in range(N)])

    def solve(self):
        with Solver(name="cadical153", bootstrap_with=self.clauses) as s:
            if not s.solve():
                return None
            model = set(l for l in s.get_model() if l > 0)
        N = len(self.mesh.elements)
        pos = []
        for e in range(N):
            h = next((h for h in range(self.H - 1) if self.le[e][h] in model), self.H - 1)
            pos.append(h)
        labs = [[i for i in range(self.k) if self.lab[j][i] in model] for j in range(self.m)]
        return pos, labs


def _decode(mesh: _Mesh, pos, used: int) -> list[OpenSet]:
    top = max(pos)
    m = top // 2 + 1 if top % 2 == 0 else (top + 1) // 2 + 1
    links = []
    for j in range(min(m, used)):
        members = [e for e, h in enumerate(pos) if 2 * j - 1 <= h <= 2 * j + 1]
        links.append(mesh.region(members).to_open_set())
    return links


def _search_at_depth(U: Sequence[OpenSet], depth: int, segment_first: bool = False):
    X = U[0].graph
    mesh = _Mesh(X, depth)
    labels = mesh.labels(U)
    # every link is open, so the star of each element must fit in one set
    stars = [set(lab) for lab in labels]
    for a, b in mesh.adjacent:
        stars[a] &= labels[b]
    if any(not st for st in stars):
        return None
    k = len(U)
    common = set.intersection(*labels)
    if common:
        return [mesh.region(range(len(mesh.elements))).to_open_set()]
    N = len(mesh.elements)
    connected = X.is_connected
    M = (N + 1) // 2
    hit = "ends" if connected else "all"
    arc = X.is_arc()
    if arc:
        # On an arc the open mesh interiors of the components of the U_i
        # cover once every star fits in a set, and a minimal subcover of
        # these intervals is a chain; so a chain with that many links exists.
        M = min(M, sum(len(V.region.components()) for V in U))
    for m in range(2, M + 1):
        if m == _RELAXED_AFTER and connected and not arc:
            # one call covering every remaining length: a chain needs at most
            # diam + 1 positions, and any chain fits when the top is optional
            H = min(2 * M - 1, mesh.diameter_bound() + 1)
            if _ChainSAT(mesh, labels, k, H, hit="bottom", segment_first=False).solve() is None:
                break
        sol = _ChainSAT(mesh, labels, k, 2 * m - 1, hit=hit, segment_first=segment_first).solve()
        if sol is not None:
            return _decode(mesh, sol[0], m)
    if segment_first:
        return _search_at_depth(U, depth, False)
    if arc:
        raise ChainError("labelled arc mesh without a chain refinement")
    return None


_RELAXED_AFTER = 8


def find_chain_refinement(U: Cover | Sequence[OpenSet], depth: int, *, segment_first: bool = False,
                          keep_chains: bool = True):
    """A verified chain refinement built from depth-``depth`` mesh cells.

    Returns ``U`` itself when it is already a chain.  Otherwise chains are
    tried shortest first; ``Exhausted(depth)`` means no ordering of unions of
    cells at this depth is a chain refining ``U``.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    sets = U.sets if isinstance(U, Cover) else list(U)
    if not isinstance(U, Cover):
        Cover(sets[0].graph, sets)
    if keep_chains and nerve_and_is_chain(sets) and not any(V.is_empty() for V in sets):
        cert = ChainCertificate(list(sets), tuple(refines(sets, sets).assignment), list(sets), depth)
        return cert
    links = _search_at_depth(sets, depth, segment_first)
    if links is None:
        return Exhausted(depth)
    ref = refines(links, sets)
    cert = ChainCertificate(links, ref.assignment, list(sets), depth)
    problems = cert.verify()
    if problems:
        raise ChainError("search produced an invalid chain: " + "; ".join(problems))
    return cert


def search_chain_refinement(U, max_depth: int, *, min_depth: int = 1, segment_first: bool = False,
                            keep_chains: bool = True):
    """``find_chain_refinement`` at increasing depths; the last result is returned."""
    result = Exhausted(min_depth)
    for d in range(min_depth, max_depth + 1):
        result = find_chain_refinement(U, d, segment_first=segment_first, keep_chains=keep_chains)
        if result:
            return result
    return result


# ---------------------------------------------------------------------------
# backward direction: witness -> chain


def prune_chain(W: Sequence[OpenSet]) -> list[OpenSet]:
    """Drop the side of each disjoint consecutive pair that is not needed.

    Requires a cover without long-range intersections.  On a connected
    graph exactly one of the prefix and the suffix covers.
    """
    W = list(W)
    if not W:
        raise ChainError("nothing to prune")
    X = W[0].graph
    if not covers(X, W):
        raise CoverError("the sets do not cover the graph")
    check = nerve_and_is_chain(W)
    if check.violation and check.violation[2] == "long-range":
        i, j, _ = check.violation
        raise ChainError(f"links {i + 1} and {j + 1} intersect at long range")
    while True:
        gap = next(
            (i for i in range(len(W) - 1) if is_empty(set_intersect(W[i], W[i + 1]))), None
        )
        if gap is None:
            return W
        prefix, suffix = W[: gap + 1], W[gap + 1:]
        left, right = bool(covers(X, prefix)), bool(covers(X, suffix))
        if left == right:
            raise ChainError(
                "connectedness violation: "
                + ("both sides cover" if left else "neither side covers")
                + f" at the split after link {gap + 1}"
            )
        W = prefix if left else suffix


def extract_chain(fs: Sequence[PLFunction], w: Witness, *, check_hypotheses: bool = True,
                  width=DEFAULT_WIDTH) -> ChainCertificate:
    """Chain refinement of ``{f_i > 0}`` from the superlevel sets ``{g_j > ε/2m}``."""
    k, m = len(fs), w.m
    X = _check_graph(list(fs) + list(w.g))
    if check_hypotheses:
        p0 = psi0(fs)
        if not p0.lower > k * w.eps:
            raise WitnessError(f"hypothesis psi0(f) > k*eps fails: {p0} <= {k * w.eps}")
        sigma = sigma_inner(fs, w, width)
        if not sigma.upper < w.eps / 2:
            raise WitnessError(f"hypothesis sigma_inner < eps/2 fails: {sigma} vs {w.eps / 2}")
    U = [superlevel(f, 0) for f in fs]
    W = [superlevel(g, w.eps / (2 * m)) for g in w.g]
    cover = covers(X, W)
    if not cover:
        raise WitnessError(f"the sets {{g_j > eps/2m}} miss {cover.witness}")
    ref = refines(W, U)
    if not ref:
        raise WitnessError(f"set {ref.failed + 1} lies in no {{f_i > 0}}")
    check = nerve_and_is_chain(W)
    if check.violation and check.violation[2] == "long-range":
        i, j, _ = check.violation
        raise WitnessError(f"sets {i + 1} and {j + 1} intersect at long range")
    chain = prune_chain(W)
    cert = ChainCertificate(chain, refines(chain, U).assignment, U)
    problems = cert.verify()
    if problems:
        raise WitnessError("; ".join(problems))
    return cert


# ---------------------------------------------------------------------------
# forward direction: chain -> witness


def _union(regions, X):
    out = Region.empty(X)
    for r in regions:
        out = out | r
    return out


def _zone(X, points, r):
    out = Region.empty(X)
    for p in points:
        out = out | ball(X, p, r)
    return out


def _build_zones(X, W, max_halvings=64):
    """Neighbourhoods ``Z_j`` of ``bd(W_j) ∩ W_{j-1}`` (``Z_1`` and ``Z_{m+1}`` empty)."""
    m = len(W)
    empty = Region.empty(X)
    centres = [[]] + [(W[j].boundary() & W[j - 1]).finite_points() for j in range(1, m)] + [[]]
    r = min(e.length for e in X.edges.values()) / 4
    for _ in range(max_halvings):
        try:
            Z = [empty] + [_zone(X, centres[j], r) for j in range(1, m)] + [empty]
        except ValueError:
            r /= 2
            continue
        ok = True
        for j in range(1, m):
            cz = Z[j].closure()
            if not Z[j].issubset(W[j - 1] | W[j]):
                ok = False
            elif j + 1 < m and not (cz & W[j + 1].closure()).is_empty():
                ok = False
            elif not (cz & Z[j + 1].closure()).is_empty():
                ok = False
            if not ok:
                break
        if ok and m >= 2:
            outside = W[0] - (Z[1].closure() | W[1])
            ok = not outside.is_empty()
        if ok:
            return Z, r
        r /= 2
    raise WitnessError("could not shrink the zones Z_j to satisfy their conditions")


def build_witness(fs: Sequence[PLFunction], delta, *, max_depth: int = 10,
                  width=DEFAULT_WIDTH) -> Witness:
    """Witness ``(g'', h)`` with small inner formula from a chain refinement of ``{f_i > ε}``."""
    delta = as_fraction(delta)
    fs = list(fs)
    if not fs:
        raise ValueError("need at least one function")
    X = _check_graph(fs)
    if not X.is_arc():
        raise WitnessError("the graph must be an arc")
    for i, f in enumerate(fs):
        if extrema(f).min.value < 0:
            raise WitnessError(f"f_{i + 1} takes negative values")
    k = len(fs)
    p0 = psi0(fs).value
    if not (delta > 0 and p0 > delta):
        raise WitnessError(f"need psi0(f) > delta > 0, got psi0 = {p0}, delta = {delta}")
    eps = (p0 - delta) / k + delta / (3 * k)
    eps_p = eps + delta / (3 * k)
    U = [superlevel(f, eps) for f in fs]
    # the construction needs a shortest chain whose first link reaches past the second
    cert = search_chain_refinement(U, max_depth, segment_first=True, keep_chains=False)
    if not cert:
        raise WitnessError(f"no chain refinement of {{f_i > eps}} up to depth {max_depth}")
    links, assign = cert.chain, cert.assignment
    m = len(links)
    W = [V.region for V in links]
    cap = (eps + eps_p) / 2
    g = [pl_min(fs[assign[j]], cap) for j in range(m)]

    whole = Region.whole(X)
    Z, radius = _build_zones(X, W) if m >= 2 else ([Region.empty(X)] * 2, None)
    later = [_union(W[j + 1:], X) for j in range(m)]
    N = [Z[j] | Z[j + 1] | (W[j] - later[j].closure()) for j in range(m)]
    M = [W[j].closure() & later[j].complement() for j in range(m)]
    if _union(M, X) != whole:
        raise WitnessError("the sets M_j do not cover the graph")
    for i in range(m):
        if not M[i].issubset(N[i]):
            raise WitnessError(f"M_{i + 1} is not inside N_{i + 1}")
        for j in range(i + 2, m):
            if not (N[i] & N[j]).is_empty():
                raise WitnessError(f"N_{i + 1} and N_{j + 1} intersect")

    g2 = []
    for j in range(m):
        rho = N[j].open_generator()
        span = M[j].range_of(rho)
        top = extrema(rho).max.value
        if span is not None:
            lam = 1 / span[0]
        elif top > 0:
            lam = 1 / top
        else:
            lam = Fraction(0)
        bump = pl_min(pl_scale(rho, lam), 1)
        g2.append(pl_min(g[j], pl_scale(bump, eps_p)))
    h = [[pl_sub(fs[i], g2[j]) if i == assign[j] else PLFunction.constant(X, 0) for i in range(k)]
         for j in range(m)]
    w = Witness(m, g2, h, eps, eps_p, delta, list(assign),
                trace={"W": W, "Z": Z, "N": N, "M": M, "radius": radius, "depth": cert.depth})

    p0g = psi0(g2).value
    if not (eps <= p0g < eps_p):
        raise WitnessError(f"psi0(g'') = {p0g} is outside [eps, eps')")
    parts = sigma_parts(fs, w, width)
    if parts["psi1"].upper != 0:
        raise WitnessError(f"(dagger) fails: psi1 = {parts['psi1']}")
    if parts["psi2"].upper != 0:
        raise WitnessError(f"(dagger) fails: psi2 = {parts['psi2']}")
    if not parts["gap"].upper < delta:
        raise WitnessError(f"(dagger) fails: psi0(f) -. k psi0(g'') = {parts['gap']}")
    return w
