import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, strategies as st

from continua.certified import CertifiedValue
from continua.space import (
    ClosedSet,
    GraphError,
    MetricGraph,
    OpenSet,
    PLFunction,
    PiecewisePoly,
    Region,
    ball,
    circle,
    covers,
    extrema,
    graph_components,
    interval,
    mesh_cells,
    open_components,
    pl_abs,
    pl_add,
    pl_algebra,
    pl_compose,
    pl_eval,
    pl_max,
    pl_min,
    pl_mul,
    pl_scale,
    pl_sub,
    set_contains,
    set_intersect,
    set_ops,
    set_union,
    sup_norm,
    superlevel,
)
from tests._gen import grid_values, pl_on_interval, random_pl

I = interval()
S = circle()
T = PLFunction(I, {"e": [(0, 0), (1, 1)]})
ONE_MINUS_T = PLFunction(I, {"e": [(0, 1), (1, 0)]})


def lin(a, b, X=I):
    """a + b t on the single edge."""
    L = X.edges["e"].length
    return PLFunction(X, {"e": [(0, a), (L, a + b * L)]})


# graphs -----------------------------------------------------------------


def test_graph_validation():
    with pytest.raises(GraphError):
        MetricGraph([], [])
    with pytest.raises(GraphError):
        MetricGraph(["a"], [("e", "a", "b", 1)])
    with pytest.raises(GraphError):
        MetricGraph(["a", "b"], [("e", "a", "b", 0)])
    with pytest.raises(GraphError):
        MetricGraph(["a", "a"], [])


@pytest.mark.parametrize("X, count", [
    (interval(), 1),
    (circle(), 1),
    (MetricGraph("abcd", [("e", "a", "b", 1), ("f", "c", "d", 1)]), 2),
    (MetricGraph("ab", []), 2),
])
def test_graph_components(X, count):
    assert graph_components(X).count == count


def test_points_canonicalise_at_vertices():
    X = MetricGraph("abc", [("e", "a", "b", 1), ("f", "b", "c", 2)])
    assert X.point("e", 1) == X.point("f", 0) == X.vertex_point("b")
    assert X.point("e", F(1, 2)) != X.point("f", F(1, 2))
    assert X.is_arc() and not S.is_arc()
    with pytest.raises(GraphError):
        X.point("e", 2)


# PL functions -------------------------------------------------------------


def test_pl_eval_examples():
    assert pl_eval(T, I.point("e", F(1, 2))) == F(1, 2)
    assert pl_eval(PLFunction.constant(I, 1), I.point("e", F(1, 3))) == 1
    tent = PLFunction(I, {"e": [(0, 0), (F(1, 2), 1), (1, 0)]})
    assert tent(I.point("e", F(1, 4))) == F(1, 2)


def test_continuity_enforced():
    X = MetricGraph("abc", [("e", "a", "b", 1), ("f", "b", "c", 1)])
    with pytest.raises(GraphError):
        PLFunction(X, {"e": [(0, 0), (1, 1)], "f": [(0, 2), (1, 0)]})
    with pytest.raises(GraphError):
        PLFunction(S, {"e": [(0, 0), (1, 1)]})
    with pytest.raises(GraphError):
        PLFunction(I, {"e": [(0, 0), (F(1, 2), 1), (F(1, 2), 0), (1, 0)]})


def test_isolated_vertex_needs_a_value():
    X = MetricGraph("ab", [])
    with pytest.raises(GraphError):
        PLFunction(X, {})
    f = PLFunction(X, {}, isolated={"a": 0, "b": 1})
    assert extrema(f).max.value == 1 and extrema(f).min.value == 0


def test_pl_algebra_examples():
    assert pl_add(T, ONE_MINUS_T) == PLFunction.constant(I, 1)
    assert pl_abs(pl_sub(T, F(1, 2))).pieces["e"] == ((0, F(1, 2)), (F(1, 2), 0), (1, F(1, 2)))
    m = pl_min(T, ONE_MINUS_T)
    assert extrema(m).max.value == F(1, 2)
    assert extrema(m).argmax == I.point("e", F(1, 2))
    assert pl_algebra("max", T, ONE_MINUS_T) == pl_max(T, ONE_MINUS_T)
    with pytest.raises(GraphError):
        pl_add(T, PLFunction.constant(S, 0))


@given(pl_on_interval(), pl_on_interval(), st.fractions(-5, 5, max_denominator=7))
def test_linear_algebra_is_exact_pointwise(f, g, c):
    rng = random.Random(0)
    pts = [I.point("e", F(rng.randint(0, 1000), 1000)) for _ in range(50)]
    add, sub, sc = pl_add(f, g), pl_sub(f, g), pl_scale(f, c)
    lo, hi = pl_min(f, g), pl_max(f, g)
    for p in pts:
        assert add(p) == f(p) + g(p)
        assert sub(p) == f(p) - g(p)
        assert sc(p) == c * f(p)
        assert lo(p) == min(f(p), g(p))
        assert hi(p) == max(f(p), g(p))
        assert pl_abs(f)(p) == abs(f(p))


def test_algebra_exact_on_1000_points():
    rng = random.Random(7)
    f, g = random_pl(rng, I, 6), random_pl(rng, I, 6)
    s = pl_add(f, pl_scale(g, F(-3, 7)))
    for _ in range(1000):
        p = I.point("e", F(rng.randint(0, 10**6), 10**6))
        assert s(p) == f(p) - F(3, 7) * g(p)


def test_products():
    q = pl_mul(T, ONE_MINUS_T)
    assert isinstance(q, PiecewisePoly) and q.degree == 2
    assert extrema(q).max.value == F(1, 4)
    assert extrema(pl_mul(T, PLFunction.constant(I, 0))).max.value == 0
    sq = pl_mul(T, T)
    assert sq(I.point("e", F(1, 2))) == F(1, 4)


def test_quartic_extremum_is_certified():
    sq = pl_mul(T, T)
    quartic = sq - sq * sq
    ex = extrema(quartic)
    assert ex.max.width <= F(1, 10**9)
    assert ex.max.contains(F(1, 4))
    assert ex.min.value == 0


def test_extrema_of_identity():
    ex = extrema(T)
    assert (ex.min.value, ex.max.value) == (0, 1)
    assert ex.argmin == I.vertex_point("0") and ex.argmax == I.vertex_point("1")


@pytest.mark.parametrize("seed", range(100))
def test_sup_norm_matches_grid(seed):
    rng = random.Random(seed)
    f = random_pl(rng, I, 8)
    exact = sup_norm(f).value
    assert abs(float(exact) - np.max(np.abs(grid_values(f)))) <= 1e-3
    assert extrema(pl_abs(f)).max.value == exact


def test_compose():
    tent = PLFunction(I, {"e": [(0, 0), (F(1, 2), 1), (1, 0)]})
    c = pl_compose(tent, T)
    assert c == tent
    c2 = pl_compose(T, tent)
    assert c2 == tent
    sq = pl_compose(tent, tent)
    assert sq(I.point("e", F(1, 4))) == 1 and sq(I.point("e", F(1, 2))) == 0


# open sets --------------------------------------------------------------


def test_superlevel_examples():
    assert not superlevel(T, F(1, 2)).is_empty()
    assert superlevel(T, 2).is_empty()
    assert superlevel(PLFunction.constant(I, 1), 0).region == Region.whole(I)
    assert I.point("e", F(3, 4)) in superlevel(T, F(1, 2))
    assert I.point("e", F(1, 2)) not in superlevel(T, F(1, 2))


def test_set_operations():
    upper = superlevel(T, F(1, 2))
    lower = OpenSet(lin(F(1, 4), -1))
    assert set_intersect(upper, lower).is_empty()
    assert set_union(superlevel(T, F(1, 4)), OpenSet(lin(F(3, 4), -1))).region == Region.whole(I)
    assert set_ops("intersect", upper, upper) == upper
    assert set_ops("union", upper, lower) == set_union(upper, lower)


def test_covers_examples():
    a, b = OpenSet(lin(F(3, 5), -1)), superlevel(T, F(2, 5))
    assert covers(I, [a, b])
    gap = covers(I, [OpenSet(lin(F(2, 5), -1)), superlevel(T, F(3, 5))])
    assert not gap
    assert F(2, 5) <= gap.witness.t <= F(3, 5)
    assert covers(I, [OpenSet(PLFunction.constant(I, 1))])
    assert not covers(I, [])


def test_cover_witness_is_the_midpoint_of_a_symmetric_gap():
    c = covers(I, [OpenSet(lin(F(2, 5), -1)), superlevel(T, F(3, 5))])
    assert c.witness == I.point("e", F(1, 2))


def test_set_contains_examples():
    assert set_contains(superlevel(T, F(1, 2)), superlevel(T, F(1, 4)))
    assert not set_contains(superlevel(T, F(1, 4)), superlevel(T, F(1, 2)))
    assert set_contains(superlevel(T, 5), superlevel(T, F(1, 2)))


@given(pl_on_interval(), st.fractions(-2, 2, max_denominator=5), st.fractions(0, 2, max_denominator=5))
def test_superlevel_monotone(f, c, d):
    if d == 0:
        d = F(1, 3)
    assert set_contains(superlevel(f, c + d), superlevel(f, c))


def _grid_runs(values: np.ndarray, loop: bool = False) -> int:
    pos = values > 0
    if not pos.any():
        return 0
    if pos.all():
        return 1
    starts = int(np.sum(pos[1:] & ~pos[:-1])) + int(pos[0])
    if loop and pos[0] and pos[-1]:
        starts -= 1
    return starts


def test_open_components_examples():
    far = OpenSet(pl_sub(pl_abs(pl_sub(T, F(1, 2))), F(1, 4)))
    assert len(open_components(far)) == 2
    assert len(open_components(superlevel(T, 0))) == 1
    bump = PLFunction(S, {"e": [(0, -1), (F(1, 4), -1), (F(1, 2), 1), (F(3, 4), -1), (1, -1)]})
    assert len(open_components(OpenSet(bump))) == 1
    wrap = PLFunction(S, {"e": [(0, 1), (F(1, 4), -1), (F(3, 4), -1), (1, 1)]})
    assert len(open_components(OpenSet(wrap))) == 1
    assert open_components(superlevel(T, 3)) == []


@given(pl_on_interval(max_breaks=8))
def test_open_components_partition(f):
    U = OpenSet(f)
    comps = open_components(U)
    for i in range(len(comps)):
        for j in range(i + 1, len(comps)):
            assert set_intersect(comps[i], comps[j]).is_empty()
    union = Region.empty(I)
    for c in comps:
        union = union | c.region
    assert union == U.region


@pytest.mark.parametrize("seed", range(40))
def test_open_components_match_flood_fill(seed):
    rng = random.Random(1000 + seed)
    # breakpoints on a coarse grid keep every component wider than the mesh
    # and nonzero values keep float interpolation from misreading a touch
    pts = [(F(k, 20), F(rng.choice([-3, -1, 1, 3]), 2)) for k in range(21)]
    f = PLFunction(I, {"e": pts})
    assert len(open_components(OpenSet(f))) == _grid_runs(grid_values(f))


def test_touching_zero_splits_a_component():
    f = PLFunction(I, {"e": [(0, 1), (F(1, 2), 0), (1, 1)]})
    assert len(open_components(OpenSet(f))) == 2


@pytest.mark.parametrize("seed", range(100))
def test_covers_matches_grid(seed):
    rng = random.Random(500 + seed)
    sets = [OpenSet(random_pl(rng, I, 4)) for _ in range(rng.randint(1, 4))]
    top = np.max([grid_values(U.generator) for U in sets], axis=0)
    exact = bool(covers(I, sets))
    # the grid can only disagree when the cover is tight to within the mesh
    tight = abs(float(extrema(_pointwise_max(sets)).min.value)) < 1e-3
    assert exact == bool(np.all(top > 0)) or tight


def _pointwise_max(sets):
    out = sets[0].generator
    for U in sets[1:]:
        out = pl_max(out, U.generator)
    return out


def test_closed_sets():
    C = ClosedSet(pl_sub(T, F(1, 2)))
    assert I.point("e", F(1, 2)) in C and I.point("e", F(3, 4)) not in C
    assert C.complement() == superlevel(T, F(1, 2))
    assert C.region.is_closed() and not C.region.is_open()


# regions ------------------------------------------------------------------


def test_region_algebra():
    U = superlevel(T, F(1, 2)).region
    assert U.is_open() and not U.is_closed()
    assert U.closure() == ClosedSet(F(1, 2) - T).region
    assert U.boundary().finite_points() == [I.point("e", F(1, 2))]
    assert U.closure().interior() == U
    assert (U | U.complement()) == Region.whole(I)
    assert (U & U.complement()).is_empty()


def test_ball():
    B = ball(I, I.point("e", F(1, 2)), F(1, 8))
    assert B.contains(I.point("e", F(9, 16))) and not B.contains(I.point("e", F(5, 8)))
    V = ball(S, S.vertex_point("o"), F(1, 8))
    assert V.contains(S.point("e", F(15, 16))) and V.contains(S.point("e", F(1, 16)))
    assert len(V.components()) == 1
    with pytest.raises(ValueError):
        ball(I, I.point("e", F(1, 2)), F(1, 2))


def test_open_generator_round_trip():
    R = superlevel(pl_mul_free_tent(), 0).region
    assert R.open_generator() is not None
    assert R.to_open_set().region == R


def pl_mul_free_tent():
    return PLFunction(I, {"e": [(0, -1), (F(1, 3), 1), (F(2, 3), -1), (1, 1)]})


# mesh cells ---------------------------------------------------------------


def test_mesh_cells_depth_one():
    cells = mesh_cells(I, 1)
    regions = [c.region for c in cells]
    for a, b in [(F(0), F(1, 2)), (F(1, 2), F(1)), (F(0), F(1))]:
        pts = {F(0): F(-1), F(1): F(-1), a: F(0), b: F(0), (a + b) / 2: F(1)}
        assert Region.positive(PLFunction(I, {"e": sorted(pts.items())})) in regions
    stars = [r for r in regions if r.vertices]
    assert len(stars) == 2 and len(cells) == 5


def test_mesh_cells_grow_and_are_normal_form():
    counts = [len(mesh_cells(I, d)) for d in (1, 2, 3)]
    assert counts[0] < counts[1] < counts[2]
    for c in mesh_cells(S, 2):
        assert Region.positive(c.generator) == c.region
    with pytest.raises(ValueError):
        mesh_cells(I, 0)


def test_certified_value_is_reported_for_sup_norm():
    assert sup_norm(T) == CertifiedValue.exact(1)
