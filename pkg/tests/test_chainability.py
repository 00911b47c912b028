import random
import time
from collections import deque
from fractions import Fraction as F

import numpy as np
import pytest

from continua.chainability import (
    ChainCertificate,
    ChainError,
    Cover,
    CoverError,
    Exhausted,
    Witness,
    WitnessError,
    build_witness,
    extract_chain,
    find_chain_refinement,
    nerve,
    nerve_and_is_chain,
    prune_chain,
    psi0,
    psi1,
    psi2,
    refines,
    search_chain_refinement,
    sigma_inner,
    sigma_parts,
)
from continua.certified import CertifiedValue
from continua.space import (
    MetricGraph,
    OpenSet,
    PLFunction,
    Region,
    circle,
    covers,
    extrema,
    interval,
    mesh_cells,
    pl_abs,
    pl_mul,
    pl_sum,
    set_contains,
)
from tests._gen import bump_tuple, grid_values, kink_grid, random_pl

I = interval()
S = circle()
T = PLFunction(I, {"e": [(0, 0), (1, 1)]})
ONE_MINUS_T = PLFunction(I, {"e": [(0, 1), (1, 0)]})
ZERO = PLFunction.constant(I, 0)
ONE = PLFunction.constant(I, 1)


def arc(a, b, X=I):
    """Open sub-arc (a, b) of a one-edge graph, relatively open at the ends."""
    e = X.edges["e"]
    L, loop = e.length, e.u == e.v
    mid, half = (a + b) / 2, (b - a) / 2

    def value(t):
        d = abs(t - mid)
        if loop:
            d = min(d % L, L - d % L)
        elif (a <= 0 and t <= mid) or (b >= L and t >= mid):
            d = 0
        return 1 - d / half

    ts = {F(0), L} | {x % L if loop else x for x in (a, b, mid) if loop or 0 <= x <= L}
    return OpenSet(PLFunction(X, {"e": [(t, value(t)) for t in sorted(ts)]}))


TRIANGLE = [arc(F(0), F(1, 2)), arc(F(1, 4), F(3, 4)), arc(F(2, 5), F(1))]
CIRCLE3 = [arc(c - F(1, 4), c + F(1, 4), S) for c in (F(0), F(1, 3), F(2, 3))]


# formulas -------------------------------------------------------------------


def test_psi0_examples():
    assert psi0([ONE]).value == 1
    assert psi0([T]).value == 0
    assert psi0([T, ONE_MINUS_T]).value == 1
    with pytest.raises(ValueError):
        psi0([])


@pytest.mark.parametrize("seed", range(100))
def test_psi0_is_min_of_sum_and_matches_grid(seed):
    rng = random.Random(seed)
    fs = [random_pl(rng, I, 5) for _ in range(rng.randint(1, 4))]
    s = pl_sum([pl_abs(f) for f in fs])
    assert psi0(fs).value == extrema(s).min.value
    grid = np.sum([np.abs(grid_values(f)) for f in fs], axis=0)
    assert abs(float(psi0(fs).value) - grid.min()) <= 1e-3


def test_psi1_examples():
    assert psi1([T, ONE_MINUS_T]).value == 0
    assert psi1([ONE, T, ONE]).value == 1
    g1 = PLFunction(I, {"e": [(0, 1), (F(2, 5), 0), (1, 0)]})
    g3 = PLFunction(I, {"e": [(0, 0), (F(3, 5), 0), (1, 1)]})
    assert psi1([g1, ONE, g3]).value == 0
    assert psi1([g3, ONE, g3]).value == 1
    assert psi1([]).value == 0


@pytest.mark.parametrize("seed", range(50))
def test_psi1_zero_iff_far_products_vanish(seed):
    rng = random.Random(seed)
    m = rng.randint(3, 5)
    if seed % 2:
        # engineered disjoint supports: bumps on consecutive fifths
        gs = [bump_tuple(rng, m)[j] for j in range(m)]
    else:
        gs = [random_pl(rng, I, 3, 0, 5, 5) for _ in range(m)]
    vanish = all(extrema(pl_mul(gs[i], gs[j])).max.value == 0 and extrema(pl_mul(gs[i], gs[j])).min.value == 0
                 for i in range(m) for j in range(i + 2, m))
    assert (psi1(gs).upper == 0) == vanish
    for i in range(m):
        for j in range(i + 2, m):
            prod = np.abs(grid_values(gs[i]) * grid_values(gs[j]))
            assert psi1(gs).upper + 1e-3 >= np.sqrt(prod.max())


def test_psi2_examples():
    assert psi2([T, ONE], [T, ONE], [[ZERO, ZERO], [ZERO, ZERO]]).value == 0
    assert psi2([ONE], [ZERO], [[ZERO]]).value == 1
    half = PLFunction(I, {"e": [(0, 0), (1, F(1, 2))]})
    assert psi2([T], [half], [[half]]).value == 0
    with pytest.raises(ValueError):
        psi2([T], [T], [[ZERO, ZERO]])


@pytest.mark.parametrize("seed", range(100))
def test_psi2_matches_grid(seed):
    rng = random.Random(300 + seed)
    k, m = rng.randint(1, 3), rng.randint(1, 3)
    fs = [random_pl(rng, I, 3) for _ in range(k)]
    gs = [random_pl(rng, I, 3) for _ in range(m)]
    hs = [[random_pl(rng, I, 3) for _ in range(k)] for _ in range(m)]
    at = kink_grid(fs + gs + [h for row in hs for h in row])
    G = lambda f: grid_values(f, at=at)  # noqa: E731
    want = max(min(np.max(np.abs(np.abs(G(fs[i])) - np.abs(G(gs[j])) - np.abs(G(hs[j][i]))))
                   for i in range(k)) for j in range(m))
    assert abs(float(psi2(fs, gs, hs).value) - want) <= 1e-6


def test_sigma_inner_examples():
    assert sigma_inner([T], Witness(1, [ONE], [[ZERO]], 1)).value == 0
    assert sigma_inner([ONE], Witness(1, [ONE], [[ZERO]], 1)).value == 0
    w = build_witness([T, ONE_MINUS_T], F(1, 4))
    assert sigma_inner([T, ONE_MINUS_T], w).upper <= F(1, 4)


# nerves, covers, refinement -------------------------------------------------


def test_nerve_examples():
    chain = [arc(F(0), F(2, 5)), arc(F(3, 10), F(7, 10)), arc(F(3, 5), F(1))]
    assert nerve_and_is_chain(Cover(I, chain))
    tri = nerve_and_is_chain(CIRCLE3)
    assert not tri and tri.nerve.edges == {(0, 1), (1, 2), (0, 2)}
    assert tri.violation == (0, 2, "long-range")
    with pytest.raises(CoverError) as e:
        Cover(I, [arc(F(0), F(2, 5)), arc(F(3, 5), F(1))])
    assert e.value.witness is not None
    gap = nerve_and_is_chain([arc(F(0), F(1, 2)), arc(F(1, 2), F(1))])
    assert gap.violation == (0, 1, "missing")
    assert nerve(TRIANGLE).edges == {(0, 1), (1, 2), (0, 2)}


def test_refines_examples():
    assert refines(TRIANGLE, TRIANGLE).assignment == (0, 1, 2)
    inside = [c for c in mesh_cells(I, 3) if set_contains(c, TRIANGLE[0])]
    assert all(i == 0 for i in refines(inside, TRIANGLE).assignment)
    straddle = arc(F(1, 5), F(4, 5))
    bad = refines([TRIANGLE[0], straddle], TRIANGLE)
    assert not bad and bad.failed == 1
    # minimality: a cell inside both U_1 and U_2 goes to U_1
    both = arc(F(1, 4) + F(1, 100), F(1, 2) - F(1, 100))
    assert refines([both], TRIANGLE).assignment == (0,)


# chain search -----------------------------------------------------------------


def test_existing_chain_is_returned_unchanged():
    chain = [arc(F(0), F(2, 5)), arc(F(3, 10), F(7, 10)), arc(F(3, 5), F(1))]
    cert = find_chain_refinement(chain, 1)
    assert cert.chain == chain and cert.assignment == (0, 1, 2)


def test_triangle_cover_refines_quickly():
    start = time.perf_counter()
    cert = search_chain_refinement(TRIANGLE, 3)
    assert cert and cert.depth <= 3 and cert.ok
    assert time.perf_counter() - start < 1


def test_circle_cover_is_exhausted():
    for d in range(1, 7):
        r = find_chain_refinement(CIRCLE3, d)
        assert isinstance(r, Exhausted) and r.depth == d and not r


def test_depth_must_be_positive():
    with pytest.raises(ValueError):
        find_chain_refinement(TRIANGLE, 0)


def _interval_chain_oracle(U, depth):
    """Fewest links of a chain of interval links on I built from the
    depth-``depth`` mesh, by breadth-first search; None if there is none."""
    n = 2**depth
    cuts = [F(k, n) for k in range(n + 1)]
    E = 2 * n + 1  # elements: even = grid points, odd = open grid segments
    regions = [V.region for V in U]

    def inside(R, k):
        if k % 2 == 0:
            return R.contains(I.point("e", cuts[k // 2]))
        return R.contains_open_interval("e", cuts[k // 2], cuts[k // 2 + 1])

    good = [[inside(R, k) for k in range(E)] for R in regions]

    def link_ok(a, b):
        return any(all(g[a:b + 1]) for g in good)

    def is_open(a, b):
        return (a % 2 == 1 or a == 0) and (b % 2 == 1 or b == E - 1)

    links = [(a, b) for a in range(E) for b in range(a, E) if is_open(a, b) and link_ok(a, b)]
    starts = [(a, b) for a, b in links if a == 0]
    queue = deque(((-1, a, b), 1) for a, b in starts)
    seen = {s for s, _ in queue}
    while queue:
        (pb, a, b), m = queue.popleft()
        if b == E - 1:
            return m
        for a2, b2 in links:
            if pb < a2 <= b and b2 > b:
                state = (b, a2, b2)
                if state not in seen:
                    seen.add(state)
                    queue.append((state, m + 1))
    return None


def _random_mesh_cover(rng, depth=3, sets=4):
    n = 2**depth
    while True:
        U = []
        for _ in range(rng.randint(1, sets)):
            a = rng.randint(0, n - 1)
            b = rng.randint(a + 1, n)
            U.append(arc(F(a, n), F(b, n)))
        if covers(I, U):
            return U


@pytest.mark.parametrize("seed", range(40))
def test_search_agrees_with_interval_oracle(seed):
    rng = random.Random(seed)
    U = _random_mesh_cover(rng)
    for depth in (2, 3, 4):
        oracle = _interval_chain_oracle(U, depth)
        got = find_chain_refinement(U, depth, keep_chains=False)
        assert bool(got) == (oracle is not None)
        if got:
            assert got.ok
            assert len(got.chain) <= oracle


@pytest.mark.slow
@pytest.mark.parametrize("block", range(4))
def test_arc_positivity(block):
    # every cover of I by at most four depth-3 mesh unions refines by depth 5
    rng = random.Random(f"positivity:{block}")
    for _ in range(50):
        U = _random_mesh_cover(rng)
        cert = search_chain_refinement(U, 5)
        assert cert and cert.ok


def test_search_on_other_graphs():
    Y = MetricGraph("abcd", [("e", "a", "b", 1), ("f", "b", "c", 1), ("g", "b", "d", 1)])
    cert = find_chain_refinement([OpenSet(PLFunction.constant(Y, 1))], 2)
    assert cert and len(cert.chain) == 1
    # each arm together with half of the other two arms
    near = {"e": [(0, -1), (F(1, 2), -1), (1, 1)],
            "f": [(0, 1), (F(1, 2), -1), (1, -1)],
            "g": [(0, 1), (F(1, 2), -1), (1, -1)]}
    U = [OpenSet(PLFunction(Y, {**near, x: [(0, 1), (1, 1)]})) for x in "efg"]
    assert covers(Y, U)
    assert not find_chain_refinement(U, 1)
    cert = find_chain_refinement(U, 2)
    assert cert and cert.verify() == [] and refines(cert.chain, U)


# backward direction -------------------------------------------------------------


def test_extract_chain_examples():
    fs = [T, ONE_MINUS_T]
    w = build_witness(fs, F(1, 4))
    cert = extract_chain(fs, w, check_hypotheses=False)
    assert len(cert.chain) == 2 and nerve_and_is_chain(cert.chain)
    assert cert.target[0].generator == T
    trivial = extract_chain([ONE], Witness(1, [ONE], [[ZERO]], 1), check_hypotheses=False)
    assert len(trivial.chain) == 1 and trivial.chain[0].region == Region.whole(I)
    assert extract_chain(fs, w).ok
    with pytest.raises(WitnessError, match="sigma_inner"):
        extract_chain(fs, build_witness(fs, F(1, 2)))


def test_extract_chain_strict_mode():
    fs = [T, ONE_MINUS_T]
    p0 = psi0(fs).value
    delta = p0 / (2 * len(fs) + 2)
    w = build_witness(fs, delta)
    assert psi0(fs).lower > len(fs) * w.eps
    assert sigma_inner(fs, w).upper < w.eps / 2
    cert = extract_chain(fs, w)
    assert cert.ok


def test_prune_examples():
    chain = [arc(F(0), F(2, 5)), arc(F(3, 10), F(7, 10)), arc(F(3, 5), F(1))]
    assert prune_chain(chain) == chain
    empty = OpenSet(PLFunction.constant(I, -1))
    W = [arc(F(0), F(3, 5)), arc(F(2, 5), F(1)), empty]
    out = prune_chain(W)
    assert out == W[:2] and nerve_and_is_chain(out)
    front = prune_chain([empty, arc(F(0), F(3, 5)), arc(F(2, 5), F(1))])
    assert len(front) == 2
    X = MetricGraph("abcd", [("e", "a", "b", 1), ("f", "c", "d", 1)])
    left = OpenSet(PLFunction(X, {"e": [(0, 1), (1, 1)], "f": [(0, -1), (1, -1)]}))
    right = OpenSet(PLFunction(X, {"e": [(0, -1), (1, -1)], "f": [(0, 1), (1, 1)]}))
    with pytest.raises(ChainError, match="connectedness"):
        prune_chain([left, right])
    with pytest.raises(ChainError, match="long range"):
        prune_chain(CIRCLE3)


# forward direction ----------------------------------------------------------------


def test_build_witness_pair():
    fs = [T, ONE_MINUS_T]
    w = build_witness(fs, F(1, 4))
    assert w.m == 2
    assert (w.eps, w.eps_prime) == (F(5, 12), F(11, 24))
    parts = sigma_parts(fs, w)
    assert parts["psi1"].upper == 0 and parts["psi2"].upper == 0
    assert parts["gap"].upper < F(1, 4)
    assert parts["value"] == CertifiedValue.exact(F(1, 8))
    # cross-check each ingredient on the grid
    G = [grid_values(g) for g in w.g]
    assert abs(float(parts["psi0_g"].value) - np.sum(np.abs(G), axis=0).min()) <= 1e-3
    for j in range(w.m):
        for i in range(2):
            diff = np.abs(grid_values(fs[i])) - np.abs(G[j]) - np.abs(grid_values(w.h[j][i]))
            if i == w.assignment[j]:
                assert np.max(np.abs(diff)) <= 1e-3


def test_build_witness_constant():
    w = build_witness([ONE], F(1, 2))
    assert w.m == 1
    assert extrema(w.g[0]).max.value <= 1
    assert psi0(w.g).value >= w.eps
    assert sigma_inner([ONE], w).upper <= F(1, 2)


def test_build_witness_preconditions():
    with pytest.raises(WitnessError):
        build_witness([T], F(1, 4))
    with pytest.raises(WitnessError):
        build_witness([PLFunction.constant(S, 1)], F(1, 4))
    with pytest.raises(WitnessError):
        build_witness([PLFunction(I, {"e": [(0, -1), (1, 1)]}), ONE], F(1, 4))


@pytest.mark.parametrize("seed", range(12))
def test_forward_invariants(seed):
    rng = random.Random(seed)
    k = rng.choice([2, 3, 4])
    fs = bump_tuple(rng, k)
    delta = psi0(fs).value / 2
    w = build_witness(fs, delta)
    tr = w.trace
    X = fs[0].graph
    whole = Region.whole(X)
    M, N = tr["M"], tr["N"]
    union = Region.empty(X)
    for Mj in M:
        union = union | Mj
    assert union == whole
    for j in range(w.m):
        lo = Region.nonpositive(w.g[j] - w.eps) & M[j]
        # g''_j >= eps on M_j: the set where g''_j < eps misses M_j
        below = Region.positive(w.eps - w.g[j])
        assert (below & M[j]).is_empty(), lo
        for i in range(j + 2, w.m):
            assert (N[j] & N[i]).is_empty()
    parts = sigma_parts(fs, w)
    assert parts["psi1"].upper == 0 and parts["psi2"].upper == 0
    assert parts["gap"].upper < delta
    assert w.eps <= psi0(w.g).value < w.eps_prime
    cert = extract_chain(fs, w, check_hypotheses=False)
    assert cert.ok and refines(cert.chain, [OpenSet(f) for f in fs])


def test_certificate_verify_reports_problems():
    cert = ChainCertificate(list(CIRCLE3))
    assert any("long-range" in p for p in cert.verify())
    empty = OpenSet(PLFunction.constant(I, -1))
    assert "link 2 is empty" in ChainCertificate([OpenSet(ONE), empty]).verify()
    bad = ChainCertificate([TRIANGLE[0], arc(F(2, 5), F(1))], (1, 2), TRIANGLE)
    assert "assignment is not the minimal one" in bad.verify()
