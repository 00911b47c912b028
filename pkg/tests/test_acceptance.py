"""Acceptance criteria 1-7, each printing one PASS/FAIL line.

Every criterion builds a JSON report from fixed seeds; criterion 7 rebuilds
them all and compares bytes.
"""

import random
import time
from fractions import Fraction as F

import numpy as np
import pytest

from continua import io
from continua.amalgam import fiber_product_circle, hoehn_check, identity_map, shift_map
from continua.chainability import (
    Exhausted,
    build_witness,
    extract_chain,
    find_chain_refinement,
    nerve_and_is_chain,
    psi0,
    psi1,
    psi2,
    refines,
    search_chain_refinement,
    sigma_inner,
    sigma_parts,
)
from continua.logic import eval_qf, normalize, projectionless_value
from continua.space import (
    MetricGraph,
    OpenSet,
    PLFunction,
    Region,
    circle,
    covers,
    extrema,
    graph_components,
    interval,
    pl_abs,
    pl_sum,
)
from tests._gen import bump_tuple, connected_candidate, grid_values, kink_grid, random_formula, random_pl

I = interval()
WIDTH = F(1, 10**9)
HALF = F(1, 2)


@pytest.fixture
def announce(capsys):
    def report(n, ok, detail=""):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'}{'  ' + detail if detail else ''}")
    return report


def checked(n, announce, body):
    """Run ``body`` and print its verdict; failures propagate."""
    try:
        detail = body()
    except AssertionError as e:
        announce(n, False, str(e).splitlines()[0] if str(e) else "")
        raise
    announce(n, True, detail)


# 1 and 2: tuple to witness and witness to chain -------------------------


def tuple_for(i):
    rng = random.Random(f"acceptance:{i}")
    k = rng.choice([2, 3, 4])
    if i % 2 == 0:
        return bump_tuple(rng, k)
    while True:
        fs = [random_pl(rng, I, 4, 0, 10, 10) for _ in range(k)]
        if psi0(fs).value > 0:
            return fs


def forward():
    rows, witnesses = [], []
    for i in range(50):
        fs = tuple_for(i)
        delta = psi0(fs).value / 2
        w = build_witness(fs, delta, width=WIDTH)
        s = sigma_inner(fs, w, WIDTH)
        rows.append({"k": len(fs), "m": w.m, "delta": delta, "sigma_inner": s, "holds": s.upper <= delta})
        witnesses.append((fs, w, delta))
    return {"instances": rows}, witnesses


def backward(witnesses):
    rows = []
    for fs, w, delta in witnesses:
        cert = extract_chain(fs, w, check_hypotheses=False, width=WIDTH)
        U = [OpenSet(f) for f in fs]
        parts = sigma_parts(fs, w, WIDTH)
        rows.append({
            "links": len(cert.chain),
            "is_chain": bool(nerve_and_is_chain(cert.chain)),
            "refines": bool(refines(cert.chain, U)),
            "covers": bool(covers(I, cert.chain)),
            "psi1": parts["psi1"], "psi2": parts["psi2"], "gap": parts["gap"], "delta": delta,
        })
    return {"instances": rows}


def test_criterion_1_forward_direction(announce):
    def body():
        start = time.perf_counter()
        rep, _ = forward()
        elapsed = time.perf_counter() - start
        bad = [n for n, r in enumerate(rep["instances"]) if not r["holds"]]
        assert not bad, f"sigma_inner > delta on instances {bad}"
        assert elapsed < 60, f"took {elapsed:.1f}s"
        return f"50 witnesses, sigma_inner <= delta on all, {elapsed:.1f}s"
    checked(1, announce, body)


def test_criterion_2_backward_direction(announce):
    def body():
        _, witnesses = forward()
        rep = backward(witnesses)
        for n, r in enumerate(rep["instances"]):
            assert r["is_chain"] and r["refines"] and r["covers"], f"instance {n}: {r}"
            assert r["psi1"].upper == 0 and r["psi2"].upper == 0, f"instance {n}: psi1/psi2 nonzero"
            assert r["gap"].upper < r["delta"], f"instance {n}: gap {r['gap']} >= delta"
        return "50 chain certificates; psi1 = psi2 = 0 exactly, gap < delta"
    checked(2, announce, body)


# 3: chainability contrast --------------------------------------------------------


def _arc(a, b, X):
    L = X.edges["e"].length
    mid, half = (a + b) / 2, (b - a) / 2
    loop = X.edges["e"].u == X.edges["e"].v
    ts = sorted({F(0), L} | ({x % L for x in (a, b, mid)} if loop else {x for x in (a, b, mid) if 0 <= x <= L}))

    def value(t):
        d = abs(t - mid)
        if loop:
            d = min(d % L, L - d % L)
        elif (a <= 0 and t <= mid) or (b >= L and t >= mid):
            d = 0
        return 1 - d / half

    return OpenSet(PLFunction(X, {"e": [(t, value(t)) for t in ts]}))


TRIANGLE = [_arc(F(0), HALF, I), _arc(F(1, 4), F(3, 4), I), _arc(F(2, 5), F(1), I)]
CIRCLE3 = [_arc(c - F(1, 4), c + F(1, 4), circle()) for c in (F(0), F(1, 3), F(2, 3))]


def contrast():
    start = time.perf_counter()
    cert = search_chain_refinement(TRIANGLE, 3)
    t_tri = time.perf_counter() - start
    start = time.perf_counter()
    circle_runs = [find_chain_refinement(CIRCLE3, d) for d in range(1, 7)]
    t_circ = time.perf_counter() - start
    rep = {
        "triangle": {"found": bool(cert), "depth": cert.depth if cert else None,
                     "links": len(cert.chain) if cert else None, "problems": cert.verify() if cert else None},
        "circle": [{"depth": r.depth, "exhausted": isinstance(r, Exhausted)} for r in circle_runs],
    }
    return rep, t_tri, t_circ


def test_criterion_3_chainability_contrast(announce):
    def body():
        rep, t_tri, t_circ = contrast()
        tri = rep["triangle"]
        assert tri["found"] and tri["depth"] <= 3 and tri["problems"] == [], f"triangle: {tri}"
        assert t_tri < 1, f"triangle took {t_tri:.2f}s"
        assert all(r["exhausted"] for r in rep["circle"]), f"circle: {rep['circle']}"
        assert t_circ < 60, f"circle took {t_circ:.1f}s"
        return (f"triangle chain at depth {tri['depth']} in {t_tri:.2f}s; "
                f"circle exhausted at depths 1-6 in {t_circ:.1f}s")
    checked(3, announce, body)


# 4: the projectionless axiom ---------------------------------------------------------


CONNECTED = [
    interval(),
    circle(),
    MetricGraph("abcd", [("e", "a", "b", 1), ("f", "b", "c", 1), ("g", "b", "d", 1)]),
    MetricGraph("ab", [("e", "a", "b", 1), ("f", "a", "b", HALF), ("g", "b", "b", F(1, 3))]),
]


def projectionless():
    rng = random.Random("acceptance:axiom")
    values = []
    for n in range(200):
        X = CONNECTED[n % len(CONNECTED)]
        f = normalize(random_pl(rng, X, 4)) or PLFunction.constant(X, 1)
        values.append(projectionless_value(f, WIDTH))
    two = MetricGraph("abcd", [("e", "a", "b", 1), ("f", "c", "d", 2)])
    indicator = PLFunction(two, {"e": [(0, 1), (1, 1)], "f": [(0, 0), (2, 0)]})
    return {"connected": values, "indicator": projectionless_value(indicator, WIDTH),
            "indicator_components": graph_components(two).count}


def test_criterion_4_projectionless_axiom(announce):
    def body():
        rep = projectionless()
        worst = max(v.upper for v in rep["connected"])
        assert worst <= WIDTH, f"max value {worst}"
        assert rep["indicator"].lower == rep["indicator"].upper == 1, f"indicator {rep['indicator']}"
        return f"200 functions on connected graphs, max {float(worst):.1e}; indicator exactly 1"
    checked(4, announce, body)


# 5: the circle counterexample ---------------------------------------------------------


def counterexample():
    f, g = identity_map(), shift_map(HALF)
    W, r, s = fiber_product_circle(f, g)
    v = hoehn_check(W, r, s, f, g)
    segments = {}
    for e in W.edges.values():
        x0, y0 = r.values.value_at(e.id, 0), s.values.value_at(e.id, 0)
        marker = PLFunction(W, {d.id: [(0, int(d is e)), (d.length, int(d is e))] for d in W.edges.values()})
        segments["A" if y0 == x0 + HALF else "B"] = Region.from_predicate(marker, lambda val: val == 1)
    candidates = []
    rng = random.Random("acceptance:candidates")
    for _ in range(20):
        Wc, rc, sc = connected_candidate(rng)
        candidates.append(hoehn_check(Wc, rc, sc, f, g).outcome)
    return {
        "components": graph_components(W).count,
        "verdict": v.outcome,
        "A_is_segment": v.evidence["A"].region == segments["A"],
        "B_is_segment": v.evidence["B"].region == segments["B"],
        "verdict_document": io.verdict_to_json(v, W, r, s, HALF),
        "candidates": candidates,
    }


def test_criterion_5_circle_counterexample(announce):
    def body():
        rep = counterexample()
        assert rep["components"] == 2, f"{rep['components']} components"
        assert rep["verdict"] == "disconnection-certified", rep["verdict"]
        assert rep["A_is_segment"] and rep["B_is_segment"], "A, B differ from the congruence segments"
        bad = [o for o in rep["candidates"] if o not in ("composition-mismatch", "not-surjective")]
        assert not bad, f"connected candidates reached {bad}"
        return "2-component fiber product certified; 20 connected candidates rejected early"
    checked(5, announce, body)


# 6: oracle equivalence ---------------------------------------------------------------


def oracles():
    rows = {"psi0": [], "psi1": [], "psi2": [], "eval_qf": [], "psi0_exact": []}
    for n in range(100):
        rng = random.Random(f"acceptance:oracle:{n}")
        fs = [random_pl(rng, I, 5) for _ in range(rng.randint(1, 4))]
        at = kink_grid(fs)
        exact = psi0(fs).value
        rows["psi0_exact"].append(exact == extrema(pl_sum([pl_abs(f) for f in fs])).min.value)
        grid = np.sum([np.abs(grid_values(f, at=at)) for f in fs], axis=0).min()
        rows["psi0"].append(abs(float(exact) - grid))

        gs = [random_pl(rng, I, 4) for _ in range(rng.randint(3, 5))]
        at = kink_grid(gs)
        G = [grid_values(g, at=at) for g in gs]
        want = max(np.sqrt(np.max(np.abs(G[i] * G[j]))) for i in range(len(gs)) for j in range(i + 2, len(gs)))
        rows["psi1"].append(abs(float(psi1(gs, WIDTH).midpoint) - want))

        k, m = rng.randint(1, 3), rng.randint(1, 3)
        fs = [random_pl(rng, I, 3) for _ in range(k)]
        gs = [random_pl(rng, I, 3) for _ in range(m)]
        hs = [[random_pl(rng, I, 3) for _ in range(k)] for _ in range(m)]
        at = kink_grid(fs + gs + [h for row in hs for h in row])
        V = lambda f: grid_values(f, at=at)  # noqa: E731
        want = max(min(np.max(np.abs(np.abs(V(fs[i])) - np.abs(V(gs[j])) - np.abs(V(hs[j][i]))))
                       for i in range(k)) for j in range(m))
        rows["psi2"].append(abs(float(psi2(fs, gs, hs).value) - want))

        nvars = rng.randint(1, 3)
        phi, oracle = random_formula(rng, nvars)
        fs = {i: random_pl(rng, I, 4) for i in range(1, nvars + 1)}
        at = kink_grid(list(fs.values()))
        rows["eval_qf"].append(abs(float(eval_qf(phi, fs, WIDTH).midpoint)
                                   - oracle({i: grid_values(f, at=at) for i, f in fs.items()})))
    return {name: [float(x) if not isinstance(x, bool) else x for x in vals] for name, vals in rows.items()}


def test_criterion_6_oracle_equivalence(announce):
    def body():
        rep = oracles()
        for name in ("psi0", "psi1", "psi2", "eval_qf"):
            worst = max(rep[name])
            assert worst <= 1e-3, f"{name} differs from the grid by {worst}"
        assert all(rep["psi0_exact"]), "psi0 differs from the PL minimum"
        worst = max(max(rep[n]) for n in ("psi0", "psi1", "psi2", "eval_qf"))
        return f"400 instances within {worst:.1e} of the grid; psi0 equals the PL minimum exactly"
    checked(6, announce, body)


# 7: determinism ------------------------------------------------------------------------


def all_reports():
    rep1, witnesses = forward()
    return {
        1: io.dumps(io.to_json(rep1)),
        2: io.dumps(io.to_json(backward(witnesses))),
        3: io.dumps(io.to_json(contrast()[0])),
        4: io.dumps(io.to_json(projectionless())),
        5: io.dumps(io.to_json(counterexample())),
        6: io.dumps(oracles()),  # grid discrepancies are floats
    }


def test_criterion_7_determinism(announce):
    def body():
        a, b = all_reports(), all_reports()
        differ = [n for n in a if a[n] != b[n]]
        assert not differ, f"reports differ for criteria {differ}"
        size = sum(len(x) for x in a.values())
        return f"criteria 1-6 re-run byte-identical ({size} bytes of JSON)"
    checked(7, announce, body)
