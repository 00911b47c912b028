"""Write the example input files used by the CLI walkthroughs into demos/data/."""

import sys
from fractions import Fraction as F
from pathlib import Path

from continua import io
from continua.amalgam import ArcMap, identity_map, shift_map
from continua.space import MetricGraph, PLFunction, circle, interval

OUT = Path(__file__).parent / "data"


def tent(X, a, b, edge="e"):
    """Peak 1 at the midpoint of (a, b), positive exactly there; wraps on a loop."""
    e = X.edges[edge]
    L, loop = e.length, e.u == e.v
    mid, half = (a + b) / 2, (b - a) / 2

    def value(t):
        d = abs(t - mid)
        if loop:
            d = min(d % L, L - d % L)
        elif a <= 0 and t <= mid or b >= L and t >= mid:
            d = 0
        return max(F(0), 1 - d / half)

    ts = {F(0), L} | {x % L if loop else x for x in (a, b, mid) if loop or 0 <= x <= L}
    return PLFunction(X, {edge: [(t, value(t)) for t in sorted(ts)]})


def main(out=OUT):
    out.mkdir(exist_ok=True)

    def write(name, doc):
        (out / name).write_text(io.dumps(doc))

    I, S = interval(), circle()
    write("interval.json", io.graph_to_json(I))
    write("circle.json", io.graph_to_json(S))
    write("two-points.json", io.graph_to_json(MetricGraph(["a", "b"], [])))
    triangle = [tent(I, F(0), F(1, 2)), tent(I, F(1, 4), F(3, 4)), tent(I, F(2, 5), F(1))]
    write("triangle.json", io.functions_to_json(triangle, "sets"))
    halves = [tent(S, c - F(1, 4), c + F(1, 4)) for c in (F(0), F(1, 3), F(2, 3))]
    write("circle3.json", io.functions_to_json(halves, "sets"))
    t = PLFunction(I, {"e": [(0, 0), (1, 1)]})
    write("pair.json", io.functions_to_json([t, PLFunction(I, {"e": [(0, 1), (1, 0)]})]))
    write("f.json", io.map_to_json(identity_map()))
    write("g.json", io.map_to_json(shift_map(F(1, 2))))
    write("identity-arc.json", io.map_to_json(ArcMap(I, t)))


if __name__ == "__main__":
    main(Path(sys.argv[1]) if len(sys.argv) > 1 else OUT)
