"""
Two circle maps with no connected common refinement
===================================================

"""

from fractions import Fraction as F

from continua.amalgam import fiber_product_circle, hoehn_check, identity_map, shift_map
from continua.space import graph_components

f, g = identity_map(), shift_map(F(1, 2))
W, r, s = fiber_product_circle(f, g)
print("W:", W)
print("r:", r.values)
print("s:", s.values)

v = hoehn_check(W, r, s, f, g)
print("\nverdict:", v.outcome)
print("components:", v.evidence["components"], v.evidence["component_sides"])

# the same pipeline rejects connected spaces before reaching a verdict
from continua.amalgam import ArcMap  # noqa: E402
from continua.space import PLFunction, interval  # noqa: E402

I = interval()
t = ArcMap(I, PLFunction(I, {"e": [(0, 0), (1, 1)]}))
bad = hoehn_check(I, t, t, f, g)
print("\nidentity maps on [0, 1]:", bad.outcome, bad.evidence["point"], "difference", bad.evidence["difference"])

# f = g has the diagonal plus two corner points
W2, _, _ = fiber_product_circle(f, f)
print("f = g:", graph_components(W2).count, "components")
