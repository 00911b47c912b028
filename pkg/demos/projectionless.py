"""
Projections and connectedness
=============================

"""

import random

from continua.logic import format_formula, normalize, projectionless_formula, projectionless_value, random_pl
from continua.space import MetricGraph, PLFunction, interval

print(format_formula(projectionless_formula()))

rng = random.Random(0)
I = interval()
worst = max(projectionless_value(normalize(random_pl(rng, I, 3))).upper for _ in range(50))
print(f"largest value over 50 functions on [0, 1]: {float(worst):.2e}")

# two components: the indicator of one of them is a projection
X = MetricGraph("abcd", [("e", "a", "b", 1), ("f", "c", "d", 1)])
p = PLFunction(X, {"e": [(0, 1), (1, 1)], "f": [(0, 0), (1, 0)]})
print("indicator on two segments:", projectionless_value(p))
