"""
Arc versus circle: searching for chain refinements
===================================================

"""

from fractions import Fraction as F

from continua.chainability import find_chain_refinement, nerve_and_is_chain
from continua.space import OpenSet, PLFunction, circle, interval


def arc(a, b, X):
    # positive exactly on (a, b), wrapping around when X is a loop
    L = X.edges["e"].length
    loop = X.edges["e"].u == X.edges["e"].v
    mid, half = (a + b) / 2, (b - a) / 2
    ts = {F(0), L} | ({x % L for x in (a, b, mid)} if loop else {x for x in (a, b, mid) if 0 <= x <= L})

    def value(t):
        d = abs(t - mid)
        if loop:
            d = min(d % L, L - d % L)
        elif (a <= 0 and t <= mid) or (b >= L and t >= mid):
            d = 0
        return 1 - d / half

    return OpenSet(PLFunction(X, {"e": [(t, value(t)) for t in sorted(ts)]}))


I, S = interval(), circle()

# three intervals whose nerve is a triangle
triangle = [arc(F(0), F(1, 2), I), arc(F(1, 4), F(3, 4), I), arc(F(2, 5), F(1), I)]
print("triangle cover is a chain:", bool(nerve_and_is_chain(triangle)))

for depth in (1, 2, 3):
    found = find_chain_refinement(triangle, depth)
    print(f"depth {depth}:", f"chain of {len(found.chain)} links -> {found.assignment}" if found else found)
    if found:
        break

# the same question for three half-circles
halves = [arc(c - F(1, 4), c + F(1, 4), S) for c in (F(0), F(1, 3), F(2, 3))]
print("\nhalf-arc nerve:", nerve_and_is_chain(halves).violation)
for depth in range(1, 7):
    print(f"depth {depth}:", find_chain_refinement(halves, depth))
