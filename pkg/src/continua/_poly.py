"""Dense rational polynomials (coefficients low to high) and certified extrema.

Real roots of derivatives are isolated with sympy's exact interval routine;
values near an irrational critical point are enclosed with the centred form
``p(c) + p'([s, t]) * ([s, t] - c)``.
"""

from __future__ import annotations

from fractions import Fraction

from sympy import Poly, QQ, Rational, Symbol

from .certified import CertifiedValue

Coeffs = tuple  # tuple[Fraction, ...]

_T = Symbol("t")


def trim(c) -> Coeffs:
    c = list(c)
    while len(c) > 1 and c[-1] == 0:
        c.pop()
    return tuple(Fraction(x) for x in c) if c else (Fraction(0),)


def degree(c: Coeffs) -> int:
    c = trim(c)
    if len(c) == 1 and c[0] == 0:
        return -1
    return len(c) - 1


def padd(a: Coeffs, b: Coeffs) -> Coeffs:
    n = max(len(a), len(b))
    return trim([(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)])


def pscale(a: Coeffs, s) -> Coeffs:
    return trim([s * x for x in a])


def pmul(a: Coeffs, b: Coeffs) -> Coeffs:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return trim(out)


def pderiv(a: Coeffs) -> Coeffs:
    return trim([i * a[i] for i in range(1, len(a))]) if len(a) > 1 else (Fraction(0),)


def peval(a: Coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(a):
        acc = acc * x + c
    return acc


def _imul(a, b):
    prods = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(prods), max(prods)


def peval_interval(a: Coeffs, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Naive interval Horner enclosure of ``a`` over ``[lo, hi]``."""
    acc = (Fraction(0), Fraction(0))
    for c in reversed(a):
        m = _imul(acc, (lo, hi))
        acc = (m[0] + c, m[1] + c)
    return acc


def _enclose(a: Coeffs, da: Coeffs, s: Fraction, t: Fraction) -> tuple[Fraction, Fraction]:
    c = (s + t) / 2
    pc = peval(a, c)
    dlo, dhi = peval_interval(da, s, t)
    slope = max(abs(dlo), abs(dhi))
    r = slope * (t - s) / 2
    return pc - r, pc + r


def _to_fraction(r) -> Fraction:
    r = Rational(r)
    return Fraction(int(r.p), int(r.q))


def _rat(x: Fraction):
    return Rational(x.numerator, x.denominator)


def critical_intervals(a: Coeffs, lo: Fraction, hi: Fraction, eps: Fraction):
    """Isolating intervals ``(s, t)`` for the roots of ``a'`` inside ``[lo, hi]``."""
    da = pderiv(a)
    d = degree(da)
    if d <= 0:
        return []
    if d == 1:
        r = -da[0] / da[1]
        return [(r, r)] if lo <= r <= hi else []
    p = Poly(list(reversed(da)), _T, domain=QQ)
    out = []
    for (s, t), _mult in p.intervals(eps=_rat(eps), inf=_rat(lo), sup=_rat(hi)):
        s, t = _to_fraction(s), _to_fraction(t)
        out.append((max(s, lo), min(t, hi)))
    return out


class Candidate:
    """A critical or endpoint candidate of one piece.

    ``attained`` is a value the polynomial really takes (at ``where``);
    ``[lower, upper]`` encloses every value near the candidate.
    """

    __slots__ = ("attained", "lower", "upper", "where")

    def __init__(self, attained, lower, upper, where):
        self.attained, self.lower, self.upper, self.where = attained, lower, upper, where


def piece_candidates(a: Coeffs, lo: Fraction, hi: Fraction, eps: Fraction) -> list[Candidate]:
    """Every local-extremum candidate of ``a`` on the closed interval."""
    out = []
    for x in (lo, hi):
        v = peval(a, x)
        out.append(Candidate(v, v, v, x))
    da = pderiv(a)
    for s, t in critical_intervals(a, lo, hi, eps):
        if s == t:
            v = peval(a, s)
            out.append(Candidate(v, v, v, s))
            continue
        c = (s + t) / 2
        pc = peval(a, c)
        elo, ehi = _enclose(a, da, s, t)
        out.append(Candidate(pc, min(elo, pc), max(ehi, pc), c))
    return out


def combine_max(cands: list[Candidate]) -> tuple[CertifiedValue, Candidate]:
    best = max(cands, key=lambda c: c.attained)
    return CertifiedValue(best.attained, max(c.upper for c in cands)), best


def combine_min(cands: list[Candidate]) -> tuple[CertifiedValue, Candidate]:
    best = min(cands, key=lambda c: c.attained)
    return CertifiedValue(min(c.lower for c in cands), best.attained), best
