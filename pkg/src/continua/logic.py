"""Quantifier-free formulas of unital C*-algebras, evaluated on PL functions.

Concrete syntax (see ``docs/formula-syntax.md`` for the full grammar)::

    min(dot-(2*norm(1 - x1*x1), 1), dot-(1, 4*norm(x1*x1 - (x1*x1)*(x1*x1))))

Terms denote functions (``x1``, ``1``, ``0``, ``q*t``, ``+``, ``-``, ``*``,
``abs``); formulas denote reals (``norm``, rational constants, ``+``, ``dot-``,
``max``, ``min``, ``q*phi``, ``sqrt``, ``d``).  Products are limited to two
PL factors, or two quadratic ones, so every term stays a piecewise
polynomial of degree at most four.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .certified import DEFAULT_WIDTH, CertifiedValue, as_fraction, cmax, cmin
from .space import (
    MetricGraph,
    PiecewisePoly,
    PLFunction,
    GraphError,
    pl_abs,
    pl_add,
    pl_mul,
    pl_scale,
    pl_sub,
    sup_norm,
)

__all__ = [
    "Abs", "Add", "Const", "DegreeCapError", "Dist", "DotMinus", "FAdd", "FScale", "Formula",
    "FormulaSyntaxError", "Max", "Min", "Mul", "Norm", "One", "QuantifierBound", "Scale", "Sqrt",
    "Sub", "Term", "Var", "Zero", "bound_quantifier", "eval_qf", "format_formula", "free_vars",
    "parse_formula", "projectionless_formula", "projectionless_value",
]


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} at position {position}")
        self.position = position


class DegreeCapError(FormulaSyntaxError):
    """A product or absolute value leaves the piecewise-polynomial fragment."""


# ---------------------------------------------------------------------------
# syntax trees


class Term:
    degree: int


@dataclass(frozen=True)
class Var(Term):
    index: int
    degree = 1


@dataclass(frozen=True)
class One(Term):
    degree = 0


@dataclass(frozen=True)
class Zero(Term):
    degree = 0


@dataclass(frozen=True)
class Scale(Term):
    factor: Fraction
    term: Term

    @property
    def degree(self):
        return self.term.degree


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term

    @property
    def degree(self):
        return max(self.left.degree, self.right.degree)


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term

    @property
    def degree(self):
        return max(self.left.degree, self.right.degree)


@dataclass(frozen=True)
class Mul(Term):
    left: Term
    right: Term

    @property
    def degree(self):
        return self.left.degree + self.right.degree


@dataclass(frozen=True)
class Abs(Term):
    term: Term

    @property
    def degree(self):
        return self.term.degree


class Formula:
    pass


@dataclass(frozen=True)
class Norm(Formula):
    term: Term


@dataclass(frozen=True)
class Const(Formula):
    value: Fraction


@dataclass(frozen=True)
class FAdd(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class DotMinus(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Max(Formula):
    args: tuple


@dataclass(frozen=True)
class Min(Formula):
    args: tuple


@dataclass(frozen=True)
class FScale(Formula):
    factor: Fraction
    formula: Formula


@dataclass(frozen=True)
class Sqrt(Formula):
    formula: Formula


@dataclass(frozen=True)
class Dist(Formula):
    left: Term
    right: Term


def _product_allowed(a: int, b: int) -> bool:
    return a == 0 or b == 0 or (a <= 1 and b <= 1) or (a == 2 and b == 2)


def free_vars(node) -> set[int]:
    if isinstance(node, Var):
        return {node.index}
    out = set()
    for value in vars(node).values() if hasattr(node, "__dict__") else ():
        if isinstance(value, (Term, Formula)):
            out |= free_vars(value)
        elif isinstance(value, tuple):
            for v in value:
                out |= free_vars(v)
    return out


# ---------------------------------------------------------------------------
# parsing


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\s*/\s*\d+)?)|(?P<var>x\d+)|(?P<name>dot-|norm|max|min|sqrt|abs|d)"
    r"|(?P<sym>[(),+\-*]))"
)


def _tokenize(text: str):
    pos, out = 0, []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise FormulaSyntaxError(f"unexpected character {text[pos:].lstrip()[:1]!r}",
                                     pos + len(text[pos:]) - len(text[pos:].lstrip()))
        kind = m.lastgroup
        start = m.start(kind)
        out.append((kind, m.group(kind).replace(" ", ""), start))
        pos = m.end()
    out.append(("end", "", len(text)))
    return out


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self, value=None):
        kind, tok, _ = self.tokens[self.i]
        return tok if value is None else tok == value and kind != "end"

    def pos(self):
        return self.tokens[self.i][2]

    def take(self, value=None):
        kind, tok, pos = self.tokens[self.i]
        if value is not None and tok != value:
            raise FormulaSyntaxError(f"expected {value!r}, found {tok or 'end of input'!r}", pos)
        self.i += 1
        return kind, tok, pos

    # formulas

    def formula(self) -> Formula:
        left = self.fscaled()
        while self.peek("+"):
            self.take()
            left = FAdd(left, self.fscaled())
        return left

    def fscaled(self) -> Formula:
        kind, tok, pos = self.tokens[self.i]
        if kind == "num" or (tok == "-" and self.tokens[self.i + 1][0] == "num"):
            q = self.number()
            if self.peek("*"):
                self.take()
                return FScale(q, self.fscaled())
            return Const(q)
        return self.fatom()

    def number(self) -> Fraction:
        sign = 1
        if self.peek("-"):
            self.take()
            sign = -1
        kind, tok, pos = self.take()
        if kind != "num":
            raise FormulaSyntaxError("expected a number", pos)
        return sign * as_fraction(tok)

    def fatom(self) -> Formula:
        kind, tok, pos = self.take()
        if tok == "(":
            inner = self.formula()
            self.take(")")
            return inner
        if kind != "name":
            raise FormulaSyntaxError(f"expected a formula, found {tok or 'end of input'!r}", pos)
        self.take("(")
        if tok == "norm":
            out = Norm(self.term())
        elif tok == "d":
            a = self.term()
            self.take(",")
            out = Dist(a, self.term())
        elif tok == "dot-":
            a = self.formula()
            self.take(",")
            out = DotMinus(a, self.formula())
        elif tok in ("max", "min"):
            args = [self.formula()]
            while self.peek(","):
                self.take()
                args.append(self.formula())
            out = (Max if tok == "max" else Min)(tuple(args))
        elif tok == "sqrt":
            out = Sqrt(self.formula())
        else:
            raise FormulaSyntaxError(f"{tok!r} is a term operator, not a formula", pos)
        self.take(")")
        return out

    # terms

    def term(self) -> Term:
        left = self.tproduct()
        while self.peek("+") or self.peek("-"):
            _, op, _ = self.take()
            right = self.tproduct()
            left = Add(left, right) if op == "+" else Sub(left, right)
        return left

    def tproduct(self) -> Term:
        left, literal = self.tunary()
        while self.peek("*"):
            self.take()
            rpos = self.pos()
            right, _ = self.tunary()
            if literal is not None:
                left, literal = Scale(literal, right), None
                continue
            if not _product_allowed(left.degree, right.degree):
                raise DegreeCapError(
                    f"product of degrees {left.degree} and {right.degree} exceeds the cap", rpos)
            left = Mul(left, right)
        return left

    def tunary(self):
        """A factor, plus its value when it is a bare rational literal."""
        kind, tok, pos = self.tokens[self.i]
        if tok == "-":
            self.take()
            if self.tokens[self.i][0] == "num":
                q = -as_fraction(self.take()[1])
                return _literal(q), q
            inner, _ = self.tunary()
            return Scale(Fraction(-1), inner), None
        if kind == "num":
            q = as_fraction(self.take()[1])
            return _literal(q), q
        if kind == "var":
            self.take()
            index = int(tok[1:])
            if index < 1:
                raise FormulaSyntaxError("variables are numbered from x1", pos)
            return Var(index), None
        if tok == "abs":
            self.take()
            self.take("(")
            inner = self.term()
            self.take(")")
            if inner.degree > 1:
                raise DegreeCapError("abs applies only to piecewise-linear terms", pos)
            return Abs(inner), None
        if tok == "(":
            self.take()
            inner = self.term()
            self.take(")")
            return inner, None
        raise FormulaSyntaxError(f"expected a term, found {tok or 'end of input'!r}", pos)


def _literal(q: Fraction) -> Term:
    if q == 1:
        return One()
    if q == 0:
        return Zero()
    return Scale(q, One())


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    out = p.formula()
    kind, tok, pos = p.tokens[p.i]
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected {tok!r}", pos)
    return out


def parse_term(text: str) -> Term:
    p = _Parser(text)
    out = p.term()
    kind, tok, pos = p.tokens[p.i]
    if kind != "end":
        raise FormulaSyntaxError(f"unexpected {tok!r}", pos)
    return out


# ---------------------------------------------------------------------------
# printing (fully parenthesised, so parsing the output gives the same tree)


def _q(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_term(t: Term) -> str:
    if isinstance(t, Var):
        return f"x{t.index}"
    if isinstance(t, One):
        return "1"
    if isinstance(t, Zero):
        return "0"
    if isinstance(t, Scale):
        return f"({_q(t.factor)}*{format_term(t.term)})"
    if isinstance(t, Add):
        return f"({format_term(t.left)} + {format_term(t.right)})"
    if isinstance(t, Sub):
        return f"({format_term(t.left)} - {format_term(t.right)})"
    if isinstance(t, Mul):
        left = format_term(t.left)
        if left[0].isdigit() or left[0] == "-":
            left = f"({left})"  # a bare literal on the left would read as a scalar
        return f"({left} * {format_term(t.right)})"
    if isinstance(t, Abs):
        return f"abs({format_term(t.term)})"
    raise TypeError(f"not a term: {t!r}")


def format_formula(phi: Formula) -> str:
    if isinstance(phi, Norm):
        return f"norm({format_term(phi.term)})"
    if isinstance(phi, Const):
        return _q(phi.value) if phi.value >= 0 else f"({_q(phi.value)})"
    if isinstance(phi, FAdd):
        return f"({format_formula(phi.left)} + {format_formula(phi.right)})"
    if isinstance(phi, DotMinus):
        return f"dot-({format_formula(phi.left)}, {format_formula(phi.right)})"
    if isinstance(phi, (Max, Min)):
        name = "max" if isinstance(phi, Max) else "min"
        return f"{name}({', '.join(format_formula(a) for a in phi.args)})"
    if isinstance(phi, FScale):
        return f"({_q(phi.factor)}*{format_formula(phi.formula)})"
    if isinstance(phi, Sqrt):
        return f"sqrt({format_formula(phi.formula)})"
    if isinstance(phi, Dist):
        return f"d({format_term(phi.left)}, {format_term(phi.right)})"
    raise TypeError(f"not a formula: {phi!r}")


# ---------------------------------------------------------------------------
# evaluation


class _Evaluator:
    def __init__(self, assignment: Mapping[int, PLFunction], width: Fraction):
        if not assignment:
            self.graph = None
        else:
            graphs = {id(f.graph): f.graph for f in assignment.values()}
            first = next(iter(assignment.values())).graph
            if any(g != first for g in graphs.values()):
                raise GraphError("assignment mixes graphs")
            self.graph = first
        self.a, self.width = assignment, width

    def term(self, t: Term):
        if isinstance(t, Var):
            if t.index not in self.a:
                raise KeyError(f"x{t.index} is not assigned")
            return self.a[t.index]
        if isinstance(t, (One, Zero)):
            if self.graph is None:
                raise ValueError("a formula without variables needs a graph")
            return PLFunction.constant(self.graph, 1 if isinstance(t, One) else 0)
        if isinstance(t, Scale):
            inner = self.term(t.term)
            return pl_scale(inner, t.factor) if isinstance(inner, PLFunction) else inner * t.factor
        if isinstance(t, (Add, Sub)):
            a, b = self.term(t.left), self.term(t.right)
            if isinstance(a, PLFunction) and isinstance(b, PLFunction):
                return pl_add(a, b) if isinstance(t, Add) else pl_sub(a, b)
            a, b = _pp(a), _pp(b)
            return a + b if isinstance(t, Add) else a - b
        if isinstance(t, Mul):
            a, b = self.term(t.left), self.term(t.right)
            if isinstance(a, PLFunction) and isinstance(b, PLFunction):
                return pl_mul(a, b)
            return _pp(a) * _pp(b)
        if isinstance(t, Abs):
            inner = self.term(t.term)
            if not isinstance(inner, PLFunction):
                raise DegreeCapError("abs applies only to piecewise-linear terms", 0)
            return pl_abs(inner)
        raise TypeError(f"not a term: {t!r}")

    def formula(self, phi: Formula) -> CertifiedValue:
        if isinstance(phi, Norm):
            return sup_norm(self.term(phi.term), self.width)
        if isinstance(phi, Dist):
            return self.formula(Norm(Sub(phi.left, phi.right)))
        if isinstance(phi, Const):
            return CertifiedValue.exact(phi.value)
        if isinstance(phi, FAdd):
            return self.formula(phi.left) + self.formula(phi.right)
        if isinstance(phi, DotMinus):
            return self.formula(phi.left).dotminus(self.formula(phi.right))
        if isinstance(phi, Max):
            return cmax(*(self.formula(a) for a in phi.args))
        if isinstance(phi, Min):
            return cmin(*(self.formula(a) for a in phi.args))
        if isinstance(phi, FScale):
            return self.formula(phi.formula).scale(phi.factor)
        if isinstance(phi, Sqrt):
            v = self.formula(phi.formula)
            if v.upper < -self.width:
                raise ValueError(f"square root of a negative value {v}")
            return CertifiedValue(max(v.lower, 0), max(v.upper, 0)).sqrt(self.width)
        raise TypeError(f"not a formula: {phi!r}")


def _pp(x) -> PiecewisePoly:
    return x if isinstance(x, PiecewisePoly) else PiecewisePoly.from_pl(x)


def eval_qf(phi: Formula | str, assignment: Mapping[int, PLFunction] | Sequence[PLFunction],
            width=DEFAULT_WIDTH, graph: MetricGraph | None = None) -> CertifiedValue:
    """Certified value of a quantifier-free formula under an assignment.

    ``assignment`` maps variable numbers (from 1) to functions; a sequence is
    read as ``x1, x2, ...``.  The result is exact whenever every norm is of a
    piecewise linear or quadratic term and no irrational square root occurs.
    """
    if isinstance(phi, str):
        phi = parse_formula(phi)
    if not isinstance(assignment, Mapping):
        assignment = {i + 1: f for i, f in enumerate(assignment)}
    missing = free_vars(phi) - set(assignment)
    if missing:
        raise KeyError(f"unassigned variables: {', '.join(f'x{i}' for i in sorted(missing))}")
    width = as_fraction(width)
    inner = width / 4
    for _ in range(8):
        ev = _Evaluator(assignment, inner)
        if graph is not None and ev.graph is None:
            ev.graph = graph
        value = ev.formula(phi)
        if value.width <= width:
            return value
        inner = inner * inner / 4
    raise ArithmeticError(f"could not reach width {width}: got {value}")


# ---------------------------------------------------------------------------
# heuristic quantifier bounds


@dataclass(frozen=True)
class QuantifierBound:
    """One-sided: for ``sup`` a lower bound, for ``inf`` an upper bound."""

    mode: str
    value: CertifiedValue
    witness: dict
    index: int
    candidates: int

    @property
    def side(self) -> str:
        return "lower bound" if self.mode == "sup" else "upper bound"


def random_pl(rng: random.Random, graph: MetricGraph, breakpoints: int, radius=1,
              resolution: int = 64) -> PLFunction:
    """A PL function with ``breakpoints`` interior breakpoints per edge and
    values in ``[-radius, radius]`` on a grid of step ``radius/resolution``."""
    radius = as_fraction(radius)

    def value():
        return radius * Fraction(rng.randint(-resolution, resolution), resolution)

    at_vertex = {v: value() for v in graph.vertices}
    pieces = {}
    for e in graph.edges.values():
        ts = set()
        while len(ts) < breakpoints:
            ts.add(e.length * Fraction(rng.randint(1, 4 * resolution - 1), 4 * resolution))
        pts = [(Fraction(0), at_vertex[e.u])] + [(t, value()) for t in sorted(ts)]
        pts.append((e.length, at_vertex[e.v]))
        pieces[e.id] = pts
    return PLFunction(graph, pieces, isolated=at_vertex)


def normalize(f: PLFunction, radius=1) -> PLFunction | None:
    """Scale ``f`` to sup-norm ``radius`` (``None`` for the zero function)."""
    n = sup_norm(f).value
    return None if n == 0 else pl_scale(f, as_fraction(radius) / n)


def candidate_stream(graph: MetricGraph, nvars: int, budget: tuple, radius=1,
                     normalized: bool = False):
    """Deterministic candidate tuples; a larger budget only appends candidates.

    Constant tuples over ``{0, radius, -radius}`` come first, then for each
    breakpoint count ``b = 0..B`` the first ``samples`` draws of a stream
    seeded by ``(seed, b)``.
    """
    breakpoints, samples, seed = budget
    radius = as_fraction(radius)
    consts = [Fraction(0), radius, -radius]
    if normalized:
        consts = [radius, -radius]

    def tuples(n):
        if n == 0:
            yield ()
            return
        for head in consts:
            for rest in tuples(n - 1):
                yield (head,) + rest

    for combo in tuples(nvars):
        yield tuple(PLFunction.constant(graph, c) for c in combo)
    for b in range(breakpoints + 1):
        rng = random.Random(f"{seed}:{b}")
        for _ in range(samples):
            out = []
            for _ in range(nvars):
                f = random_pl(rng, graph, b, radius)
                if normalized:
                    f = normalize(f, radius) or PLFunction.constant(graph, radius)
                out.append(f)
            yield tuple(out)


def bound_quantifier(mode: str, phi: Formula | str, variables: Sequence[int], graph: MetricGraph,
                     budget: tuple = (2, 20, 0), *, radius=1, fixed: Mapping | None = None,
                     normalized: bool = False, width=DEFAULT_WIDTH) -> QuantifierBound:
    """Search PL candidates in the ball of radius ``radius`` for ``sup``/``inf``.

    Never a two-sided answer: ``sup`` yields a value the supremum is at least,
    ``inf`` one the infimum is at most, each with the attaining candidate.
    Ties go to the earliest candidate.
    """
    if mode not in ("sup", "inf"):
        raise ValueError("mode must be 'sup' or 'inf'")
    if not variables:
        raise ValueError("no variables to quantify")
    if isinstance(phi, str):
        phi = parse_formula(phi)
    breakpoints, samples, seed = budget
    if breakpoints < 0 or samples < 0:
        raise ValueError("budget must be nonnegative")
    fixed = dict(fixed or {})
    best = None
    count = 0
    for n, cand in enumerate(candidate_stream(graph, len(variables), budget, radius, normalized)):
        a = dict(fixed)
        a.update(zip(variables, cand))
        v = eval_qf(phi, a, width, graph)
        count += 1
        key = v.lower if mode == "sup" else v.upper
        if best is None or (key > best[0] if mode == "sup" else key < best[0]):
            best = (key, v, n, dict(zip(variables, cand)))
    key, v, n, witness = best
    return QuantifierBound(mode, v, witness, n, count)


# ---------------------------------------------------------------------------
# the projectionless axiom


def projectionless_formula() -> Formula:
    """``min(2‖1 − f²‖ ∸ 1, 1 ∸ 4‖f² − f⁴‖)`` with ``f`` real, so ``ff* = f²``."""
    return parse_formula("min(dot-(2*norm(1 - x1*x1), 1), dot-(1, 4*norm(x1*x1 - (x1*x1)*(x1*x1))))")


NORM_TOLERANCE = Fraction(1, 10**9)


def projectionless_value(f: PLFunction, width=DEFAULT_WIDTH) -> CertifiedValue:
    """The axiom body at ``f``; zero on connected graphs, one at a proper projection."""
    n = sup_norm(f).value
    if abs(n - 1) > NORM_TOLERANCE:
        raise ValueError(f"the axiom is stated for norm-one functions, got norm {n}")
    return eval_qf(projectionless_formula(), {1: f}, width)
