"""JSON files for graphs, functions, covers, maps, witnesses, certificates
and verdicts.

Every top-level document carries ``"format": 1``.  Rationals are ``"p/q"``
strings.  A ``graph`` or function field is either an inline object or a
path, resolved relative to the file that mentions it; inline functions
inherit the graph of the enclosing document.
"""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources
from pathlib import Path

import jsonschema

from .amalgam import ArcMap, CircleMap, Verdict
from .certified import CertifiedValue, as_fraction, format_fraction
from .chainability import ChainCertificate, Witness
from .space import ClosedSet, MetricGraph, OpenSet, PLFunction, Point, Region

FORMAT = 1
SCHEMAS = ("graph", "function", "functions", "cover", "map", "witness", "certificate", "verdict")


class InputError(ValueError):
    """A file is missing, is not JSON, or does not match its schema."""


_cache: dict[str, dict] = {}


def schema(name: str) -> dict:
    if name not in _cache:
        text = resources.files("continua").joinpath("schemas", f"{name}.json").read_text()
        _cache[name] = json.loads(text)
    return _cache[name]


def validate(doc, name: str, where: str = "<input>"):
    v = jsonschema.Draft202012Validator(schema(name))
    errors = sorted(v.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise InputError(f"{where}: {e.json_path}: {e.message}")


def rational(x) -> str:
    return format_fraction(as_fraction(x))


def parse_rational(s: str) -> Fraction:
    return Fraction(s)


def read_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text())
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except json.JSONDecodeError as e:
        raise InputError(f"{path}: line {e.lineno} column {e.colno}: {e.msg}") from None


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


# ---------------------------------------------------------------------------
# encoding


def graph_to_json(X: MetricGraph, *, top: bool = True) -> dict:
    doc = {
        "vertices": list(X.vertices),
        "edges": [{"id": e.id, "u": e.u, "v": e.v, "len": rational(e.length)} for e in X.edges.values()],
    }
    if top:
        doc["format"] = FORMAT
    return doc


def function_to_json(f: PLFunction, *, graph: bool = False) -> dict:
    doc = {"pieces": {e: [[rational(t), rational(v)] for t, v in pts] for e, pts in f.pieces.items()}}
    if f.isolated:
        doc["isolated"] = {v: rational(x) for v, x in f.isolated.items()}
    if graph:
        doc["format"] = FORMAT
        doc["graph"] = graph_to_json(f.graph, top=False)
    return doc


def functions_to_json(fs, key: str = "functions") -> dict:
    return {"format": FORMAT, "graph": graph_to_json(fs[0].graph, top=False),
            key: [function_to_json(f) for f in fs]}


def cover_to_json(sets) -> dict:
    return functions_to_json([U.generator for U in sets], "sets")


def map_to_json(m) -> dict:
    if isinstance(m, CircleMap):
        return {"format": FORMAT, "kind": "circle", "domain": graph_to_json(m.domain, top=False),
                "lift": function_to_json(m.lift)}
    return {"format": FORMAT, "kind": "arc", "domain": graph_to_json(m.domain, top=False),
            "values": function_to_json(m.values)}


def point_to_json(p: Point | None):
    if p is None:
        return None
    return {"edge": p.edge, "t": rational(p.t), "vertex": p.vertex}


def certified_to_json(c: CertifiedValue) -> dict:
    return c.to_json()


def to_json(x):
    """Generic encoder for report values."""
    if isinstance(x, bool) or x is None or isinstance(x, str):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return rational(x)
    if isinstance(x, CertifiedValue):
        return certified_to_json(x)
    if isinstance(x, Point):
        return point_to_json(x)
    if isinstance(x, PLFunction):
        return function_to_json(x)
    if isinstance(x, (OpenSet, ClosedSet)):
        return {"generator": function_to_json(x.generator)}
    if isinstance(x, Region):
        return region_to_json(x)
    if isinstance(x, MetricGraph):
        return graph_to_json(x, top=False)
    if isinstance(x, dict):
        return {str(k): to_json(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [to_json(v) for v in x]
    raise TypeError(f"cannot encode {type(x).__name__}")


def region_to_json(R: Region) -> dict:
    """Vertices, and per edge the sorted cut points with cell membership."""
    cells = {}
    for eid, c in R.cells.items():
        c = c.simplified()
        cells[eid] = {
            "cuts": [rational(t) for t in c.cuts],
            "points": list(c.points),
            "segments": list(c.segments),
        }
    return {"vertices": sorted(R.vertices), "edges": cells}


def witness_to_json(w: Witness) -> dict:
    return {
        "format": FORMAT,
        "kind": "witness",
        "graph": graph_to_json(w.g[0].graph, top=False),
        "m": w.m,
        "eps": rational(w.eps),
        "eps_prime": None if w.eps_prime is None else rational(w.eps_prime),
        "delta": None if w.delta is None else rational(w.delta),
        "g": [function_to_json(g) for g in w.g],
        "h": [[function_to_json(h) for h in row] for row in w.h],
        "assignment": None if w.assignment is None else list(w.assignment),
    }


def certificate_to_json(c: ChainCertificate) -> dict:
    return {
        "format": FORMAT,
        "kind": "chain-certificate",
        "graph": graph_to_json(c.graph, top=False),
        "chain": [function_to_json(V.generator) for V in c.chain],
        "target": None if c.target is None else [function_to_json(U.generator) for U in c.target],
        "assignment": None if c.assignment is None else list(c.assignment),
        "depth": c.depth,
    }


def verdict_to_json(v: Verdict, W: MetricGraph, r: ArcMap, s: ArcMap, shift) -> dict:
    return {
        "format": FORMAT,
        "kind": "verdict",
        "outcome": v.outcome,
        "evidence": to_json(v.evidence),
        "inputs": {
            "W": graph_to_json(W, top=False),
            "r": function_to_json(r.values),
            "s": function_to_json(s.values),
            "shift": rational(shift),
        },
    }


# ---------------------------------------------------------------------------
# decoding


class _Loader:
    """Resolves references relative to the document being read."""

    def __init__(self, base: Path):
        self.base = base

    def graph(self, ref) -> MetricGraph:
        if isinstance(ref, str):
            path = self.base / ref
            doc = read_json(path)
            validate(doc, "graph", str(path))
            ref = doc
        return MetricGraph(ref["vertices"], [(e["id"], e["u"], e["v"], Fraction(e["len"])) for e in ref["edges"]])

    def function(self, ref, graph: MetricGraph | None) -> PLFunction:
        if isinstance(ref, str):
            path = self.base / ref
            doc = read_json(path)
            validate(doc, "function", str(path))
            return _Loader(path.parent).function(doc, None)
        if "graph" in ref:
            graph = self.graph(ref["graph"])
        if graph is None:
            raise InputError("function has no graph")
        pieces = {e: [(Fraction(t), Fraction(v)) for t, v in pts] for e, pts in ref["pieces"].items()}
        iso = {v: Fraction(x) for v, x in ref.get("isolated", {}).items()}
        return PLFunction(graph, pieces, isolated=iso)


def _load(path, name):
    path = Path(path)
    doc = read_json(path)
    validate(doc, name, str(path))
    return doc, _Loader(path.parent)


def _guard(fn):
    def wrapped(*a, **kw):
        try:
            return fn(*a, **kw)
        except InputError:
            raise
        except (ValueError, KeyError, ZeroDivisionError) as e:
            raise InputError(f"{a[0] if a else ''}: {e}") from None
    wrapped.__name__ = fn.__name__
    wrapped.__doc__ = fn.__doc__
    return wrapped


@_guard
def load_graph(path) -> MetricGraph:
    doc, ld = _load(path, "graph")
    return ld.graph(doc)


@_guard
def load_function(path) -> PLFunction:
    doc, ld = _load(path, "function")
    return ld.function(doc, None)


@_guard
def load_functions(path) -> list[PLFunction]:
    doc, ld = _load(path, "functions")
    X = ld.graph(doc["graph"])
    return [ld.function(f, X) for f in doc["functions"]]


@_guard
def load_cover(path) -> list[OpenSet]:
    doc, ld = _load(path, "cover")
    X = ld.graph(doc["graph"])
    return [OpenSet(ld.function(f, X)) for f in doc["sets"]]


@_guard
def load_map(path):
    doc, ld = _load(path, "map")
    X = ld.graph(doc["domain"])
    if doc["kind"] == "circle":
        return CircleMap(X, ld.function(doc["lift"], X))
    return ArcMap(X, ld.function(doc["values"], X))


def witness_from_json(doc, ld: _Loader) -> Witness:
    X = ld.graph(doc["graph"])
    opt = lambda x: None if x is None else Fraction(x)  # noqa: E731
    return Witness(
        doc["m"],
        [ld.function(g, X) for g in doc["g"]],
        [[ld.function(h, X) for h in row] for row in doc["h"]],
        Fraction(doc["eps"]),
        opt(doc.get("eps_prime")),
        opt(doc.get("delta")),
        doc.get("assignment"),
    )


@_guard
def load_witness(path) -> Witness:
    doc, ld = _load(path, "witness")
    return witness_from_json(doc, ld)


def certificate_from_json(doc, ld: _Loader) -> ChainCertificate:
    X = ld.graph(doc["graph"])
    chain = [OpenSet(ld.function(f, X)) for f in doc["chain"]]
    target = doc.get("target")
    target = None if target is None else [OpenSet(ld.function(f, X)) for f in target]
    a = doc.get("assignment")
    return ChainCertificate(chain, None if a is None else tuple(a), target, doc.get("depth"))


@_guard
def load_document(path):
    """A certificate or verdict file, dispatched on ``kind``."""
    path = Path(path)
    doc = read_json(path)
    kind = doc.get("kind") if isinstance(doc, dict) else None
    if kind == "chain-certificate":
        validate(doc, "certificate", str(path))
        return kind, certificate_from_json(doc, _Loader(path.parent)), doc
    if kind == "verdict":
        validate(doc, "verdict", str(path))
        return kind, doc, doc
    if kind == "witness":
        validate(doc, "witness", str(path))
        return kind, witness_from_json(doc, _Loader(path.parent)), doc
    raise InputError(f"{path}: $.kind: expected 'chain-certificate', 'verdict' or 'witness', got {kind!r}")


def verdict_inputs(doc):
    """``(W, r, s, shift)`` from a verdict document."""
    ld = _Loader(Path("."))
    ins = doc["inputs"]
    W = ld.graph(ins["W"])
    return W, ArcMap(W, ld.function(ins["r"], W)), ArcMap(W, ld.function(ins["s"], W)), Fraction(ins["shift"])
