"""Command-line front end.

Exit codes: 0 when the value was computed or the property holds, 1 when the
property fails (the report carries the witness), 2 for bad input or usage.
"""

from __future__ import annotations

import argparse
import random
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import io
from .amalgam import (
    ArcMap,
    CircleMap,
    FiberProductError,
    compose_check,
    family_shift,
    fiber_product_circle,
    hoehn_check,
    identity_map,
    shift_map,
)
from .certified import DEFAULT_WIDTH, as_fraction
from .chainability import (
    ChainError,
    CoverError,
    WitnessError,
    build_witness,
    extract_chain,
    nerve,
    nerve_and_is_chain,
    prune_chain,
    psi0,
    psi1,
    psi2,
    search_chain_refinement,
    sigma_parts,
)
from .logic import FormulaSyntaxError, eval_qf, normalize, parse_formula, projectionless_value, random_pl
from .space import GraphError, PLFunction, graph_components

COMMANDS = ("eval", "psi", "sigma-inner", "witness", "extract-chain", "refine", "nerve", "prune",
            "hoehn", "fiber", "axiom-conn", "verify")


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: dict = field(default_factory=dict)
    width: Fraction = DEFAULT_WIDTH
    depth: int = 6
    seed: int = 0
    samples: int = 100
    breakpoints: int = 3
    fmt: str = "text"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown subcommand {self.command!r}")
        if self.width <= 0:
            raise UsageError("width must be positive")
        if self.depth < 1:
            raise UsageError("depth must be at least 1")
        if self.fmt not in ("text", "json"):
            raise UsageError("format must be text or json")


@dataclass
class Report:
    code: int
    body: dict
    artifacts: dict = field(default_factory=dict)  # file name -> document


def _need(cfg: RunConfig, *names):
    missing = [n for n in names if cfg.inputs.get(n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + n.replace("_", "-") for n in missing))
    return [cfg.inputs[n] for n in names]


# ---------------------------------------------------------------------------
# subcommands; each returns (exit code, report body, artifacts)


def _eval(cfg):
    (formula, path) = _need(cfg, "formula", "functions")
    fs = io.load_functions(path)
    phi = parse_formula(formula)
    v = eval_qf(phi, fs, cfg.width)
    return 0, {"value": v, "variables": len(fs)}, {}


def _psi(cfg):
    (path,) = _need(cfg, "functions")
    fs = io.load_functions(path)
    body = {"k": len(fs), "psi0": psi0(fs), "psi1": psi1(fs, cfg.width)}
    if cfg.inputs.get("witness"):
        w = io.load_witness(cfg.inputs["witness"])
        body.update({"m": w.m, "psi0_g": psi0(w.g), "psi1_g": psi1(w.g, cfg.width), "psi2": psi2(fs, w.g, w.h)})
    return 0, body, {}


def _sigma(cfg):
    fpath, wpath = _need(cfg, "functions", "witness")
    fs, w = io.load_functions(fpath), io.load_witness(wpath)
    parts = sigma_parts(fs, w, cfg.width)
    body = {"k": len(fs), "m": w.m, **parts}
    delta = cfg.options.get("delta")
    if delta is None:
        return 0, body, {}
    body["delta"] = delta
    holds = parts["value"].upper <= delta
    body["holds"] = holds
    return (0 if holds else 1), body, {}


def _witness(cfg):
    (path,) = _need(cfg, "functions")
    fs = io.load_functions(path)
    delta = cfg.options.get("delta")
    if delta is None:
        delta = psi0(fs).value / 2
    try:
        w = build_witness(fs, delta, max_depth=cfg.depth, width=cfg.width)
    except WitnessError as e:
        return 1, {"delta": delta, "failure": str(e)}, {}
    doc = io.witness_to_json(w)
    parts = sigma_parts(fs, w, cfg.width)
    body = {"delta": delta, "m": w.m, "eps": w.eps, "eps_prime": w.eps_prime,
            "assignment": w.assignment, "sigma_inner": parts["value"], "witness": doc}
    return 0, body, {"witness.json": doc}


def _extract(cfg):
    fpath, wpath = _need(cfg, "functions", "witness")
    fs, w = io.load_functions(fpath), io.load_witness(wpath)
    try:
        cert = extract_chain(fs, w, check_hypotheses=cfg.options.get("strict", False), width=cfg.width)
    except (WitnessError, ChainError, CoverError) as e:
        return 1, {"failure": str(e)}, {}
    doc = io.certificate_to_json(cert)
    return 0, {"links": len(cert.chain), "assignment": list(cert.assignment), "certificate": doc}, {
        "certificate.json": doc}


def _refine(cfg):
    (path,) = _need(cfg, "cover")
    U = io.load_cover(path)
    result = search_chain_refinement(U, cfg.depth)
    if not result:
        return 1, {"result": "exhausted", "max_depth": cfg.depth}, {}
    doc = io.certificate_to_json(result)
    return 0, {"result": "chain", "depth": result.depth, "links": len(result.chain),
               "assignment": list(result.assignment), "certificate": doc}, {"certificate.json": doc}


def _nerve(cfg):
    (path,) = _need(cfg, "cover")
    U = io.load_cover(path)
    N = nerve(U)
    check = nerve_and_is_chain(U)
    body = {"size": N.size, "edges": [list(e) for e in sorted(N.edges)], "is_chain": bool(check)}
    if not check:
        i, j, kind = check.violation
        body["violation"] = {"i": i, "j": j, "kind": kind}
    return (0 if check else 1), body, {}


def _prune(cfg):
    (path,) = _need(cfg, "cover")
    U = io.load_cover(path)
    try:
        W = prune_chain(U)
    except (ChainError, CoverError) as e:
        return 1, {"failure": str(e)}, {}
    kept = [next(i for i, V in enumerate(U) if V is W_j) for W_j in W]
    doc = io.cover_to_json(W)
    return 0, {"kept": kept, "cover": doc}, {"pruned.json": doc}


def _family(cfg):
    if cfg.inputs.get("f") or cfg.inputs.get("g"):
        fpath, gpath = _need(cfg, "f", "g")
        f, g = io.load_map(fpath), io.load_map(gpath)
        if not isinstance(f, CircleMap) or not isinstance(g, CircleMap):
            raise UsageError("--f and --g must be circle maps")
        return f, g
    return identity_map(), shift_map(cfg.options.get("shift", Fraction(1, 2)))


def _hoehn(cfg):
    wpath, rpath, spath = _need(cfg, "w", "r", "s")
    W = io.load_graph(wpath)
    r, s = io.load_map(rpath), io.load_map(spath)
    if not isinstance(r, ArcMap) or not isinstance(s, ArcMap):
        raise UsageError("--r and --s must be arc maps")
    f, g = _family(cfg)
    c = family_shift(f, g)
    v = hoehn_check(W, r, s, f, g)
    doc = io.verdict_to_json(v, W, r, s, c)
    body = {"verdict": v.outcome, "evidence": doc["evidence"], "shift": c}
    if v.disconnected:
        body["components"] = v.evidence["components"]
    return (0 if v.disconnected else 1), body, {"verdict.json": doc}


def _fiber(cfg):
    f, g = _family(cfg)
    try:
        W, r, s = fiber_product_circle(f, g)
    except FiberProductError as e:
        return 1, {"failure": str(e)}, {}
    comps = graph_components(W)
    gdoc = io.graph_to_json(W)
    rdoc = {"format": io.FORMAT, "kind": "arc", "domain": "fiber.json", "values": io.function_to_json(r.values)}
    sdoc = {"format": io.FORMAT, "kind": "arc", "domain": "fiber.json", "values": io.function_to_json(s.values)}
    body = {"components": comps.count, "graph": gdoc, "r": rdoc["values"], "s": sdoc["values"],
            "commutes": bool(compose_check(f, r, g, s))}
    return 0, body, {"fiber.json": gdoc, "r.json": rdoc, "s.json": sdoc}


def _axiom(cfg):
    (path,) = _need(cfg, "graph")
    X = io.load_graph(path)
    rng = random.Random(cfg.seed)
    worst, worst_at, count = None, None, 0
    candidates = []
    for _ in range(cfg.samples):
        f = normalize(random_pl(rng, X, cfg.breakpoints))
        candidates.append(f or PLFunction.constant(X, 1))
    comps = graph_components(X)
    if comps.count > 1:
        first = set(comps.vertices[0])
        candidates.append(PLFunction.from_callable(
            X, lambda e, t: 1 if (X.edges[e].u if e else t) in first else 0))
    for n, f in enumerate(candidates):
        v = projectionless_value(f, cfg.width)
        count += 1
        if worst is None or v.upper > worst.upper:
            worst, worst_at = v, n
    holds = worst.upper <= cfg.width
    body = {"samples": count, "components": comps.count, "max_value": worst, "holds": holds}
    if not holds:
        body["witness"] = {"index": worst_at, "function": io.function_to_json(candidates[worst_at])}
    return (0 if holds else 1), body, {}


def _verify(cfg):
    (path,) = _need(cfg, "certificate")
    kind, obj, doc = io.load_document(path)
    if kind == "chain-certificate":
        problems = obj.verify()
        if obj.target is None and obj.assignment is not None:
            problems.append("assignment given without a target cover")
        return (0 if not problems else 1), {"kind": kind, "problems": problems, "ok": not problems}, {}
    if kind == "witness":
        fpath = cfg.inputs.get("functions")
        if fpath is None:
            raise UsageError("verifying a witness needs --functions")
        fs = io.load_functions(fpath)
        parts = sigma_parts(fs, obj, cfg.width)
        ok = obj.delta is None or parts["value"].upper <= obj.delta
        return (0 if ok else 1), {"kind": kind, "sigma_inner": parts["value"], "delta": obj.delta, "ok": ok}, {}
    W, r, s, c = io.verdict_inputs(doc)
    v = hoehn_check(W, r, s, identity_map(), shift_map(c))
    again = io.verdict_to_json(v, W, r, s, c)
    problems = []
    if again["outcome"] != doc["outcome"]:
        problems.append(f"outcome {doc['outcome']} does not reproduce: got {again['outcome']}")
    elif again["evidence"] != doc["evidence"]:
        problems.append("evidence does not reproduce")
    return (0 if not problems else 1), {"kind": kind, "outcome": again["outcome"], "problems": problems,
                                        "ok": not problems}, {}


HANDLERS = {
    "eval": _eval, "psi": _psi, "sigma-inner": _sigma, "witness": _witness, "extract-chain": _extract,
    "refine": _refine, "nerve": _nerve, "prune": _prune, "hoehn": _hoehn, "fiber": _fiber,
    "axiom-conn": _axiom, "verify": _verify,
}


def run(cfg: RunConfig) -> Report:
    header = {"format": io.FORMAT, "command": cfg.command, "seed": cfg.seed, "width": cfg.width}
    try:
        code, body, artifacts = HANDLERS[cfg.command](cfg)
    except (io.InputError, UsageError, FormulaSyntaxError, GraphError, CoverError) as e:
        return Report(2, {**header, "error": str(e)})
    except ValueError as e:
        # precondition failures on well-formed files (family, ranges, norms)
        return Report(2, {**header, "error": str(e)})
    status = "ok" if code == 0 else "fails"
    return Report(code, io.to_json({**header, "status": status, **body}), artifacts)


# ---------------------------------------------------------------------------
# rendering


def render_text(body: dict) -> str:
    lines = []

    def walk(prefix, x):
        if isinstance(x, dict) and x.keys() == {"lower", "upper"}:
            lines.append(f"{prefix}: [{x['lower']}, {x['upper']}]")
        elif isinstance(x, dict) and not {"pieces", "vertices", "generator", "format"} & x.keys():
            for k in sorted(x):
                walk(f"{prefix}.{k}" if prefix else k, x[k])
        elif isinstance(x, dict):
            lines.append(f"{prefix}: <{'document' if 'format' in x else 'object'}; use --format json>")
        else:
            lines.append(f"{prefix}: {x}")

    for k in sorted(body):
        walk(k, body[k])
    return "\n".join(lines) + "\n"


def render(report: Report, fmt: str) -> str:
    return io.dumps(report.body) if fmt == "json" else render_text(report.body)


# ---------------------------------------------------------------------------
# argument parsing


def _rational_arg(s: str) -> Fraction:
    try:
        return as_fraction(Fraction(s))
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", dest="fmt", choices=("text", "json"), default="text")
    common.add_argument("--width", type=_rational_arg, default=DEFAULT_WIDTH,
                        help="certified interval width (default 1/10^9)")
    common.add_argument("--depth", type=int, default=6, help="mesh depth / search bound")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--samples", type=int, default=100)
    common.add_argument("--breakpoints", type=int, default=3)
    common.add_argument("--out", type=Path, help="directory for produced files")

    p = argparse.ArgumentParser(prog="continua", description="Exact computations on PL models of continua.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help, *opts):
        sp = sub.add_parser(name, parents=[common], help=help)
        for o in opts:
            o(sp)
        return sp

    fns = lambda sp: sp.add_argument("--functions", type=Path, help="tuple file")  # noqa: E731
    wit = lambda sp: sp.add_argument("--witness", type=Path, help="witness file")  # noqa: E731
    cov = lambda sp: sp.add_argument("--cover", type=Path, help="cover file")  # noqa: E731
    delta = lambda sp: sp.add_argument("--delta", type=_rational_arg)  # noqa: E731

    def fam(sp):
        sp.add_argument("--f", type=Path, help="circle map file (default lift x)")
        sp.add_argument("--g", type=Path, help="circle map file (default lift y + shift)")
        sp.add_argument("--shift", type=_rational_arg, default=Fraction(1, 2))

    add("eval", "evaluate a quantifier-free formula",
        lambda sp: sp.add_argument("--formula", required=True), fns)
    add("psi", "the formulas psi0, psi1 (and psi2 with a witness)", fns, wit)
    add("sigma-inner", "the inner formula at a witness", fns, wit, delta)
    add("witness", "build a witness for a nonnegative tuple on an arc", fns, delta)
    add("extract-chain", "chain refinement from a witness", fns, wit,
        lambda sp: sp.add_argument("--strict", action="store_true", help="check the witness hypotheses"))
    add("refine", "search for a chain refinement of a cover", cov)
    add("nerve", "nerve of a cover and whether it is a chain", cov)
    add("prune", "prune a cover without long-range intersections", cov)
    add("hoehn", "disconnection verdict for a common refinement of the circle maps",
        lambda sp: sp.add_argument("--w", type=Path), lambda sp: sp.add_argument("--r", type=Path),
        lambda sp: sp.add_argument("--s", type=Path), fam)
    add("fiber", "fiber product of two circle maps on [0, 1]", fam)
    add("axiom-conn", "check the projectionless axiom on random functions",
        lambda sp: sp.add_argument("--graph", type=Path))
    add("verify", "re-check a certificate, verdict or witness file",
        lambda sp: sp.add_argument("--certificate", type=Path), fns)
    return p


_INPUTS = ("formula", "functions", "witness", "cover", "w", "r", "s", "f", "g", "graph", "certificate")
_OPTIONS = ("delta", "strict", "shift")


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    inputs = {k: getattr(ns, k) for k in _INPUTS if getattr(ns, k, None) is not None}
    options = {k: getattr(ns, k) for k in _OPTIONS if getattr(ns, k, None) is not None}
    return RunConfig(ns.command, inputs, ns.width, ns.depth, ns.seed, ns.samples, ns.breakpoints, ns.fmt, options)


def write_artifacts(report: Report, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    for name, doc in report.artifacts.items():
        (out / name).write_text(io.dumps(doc))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as e:
        return 2 if e.code else 0
    try:
        cfg = config_from_args(ns)
    except UsageError as e:
        print(f"continua: {e}", file=sys.stderr)
        return 2
    report = run(cfg)
    sys.stdout.write(render(report, cfg.fmt))
    if report.code == 2:
        print(f"continua: {report.body['error']}", file=sys.stderr)
    elif ns.out is not None and report.artifacts:
        write_artifacts(report, ns.out)
    return report.code


if __name__ == "__main__":
    sys.exit(main())
