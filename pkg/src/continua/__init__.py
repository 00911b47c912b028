"""Exact piecewise-linear models of continua: chainability formulas and
their witnesses, chain refinements, a continuous-logic evaluator, and
circle-map fiber products."""

from .amalgam import (
    ArcMap,
    CircleMap,
    FiberProductError,
    Verdict,
    closed_preimage,
    compose_check,
    fiber_product_circle,
    hoehn_check,
    shift_map,
)
from .certified import DEFAULT_WIDTH, CertifiedValue
from .chainability import (
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
    nerve_and_is_chain,
    prune_chain,
    psi0,
    psi1,
    psi2,
    refines,
    search_chain_refinement,
    sigma_inner,
)
from .logic import bound_quantifier, eval_qf, parse_formula, projectionless_value
from .space import (
    ClosedSet,
    MetricGraph,
    OpenSet,
    PLFunction,
    Point,
    Region,
    circle,
    covers,
    graph_components,
    interval,
    superlevel,
    sup_norm,
)

__version__ = "0.1.0"

__all__ = [
    "ArcMap",
    "CertifiedValue",
    "ChainCertificate",
    "ChainError",
    "CircleMap",
    "ClosedSet",
    "Cover",
    "CoverError",
    "DEFAULT_WIDTH",
    "Exhausted",
    "FiberProductError",
    "MetricGraph",
    "OpenSet",
    "PLFunction",
    "Point",
    "Region",
    "Verdict",
    "Witness",
    "WitnessError",
    "bound_quantifier",
    "build_witness",
    "circle",
    "closed_preimage",
    "compose_check",
    "covers",
    "eval_qf",
    "extract_chain",
    "fiber_product_circle",
    "find_chain_refinement",
    "graph_components",
    "hoehn_check",
    "interval",
    "nerve_and_is_chain",
    "parse_formula",
    "projectionless_value",
    "prune_chain",
    "psi0",
    "psi1",
    "psi2",
    "refines",
    "search_chain_refinement",
    "shift_map",
    "sigma_inner",
    "sup_norm",
    "superlevel",
]
