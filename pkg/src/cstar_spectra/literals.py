"""
JSON literals for algebra kinds, elements, module vectors and operators.

Complex numbers are written as plain numbers or [re, im] pairs. Every literal
emitted here parses back to an equal value.
"""

from __future__ import annotations

from typing import Any

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraKind,
    ContinuousFunctions,
    EssentiallyBounded,
    GridSpec,
    MatrixAlgebra,
    make_element,
)
from .errors import KindMismatch, ParseError, ShapeMismatch
from .expression import parse_expression
from .module import Integers, ModuleVector, Natural
from .operators import (
    Adjoint,
    BilateralShift,
    BlockByIndicator,
    Compose,
    DiagonalSelfAdjoint,
    DiagonalUnitary,
    DyadicCompress,
    DyadicExpand,
    Negate,
    OddCompress,
    OddExpand,
    OperatorExpr,
    ScalarMult,
    Sum,
    UnilateralShift,
    WeightedShift,
)

DEFAULT_KIND_SPEC = {"kind": "continuous", "resolution": 256}


# =============================================================================
# Numbers
# =============================================================================

def complex_from_literal(value: Any) -> complex:
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return complex(value)
    raise ParseError(f"expected a number or an [re, im] pair, got {value!r}")


def complex_to_literal(value: complex) -> list[float]:
    return [float(value.real), float(value.imag)]


# =============================================================================
# Kinds
# =============================================================================

def kind_from_spec(spec: dict[str, Any] | None) -> AlgebraKind:
    spec = dict(DEFAULT_KIND_SPEC if spec is None else spec)
    name = spec.get("kind", "continuous")
    try:
        if name == "matrix":
            return MatrixAlgebra(int(spec["n"]), bool(spec.get("finite_section", False)))
        grid = GridSpec(int(spec.get("resolution", 256)), int(spec.get("refinement_factor", 4)))
    except KeyError as e:
        raise ParseError(f"algebra spec is missing {e}") from e
    except (TypeError, ValueError) as e:
        raise ParseError(f"invalid algebra spec {spec!r}: {e}") from e
    if name == "continuous":
        return ContinuousFunctions(grid)
    if name == "step":
        return EssentiallyBounded(grid)
    raise ParseError(f"unknown algebra kind {name!r} (expected continuous, step or matrix)")


def kind_to_spec(kind: AlgebraKind) -> dict[str, Any]:
    if isinstance(kind, MatrixAlgebra):
        spec: dict[str, Any] = {"kind": "matrix", "n": kind.n}
        if kind.finite_section:
            spec["finite_section"] = True
        return spec
    spec = {"kind": kind.label, "resolution": kind.grid.resolution}
    if kind.grid.refinement_factor != GridSpec().refinement_factor:
        spec["refinement_factor"] = kind.grid.refinement_factor
    return spec


def _has_kind_fields(literal: dict[str, Any]) -> bool:
    return any(key in literal for key in ("kind", "resolution", "n"))


# =============================================================================
# Elements
# =============================================================================

def element_from_literal(literal: Any, default_kind: AlgebraKind | None = None) -> AlgebraElement:
    """Build an element from a literal; a bare string is an expression."""
    if isinstance(literal, str):
        if default_kind is None:
            raise ParseError("an expression element needs an algebra")
        return parse_expression(literal, default_kind)
    if isinstance(literal, (int, float)) and not isinstance(literal, bool):
        return parse_expression(repr(float(literal)), default_kind or kind_from_spec(None))
    if not isinstance(literal, dict):
        raise ParseError(f"element literal must be a string or an object, got {type(literal).__name__}")

    kind = kind_from_spec(literal) if _has_kind_fields(literal) else (default_kind or kind_from_spec(None))
    if default_kind is not None and kind != default_kind:
        raise KindMismatch(f"element over {kind} where {default_kind} was expected")
    payload = [key for key in ("expr", "values", "matrix") if key in literal]
    if len(payload) != 1:
        raise ParseError("element literal needs exactly one of expr, values or matrix")

    match payload[0]:
        case "expr":
            return parse_expression(str(literal["expr"]), kind)
        case "values":
            return make_element(kind, [complex_from_literal(v) for v in literal["values"]])
        case _:
            rows = literal["matrix"]
            try:
                table = [[complex_from_literal(v) for v in row] for row in rows]
            except TypeError as e:
                raise ShapeMismatch(f"matrix literal must be a list of rows: {e}") from e
            return make_element(kind, table)


def element_to_literal(alpha: AlgebraElement) -> dict[str, Any]:
    literal = kind_to_spec(alpha.kind)
    if isinstance(alpha.kind, MatrixAlgebra):
        literal["matrix"] = [[complex_to_literal(v) for v in row] for row in alpha.data]
    else:
        literal["values"] = [complex_to_literal(v) for v in alpha.data]
    return literal


# =============================================================================
# Vectors
# =============================================================================

def indexing_from_literal(literal: dict[str, Any]):
    kind = literal.get("type", "natural")
    size = int(literal["n"])
    if kind == "natural":
        return Natural(size)
    if kind == "integers":
        return Integers(size)
    raise ParseError(f"unknown indexing type {kind!r}")


def indexing_to_literal(indexing) -> dict[str, Any]:
    if isinstance(indexing, Natural):
        return {"type": "natural", "n": indexing.length}
    return {"type": "integers", "n": indexing.radius}


def vector_from_literal(literal: dict[str, Any], default_kind: AlgebraKind | None = None) -> ModuleVector:
    """Dense ``entries`` or a sparse ``coordinates`` table."""
    indexing = indexing_from_literal(literal["indexing"])
    kind = kind_from_spec(literal["algebra"]) if "algebra" in literal else default_kind
    if "entries" in literal:
        entries = [element_from_literal(e, kind) for e in literal["entries"]]
        kind = kind or (entries[0].kind if entries else kind_from_spec(None))
        return ModuleVector.from_entries(kind, indexing, entries)
    if kind is None:
        raise ParseError("a sparse vector literal needs an algebra")
    coords = np.zeros((indexing.size, *kind.element_shape), dtype=np.complex128)
    for row in literal.get("coordinates", []):
        coords[indexing.position(int(row["index"]))] = element_from_literal(row["value"], kind).data
    return ModuleVector(kind, indexing, coords)


def vector_to_literal(x: ModuleVector) -> dict[str, Any]:
    """Sparse coordinate table (nonzero coordinates only)."""
    return {
        "algebra": kind_to_spec(x.kind),
        "indexing": indexing_to_literal(x.indexing),
        "coordinates": [
            {"index": k, "value": element_to_literal(x.entry(k))} for k in x.support()
        ],
    }


# =============================================================================
# Operators
# =============================================================================

LEAF_NODES = {
    "shift": UnilateralShift,
    "bilateral_shift": BilateralShift,
    "dyadic_expand": DyadicExpand,
    "odd_expand": OddExpand,
    "dyadic_compress": DyadicCompress,
    "odd_compress": OddCompress,
}

LIST_NODES = {
    "weighted_shift": WeightedShift,
    "diagonal_unitary": DiagonalUnitary,
    "diagonal_self_adjoint": DiagonalSelfAdjoint,
}


def operator_from_literal(literal: Any, kind: AlgebraKind) -> OperatorExpr:
    if not isinstance(literal, dict) or "node" not in literal:
        raise ParseError(f"operator literal must be an object with a 'node', got {literal!r}")
    node = literal["node"]
    args = list(literal.get("args", []))

    if node in LEAF_NODES:
        return LEAF_NODES[node]()
    if node in LIST_NODES:
        return LIST_NODES[node](tuple(element_from_literal(a, kind) for a in args))
    match node, len(args):
        case "scalar_mult", 1:
            return ScalarMult(element_from_literal(args[0], kind))
        case "block", 3:
            return BlockByIndicator(element_from_literal(args[0], kind),
                                    operator_from_literal(args[1], kind),
                                    operator_from_literal(args[2], kind))
        case "adjoint", 1:
            return Adjoint(operator_from_literal(args[0], kind))
        case "negate", 1:
            return Negate(operator_from_literal(args[0], kind))
        case "sum", 2:
            return Sum(operator_from_literal(args[0], kind), operator_from_literal(args[1], kind))
        case "compose", 2:
            return Compose(operator_from_literal(args[0], kind), operator_from_literal(args[1], kind))
    raise ParseError(f"unknown operator node {node!r} with {len(args)} arguments")


def operator_to_literal(op: OperatorExpr) -> dict[str, Any]:
    for name, cls in LEAF_NODES.items():
        if type(op) is cls:
            return {"node": name}
    match op:
        case WeightedShift(entries) | DiagonalUnitary(entries) | DiagonalSelfAdjoint(entries):
            name = next(n for n, cls in LIST_NODES.items() if type(op) is cls)
            return {"node": name, "args": [element_to_literal(e) for e in entries]}
        case ScalarMult(alpha):
            return {"node": "scalar_mult", "args": [element_to_literal(alpha)]}
        case BlockByIndicator(chi, left, right):
            return {"node": "block",
                    "args": [element_to_literal(chi), operator_to_literal(left), operator_to_literal(right)]}
        case Adjoint(inner):
            return {"node": "adjoint", "args": [operator_to_literal(inner)]}
        case Negate(inner):
            return {"node": "negate", "args": [operator_to_literal(inner)]}
        case Sum(left, right):
            return {"node": "sum", "args": [operator_to_literal(left), operator_to_literal(right)]}
        case Compose(outer, inner):
            return {"node": "compose", "args": [operator_to_literal(outer), operator_to_literal(inner)]}
    raise TypeError(f"not an operator: {op!r}")
