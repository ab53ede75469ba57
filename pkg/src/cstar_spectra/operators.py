"""
Operator bank: symbolic operators on H_A evaluated at any truncation depth.

Every operator is a frozen node; ``apply`` evaluates the tree on a truncated
vector and drops coordinates that leave the index range. Adjoints are
structural rewrites. Only shift-type leaves keep an explicit ``Adjoint`` node.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Iterator

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraKind,
    EssentiallyBounded,
    MatrixAlgebra,
    indicator,
    is_function_kind,
    is_hermitian,
    is_projection,
    is_unitary,
    norm,
    refined_values,
    scalar_kind,
    star,
    unit,
)
from .config import DEFAULT_CONFIG, SpectraConfig
from .errors import IndexingMismatch, KindMismatch, NotSelfAdjoint, PreconditionFailed, ShapeMismatch
from .module import Indexing, Integers, ModuleVector, Natural, inner_product, vector_norm

logger = logging.getLogger(__name__)


# =============================================================================
# Nodes
# =============================================================================

class OperatorExpr:
    """Base class of operator nodes; supports +, -, unary - and @ (composition)."""

    def __add__(self, other: OperatorExpr) -> OperatorExpr:
        return Sum(self, other)

    def __sub__(self, other: OperatorExpr) -> OperatorExpr:
        return Sum(self, Negate(other))

    def __neg__(self) -> OperatorExpr:
        return Negate(self)

    def __matmul__(self, other: OperatorExpr) -> OperatorExpr:
        return Compose(self, other)


@dataclass(frozen=True)
class ScalarMult(OperatorExpr):
    """alpha I: (alpha x_1, alpha x_2, ...)."""

    alpha: AlgebraElement


@dataclass(frozen=True)
class UnilateralShift(OperatorExpr):
    """S e_k = e_{k+1}."""


@dataclass(frozen=True)
class BilateralShift(OperatorExpr):
    """V e_k = e_{k+1} over the integers."""


@dataclass(frozen=True)
class WeightedShift(OperatorExpr):
    """(S_w x)_{j+1} = w_j x_j with w_j = weights[(j - 1) mod len]."""

    weights: tuple[AlgebraElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(self.weights))
        if not self.weights:
            raise ShapeMismatch("a weighted shift needs at least one weight")


@dataclass(frozen=True)
class DiagonalUnitary(OperatorExpr):
    """(alpha_1 x_1, alpha_2 x_2, ...) with a cyclic list of unitaries."""

    alphas: tuple[AlgebraElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "alphas", tuple(self.alphas))
        if not self.alphas:
            raise ShapeMismatch("a diagonal unitary needs at least one entry")
        for alpha in self.alphas:
            if not is_unitary(alpha):
                raise PreconditionFailed("diagonal unitary entries must be unitary in A")


@dataclass(frozen=True)
class DiagonalSelfAdjoint(OperatorExpr):
    """(g_1 x_1, g_2 x_2, ...) with a cyclic list of self-adjoint elements."""

    gs: tuple[AlgebraElement, ...]

    def __post_init__(self):
        object.__setattr__(self, "gs", tuple(self.gs))
        if not self.gs:
            raise ShapeMismatch("a diagonal operator needs at least one entry")
        for g in self.gs:
            if not is_hermitian(g):
                raise NotSelfAdjoint("diagonal entries must be self-adjoint in A")


@dataclass(frozen=True)
class DyadicExpand(OperatorExpr):
    """W' e_k = e_{2k}."""


@dataclass(frozen=True)
class OddExpand(OperatorExpr):
    """W'' e_k = e_{2k-1}."""


@dataclass(frozen=True)
class DyadicCompress(OperatorExpr):
    """Z x = (x_2, x_4, x_6, ...)."""


@dataclass(frozen=True)
class OddCompress(OperatorExpr):
    """Z' x = (x_1, x_3, x_5, ...)."""


@dataclass(frozen=True)
class BlockByIndicator(OperatorExpr):
    """chi left(chi x) + (1 - chi) right((1 - chi) x) for a step-kind projection chi."""

    chi: AlgebraElement
    left: OperatorExpr
    right: OperatorExpr

    def __post_init__(self):
        if not isinstance(self.chi.kind, EssentiallyBounded):
            raise KindMismatch("block decompositions need a step-kind indicator")
        if not is_projection(self.chi):
            raise PreconditionFailed("block indicator must be a projection")


@dataclass(frozen=True)
class Adjoint(OperatorExpr):
    op: OperatorExpr


@dataclass(frozen=True)
class Sum(OperatorExpr):
    left: OperatorExpr
    right: OperatorExpr


@dataclass(frozen=True)
class Compose(OperatorExpr):
    """outer after inner."""

    outer: OperatorExpr
    inner: OperatorExpr


@dataclass(frozen=True)
class Negate(OperatorExpr):
    op: OperatorExpr


NATURAL_ONLY = (UnilateralShift, WeightedShift, DyadicExpand, OddExpand, DyadicCompress, OddCompress)


# =============================================================================
# Catalog
# =============================================================================

class ExpanderKind(str, Enum):
    """The expander/compressor family and its two block forms."""

    W_PRIME = "W'"
    W_DOUBLE_PRIME = "W''"
    Z = "Z"
    Z_PRIME = "Z'"
    F = "F"
    D = "D"

    @property
    def is_block(self) -> bool:
        return self in (ExpanderKind.F, ExpanderKind.D)


def identity(kind: AlgebraKind) -> ScalarMult:
    return ScalarMult(unit(kind))


def shifted(op: OperatorExpr, alpha: AlgebraElement) -> OperatorExpr:
    """op - alpha I."""
    return Sum(op, Negate(ScalarMult(alpha)))


def left_half(kind: EssentiallyBounded) -> AlgebraElement:
    return indicator(kind, 0.0, 0.5)


def block_shift(kind: EssentiallyBounded) -> BlockByIndicator:
    """S~: identity on the (0,1/2) block and S on the (1/2,1) block."""
    return BlockByIndicator(left_half(kind), identity(kind), UnilateralShift())


def expander_operator(opkind: ExpanderKind, kind: AlgebraKind) -> OperatorExpr:
    match opkind:
        case ExpanderKind.W_PRIME:
            return DyadicExpand()
        case ExpanderKind.W_DOUBLE_PRIME:
            return OddExpand()
        case ExpanderKind.Z:
            return DyadicCompress()
        case ExpanderKind.Z_PRIME:
            return OddCompress()
        case ExpanderKind.F:
            return BlockByIndicator(left_half(kind), OddExpand(), DyadicExpand())
        case ExpanderKind.D:
            return BlockByIndicator(left_half(kind), OddCompress(), DyadicCompress())
    raise ValueError(f"unknown expander kind {opkind!r}")


# =============================================================================
# Structure
# =============================================================================

def children(op: OperatorExpr) -> tuple[OperatorExpr, ...]:
    match op:
        case BlockByIndicator(_, left, right) | Sum(left, right):
            return (left, right)
        case Compose(outer, inner):
            return (outer, inner)
        case Adjoint(inner) | Negate(inner):
            return (inner,)
    return ()


def walk(op: OperatorExpr) -> Iterator[OperatorExpr]:
    yield op
    for child in children(op):
        yield from walk(child)


def embedded_elements(op: OperatorExpr) -> Iterator[AlgebraElement]:
    for node in walk(op):
        match node:
            case ScalarMult(alpha):
                yield alpha
            case WeightedShift(weights):
                yield from weights
            case DiagonalUnitary(alphas):
                yield from alphas
            case DiagonalSelfAdjoint(gs):
                yield from gs
            case BlockByIndicator(chi, _, _):
                yield chi


def embedded_kind(op: OperatorExpr) -> AlgebraKind | None:
    """The single algebra kind of the elements inside op (None if it holds none)."""
    kinds = {element.kind for element in embedded_elements(op)}
    if len(kinds) > 1:
        raise KindMismatch(f"operator mixes algebra kinds: {sorted(map(str, kinds))}")
    return kinds.pop() if kinds else None


def uses_integers(op: OperatorExpr) -> bool:
    return any(isinstance(node, BilateralShift) for node in walk(op))


def uses_naturals(op: OperatorExpr) -> bool:
    return any(isinstance(node, NATURAL_ONLY) for node in walk(op))


def indexing_for(op: OperatorExpr, depth: int) -> Indexing:
    """The indexing op acts on at the given depth."""
    return Integers(depth) if uses_integers(op) else Natural(depth)


def adjoint(op: OperatorExpr) -> OperatorExpr:
    match op:
        case ScalarMult(alpha):
            return ScalarMult(star(alpha))
        case UnilateralShift() | BilateralShift() | WeightedShift():
            return Adjoint(op)
        case Adjoint(inner):
            return inner
        case DiagonalUnitary(alphas):
            return DiagonalUnitary(tuple(star(a) for a in alphas))
        case DiagonalSelfAdjoint():
            return op
        case DyadicExpand():
            return DyadicCompress()
        case DyadicCompress():
            return DyadicExpand()
        case OddExpand():
            return OddCompress()
        case OddCompress():
            return OddExpand()
        case BlockByIndicator(chi, left, right):
            return BlockByIndicator(chi, adjoint(left), adjoint(right))
        case Sum(left, right):
            return Sum(adjoint(left), adjoint(right))
        case Compose(outer, inner):
            return Compose(adjoint(inner), adjoint(outer))
        case Negate(inner):
            return Negate(adjoint(inner))
    raise TypeError(f"not an operator: {op!r}")


# =============================================================================
# Evaluation
# =============================================================================

def _left_mul(kind: AlgebraKind, alpha: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """alpha x_k for every k; alpha is one element or one element per coordinate."""
    if isinstance(kind, MatrixAlgebra):
        if alpha.ndim == 2:
            return np.einsum("ij,kjl->kil", alpha, coords)
        return np.einsum("kij,kjl->kil", alpha, coords)
    return alpha * coords


def _cyclic(entries: tuple[AlgebraElement, ...], indexing: Indexing) -> np.ndarray:
    """Entry k of a cyclic list for every coordinate k (1-based on Natural)."""
    offset = 1 if isinstance(indexing, Natural) else 0
    selection = (indexing.indices() - offset) % len(entries)
    return np.stack([entry.data for entry in entries])[selection]


def _weighted_shift(weights, indexing, kind, coords, adjoint_side: bool) -> np.ndarray:
    w = _cyclic(weights, indexing)
    out = np.zeros_like(coords)
    if adjoint_side:
        # (S_w* x)_j = w_j* x_{j+1}
        w_star = w.conj() if is_function_kind(kind) else np.swapaxes(w.conj(), -1, -2)
        out[:-1] = _left_mul(kind, w_star[:-1], coords[1:])
    else:
        out[1:] = _left_mul(kind, w[:-1], coords[:-1])
    return out


def _apply(op: OperatorExpr, kind: AlgebraKind, indexing: Indexing, coords: np.ndarray) -> np.ndarray:
    size = coords.shape[0]
    match op:
        case ScalarMult(alpha):
            return _left_mul(kind, alpha.data, coords)
        case UnilateralShift() | BilateralShift():
            out = np.zeros_like(coords)
            out[1:] = coords[:-1]
            return out
        case Adjoint(UnilateralShift() | BilateralShift()):
            out = np.zeros_like(coords)
            out[:-1] = coords[1:]
            return out
        case WeightedShift(weights):
            return _weighted_shift(weights, indexing, kind, coords, adjoint_side=False)
        case Adjoint(WeightedShift(weights)):
            return _weighted_shift(weights, indexing, kind, coords, adjoint_side=True)
        case Adjoint(inner):
            return _apply(adjoint(inner), kind, indexing, coords)
        case DiagonalUnitary(entries) | DiagonalSelfAdjoint(entries):
            return _left_mul(kind, _cyclic(entries, indexing), coords)
        case DyadicExpand():
            out = np.zeros_like(coords)
            ks = np.arange(1, size // 2 + 1)
            out[2 * ks - 1] = coords[ks - 1]
            return out
        case OddExpand():
            out = np.zeros_like(coords)
            ks = np.arange(1, (size + 1) // 2 + 1)
            out[2 * ks - 2] = coords[ks - 1]
            return out
        case DyadicCompress():
            out = np.zeros_like(coords)
            ks = np.arange(1, size // 2 + 1)
            out[ks - 1] = coords[2 * ks - 1]
            return out
        case OddCompress():
            out = np.zeros_like(coords)
            ks = np.arange(1, (size + 1) // 2 + 1)
            out[ks - 1] = coords[2 * ks - 2]
            return out
        case BlockByIndicator(chi, left, right):
            inside, outside = chi.data, 1.0 - chi.data
            return (inside * _apply(left, kind, indexing, inside * coords)
                    + outside * _apply(right, kind, indexing, outside * coords))
        case Sum(left, right):
            return _apply(left, kind, indexing, coords) + _apply(right, kind, indexing, coords)
        case Compose(outer, inner):
            return _apply(outer, kind, indexing, _apply(inner, kind, indexing, coords))
        case Negate(inner):
            return -_apply(inner, kind, indexing, coords)
    raise TypeError(f"not an operator: {op!r}")


def check_compatible(op: OperatorExpr, kind: AlgebraKind, indexing: Indexing):
    """Raise unless op can act on vectors over ``kind`` indexed by ``indexing``."""
    op_kind = embedded_kind(op)
    if op_kind is not None and op_kind != kind:
        raise KindMismatch(f"operator over {op_kind} applied to a vector over {kind}")
    if uses_integers(op) and not isinstance(indexing, Integers):
        raise IndexingMismatch("the bilateral shift acts on integer-indexed vectors")
    if uses_naturals(op) and not isinstance(indexing, Natural):
        raise IndexingMismatch("one-sided shifts and expanders act on naturally indexed vectors")


def apply(op: OperatorExpr, x: ModuleVector) -> ModuleVector:
    check_compatible(op, x.kind, x.indexing)
    return ModuleVector(x.kind, x.indexing, _apply(op, x.kind, x.indexing, np.array(x.coords)))


def apply_coords(op: OperatorExpr, kind: AlgebraKind, indexing: Indexing, coords: np.ndarray) -> np.ndarray:
    """apply on raw stacked coordinates (no validation)."""
    return _apply(op, kind, indexing, coords)


# =============================================================================
# Self-adjointness, normality and bounds
# =============================================================================

def _interior_deviation(first: OperatorExpr, second: OperatorExpr, N: int, kind: AlgebraKind) -> float:
    from .oracle import Section, flatten

    a = flatten(first, N, kind, section=Section.SQUARE)
    b = flatten(second, N, kind, section=Section.SQUARE)
    interior = a.interior_columns()
    block_a = a.fibers[:, interior][:, :, interior]
    block_b = b.fibers[:, interior][:, :, interior]
    return float(np.max(np.abs(block_a - block_b))) if block_a.size else 0.0


def _resolve_kind(op: OperatorExpr, kind: AlgebraKind | None) -> AlgebraKind:
    return kind or embedded_kind(op) or scalar_kind()


def is_self_adjoint(op: OperatorExpr, N: int = 16, tol: float = 1e-9,
                    kind: AlgebraKind | None = None) -> bool:
    """Compare finite sections of op and op* on the interior block."""
    if N < 2:
        raise ShapeMismatch("self-adjointness check needs N >= 2")
    return _interior_deviation(op, adjoint(op), N, _resolve_kind(op, kind)) <= tol


def is_normal(op: OperatorExpr, N: int = 16, tol: float = 1e-9,
              kind: AlgebraKind | None = None) -> bool:
    """Compare finite sections of F F* and F* F on the interior block."""
    if N < 2:
        raise ShapeMismatch("normality check needs N >= 2")
    star_op = adjoint(op)
    return _interior_deviation(Compose(op, star_op), Compose(star_op, op), N, _resolve_kind(op, kind)) <= tol


class BoundsMethod(str, Enum):
    CLOSED_FORM_DIAGONAL = "ClosedFormDiagonal"
    SAMPLED_SEARCH = "SampledSearch"


@dataclass(frozen=True)
class SelfAdjointBounds:
    """Brackets for m(F) = inf ||<Fx,x>|| and M(F) = sup ||<Fx,x>|| over unit x."""

    m_lower: float
    m_upper: float
    M_lower: float
    M_upper: float
    method: BoundsMethod

    def to_dict(self) -> dict:
        return {
            "m_lower": self.m_lower,
            "m_upper": self.m_upper,
            "M_lower": self.M_lower,
            "M_upper": self.M_upper,
            "method": self.method.value,
        }


def _random_unit_vector(rng: np.random.Generator, kind: AlgebraKind, indexing: Indexing) -> ModuleVector:
    shape = (indexing.size, *kind.element_shape)
    coords = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    coords[~indexing.interior()] = 0.0
    x = ModuleVector(kind, indexing, coords)
    return x.scaled(1.0 / vector_norm(x))


def self_adjoint_bounds(op: OperatorExpr, N: int = 32, samples: int = 64,
                        kind: AlgebraKind | None = None, seed: int = 0,
                        config: SpectraConfig = DEFAULT_CONFIG) -> SelfAdjointBounds:
    kind = _resolve_kind(op, kind)
    if not is_self_adjoint(op, N, kind=kind):
        raise NotSelfAdjoint("m(F) and M(F) are defined for self-adjoint operators")

    if isinstance(op, DiagonalSelfAdjoint) and is_function_kind(kind):
        values = np.stack([refined_values(g).real for g in op.gs])
        m, M = float(values.min()), float(values.max())
        if m > config.eq_tol:
            logger.debug("closed-form diagonal bounds m=%g M=%g", m, M)
            return SelfAdjointBounds(m, m, M, M, BoundsMethod.CLOSED_FORM_DIAGONAL)

    from .oracle import Section, flatten

    rng = np.random.default_rng(seed)
    indexing = indexing_for(op, N)
    values = []
    for _ in range(samples):
        x = _random_unit_vector(rng, kind, indexing)
        values.append(norm(inner_product(apply(op, x), x)))
    section = flatten(op, N, kind, section=Section.SQUARE)
    op_norm = float(np.max(np.linalg.svd(section.fibers, compute_uv=False)))
    return SelfAdjointBounds(0.0, min(values), max(values), op_norm, BoundsMethod.SAMPLED_SEARCH)
