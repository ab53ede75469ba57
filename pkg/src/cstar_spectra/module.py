"""
The truncated standard module H_A = l2(A).

Vectors store their coordinates stacked in one array of shape
(length, *element_shape). The A-valued inner product is conjugate-linear in
the first slot: <x, y> = sum_i x_i* y_i.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Sequence, Union

import numpy as np

from .algebra import AlgebraElement, AlgebraKind, MatrixAlgebra, norm, unit
from .config import DEFAULT_CONFIG, SpectraConfig
from .errors import IndexingMismatch, IndexOutOfRange, KindMismatch, NonFiniteEntry, ShapeMismatch

logger = logging.getLogger(__name__)


# =============================================================================
# Indexing
# =============================================================================

@dataclass(frozen=True)
class Natural:
    """Coordinates 1..length."""

    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ShapeMismatch(f"natural indexing needs a positive length, got {self.length}")

    @property
    def size(self) -> int:
        return self.length

    def indices(self) -> np.ndarray:
        return np.arange(1, self.length + 1)

    def position(self, k: int) -> int:
        if not 1 <= k <= self.length:
            raise IndexOutOfRange(f"index {k} outside 1..{self.length}")
        return k - 1

    def interior(self) -> np.ndarray:
        """Mask of coordinates k <= length/2."""
        return self.indices() <= self.length // 2

    def scaled(self, factor: int) -> Natural:
        return Natural(self.length * factor)

    @property
    def depth(self) -> int:
        return self.length


@dataclass(frozen=True)
class Integers:
    """Coordinates -radius..radius."""

    radius: int

    def __post_init__(self):
        if self.radius < 0:
            raise ShapeMismatch(f"integer indexing needs a nonnegative radius, got {self.radius}")

    @property
    def size(self) -> int:
        return 2 * self.radius + 1

    def indices(self) -> np.ndarray:
        return np.arange(-self.radius, self.radius + 1)

    def position(self, k: int) -> int:
        if not -self.radius <= k <= self.radius:
            raise IndexOutOfRange(f"index {k} outside {-self.radius}..{self.radius}")
        return k + self.radius

    def interior(self) -> np.ndarray:
        return np.abs(self.indices()) <= self.radius // 2

    def scaled(self, factor: int) -> Integers:
        return Integers(self.radius * factor)

    @property
    def depth(self) -> int:
        return self.radius


Indexing = Union[Natural, Integers]


def indexing_like(indexing: Indexing, depth: int) -> Indexing:
    """An indexing of the same type at another depth."""
    return Natural(depth) if isinstance(indexing, Natural) else Integers(depth)


# =============================================================================
# Vectors
# =============================================================================

@dataclass(frozen=True, eq=False)
class ModuleVector:
    kind: AlgebraKind
    indexing: Indexing
    coords: np.ndarray

    def __post_init__(self):
        coords = np.array(self.coords, dtype=np.complex128)
        expected = (self.indexing.size, *self.kind.element_shape)
        if coords.shape != expected:
            raise ShapeMismatch(f"module vector needs coordinates of shape {expected}, got {coords.shape}")
        if not np.all(np.isfinite(coords)):
            raise NonFiniteEntry("module vector has non-finite coordinates")
        coords.flags.writeable = False
        object.__setattr__(self, "coords", coords)

    @classmethod
    def from_entries(cls, kind: AlgebraKind, indexing: Indexing,
                     entries: Sequence[AlgebraElement]) -> ModuleVector:
        if len(entries) != indexing.size:
            raise ShapeMismatch(f"expected {indexing.size} entries, got {len(entries)}")
        for entry in entries:
            if entry.kind != kind:
                raise KindMismatch(f"entry of kind {entry.kind} in a vector over {kind}")
        if not entries:
            return cls(kind, indexing, np.zeros((0, *kind.element_shape)))
        return cls(kind, indexing, np.stack([entry.data for entry in entries]))

    @classmethod
    def zeros(cls, kind: AlgebraKind, indexing: Indexing) -> ModuleVector:
        return cls(kind, indexing, np.zeros((indexing.size, *kind.element_shape)))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ModuleVector):
            return NotImplemented
        return (self.kind == other.kind and self.indexing == other.indexing
                and np.array_equal(self.coords, other.coords))

    def __hash__(self) -> int:
        return hash((self.kind, self.indexing, self.coords.tobytes()))

    def __repr__(self) -> str:
        return f"ModuleVector({self.kind.label}, {self.indexing}, norm={vector_norm(self):.6g})"

    @property
    def entries(self) -> tuple[AlgebraElement, ...]:
        return tuple(AlgebraElement(self.kind, c) for c in self.coords)

    def entry(self, k: int) -> AlgebraElement:
        return AlgebraElement(self.kind, self.coords[self.indexing.position(k)])

    def support(self, tol: float = 0.0) -> list[int]:
        """Indices whose coordinate is nonzero."""
        axes = tuple(range(1, self.coords.ndim))
        magnitude = np.max(np.abs(self.coords), axis=axes) if axes else np.abs(self.coords)
        return [int(k) for k in self.indexing.indices()[magnitude > tol]]

    def __add__(self, other: ModuleVector) -> ModuleVector:
        _check_compatible(self, other)
        return ModuleVector(self.kind, self.indexing, self.coords + other.coords)

    def __sub__(self, other: ModuleVector) -> ModuleVector:
        _check_compatible(self, other)
        return ModuleVector(self.kind, self.indexing, self.coords - other.coords)

    def __neg__(self) -> ModuleVector:
        return ModuleVector(self.kind, self.indexing, -self.coords)

    def scaled(self, factor: complex) -> ModuleVector:
        return ModuleVector(self.kind, self.indexing, complex(factor) * self.coords)

    def right_mul(self, alpha: AlgebraElement) -> ModuleVector:
        """x . alpha, the right A-module action."""
        if alpha.kind != self.kind:
            raise KindMismatch(f"cannot act by {alpha.kind} on a vector over {self.kind}")
        if isinstance(self.kind, MatrixAlgebra):
            return ModuleVector(self.kind, self.indexing, self.coords @ alpha.data)
        return ModuleVector(self.kind, self.indexing, self.coords * alpha.data)

    def resized(self, indexing: Indexing) -> ModuleVector:
        """Zero-pad or truncate to another indexing of the same type."""
        if type(indexing) is not type(self.indexing):
            raise IndexingMismatch(f"cannot move a vector from {self.indexing} to {indexing}")
        coords = np.zeros((indexing.size, *self.kind.element_shape), dtype=np.complex128)
        source, target = self.indexing.indices(), indexing.indices()
        common = np.intersect1d(source, target)
        offset_source = source[0]
        offset_target = target[0]
        coords[common - offset_target] = self.coords[common - offset_source]
        return ModuleVector(self.kind, indexing, coords)


def _check_compatible(x: ModuleVector, y: ModuleVector):
    if x.kind != y.kind:
        raise KindMismatch(f"vectors over {x.kind} and {y.kind}")
    if x.indexing != y.indexing:
        raise IndexingMismatch(f"vectors indexed by {x.indexing} and {y.indexing}")


def basis_vector(k: int, kind: AlgebraKind, indexing: Indexing,
                 coefficient: AlgebraElement | None = None) -> ModuleVector:
    """e_k (times ``coefficient`` on the right, if given)."""
    position = indexing.position(k)
    coords = np.zeros((indexing.size, *kind.element_shape), dtype=np.complex128)
    if coefficient is None:
        coefficient = unit(kind)
    elif coefficient.kind != kind:
        raise KindMismatch(f"coefficient of kind {coefficient.kind} in a vector over {kind}")
    coords[position] = coefficient.data
    return ModuleVector(kind, indexing, coords)


def coordinate_inner_product(kind: AlgebraKind, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """sum_i x_i* y_i on raw stacked coordinates."""
    if isinstance(kind, MatrixAlgebra):
        return np.einsum("kba,kbc->ac", x.conj(), y)
    return np.sum(x.conj() * y, axis=0)


def inner_product(x: ModuleVector, y: ModuleVector) -> AlgebraElement:
    _check_compatible(x, y)
    return AlgebraElement(x.kind, coordinate_inner_product(x.kind, x.coords, y.coords))


def vector_norm(x: ModuleVector) -> float:
    return math.sqrt(max(norm(inner_product(x, x)), 0.0))


def is_orthogonal(x: ModuleVector, y: ModuleVector, tol: float = 1e-7) -> bool:
    return norm(inner_product(x, y)) <= tol


# =============================================================================
# Sequence membership in H_A
# =============================================================================

class Growth(str, Enum):
    CONVERGING = "Converging"
    DIVERGING = "Diverging"
    INDETERMINATE = "Indeterminate"


@dataclass(frozen=True)
class GrowthDiagnostic:
    """Tail norms ||sum_{K < k <= K'} x_k* x_k|| between consecutive depths."""

    depths: tuple[int, ...]
    tail_norms: tuple[float, ...]
    verdict: Growth

    def to_dict(self) -> dict:
        return {
            "depths": list(self.depths),
            "tail_norms": [t if math.isfinite(t) else "inf" for t in self.tail_norms],
            "verdict": self.verdict.value,
        }


def _classify(tails: list[float], tol: float) -> Growth:
    if not all(math.isfinite(t) for t in tails):
        return Growth.DIVERGING
    last, previous = tails[-1], tails[-2]
    if last >= 2.0 * previous and last > tol:
        return Growth.DIVERGING
    if last <= tol and last <= previous:
        return Growth.CONVERGING
    return Growth.INDETERMINATE


def sequence_membership_diagnostic(gen: Callable[[int], AlgebraElement],
                                   depths: Iterable[int] | None = None,
                                   config: SpectraConfig = DEFAULT_CONFIG,
                                   max_depth: int | None = None) -> GrowthDiagnostic:
    """Classify whether (gen(1), gen(2), ...) lies in H_A.

    Tails are measured over the windows between consecutive depths. While the
    verdict is Indeterminate the ladder keeps doubling up to ``max_depth``
    (default: the configured diagnostic_max_depth).
    """
    depths = list(depths if depths is not None else config.diagnostic_depths)
    if len(depths) < 3 or any(b <= a for a, b in zip(depths, depths[1:])):
        raise ShapeMismatch("depths must be strictly increasing with at least 3 entries")
    max_depth = config.diagnostic_max_depth if max_depth is None else max_depth
    tol = config.oracle_sv_tol

    def window(lower: int, upper: int) -> float:
        total = None
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                for k in range(lower + 1, upper + 1):
                    element = gen(k)
                    term = coordinate_inner_product(element.kind, element.data[None], element.data[None])
                    total = term if total is None else total + term
        except NonFiniteEntry:
            return math.inf
        if not np.all(np.isfinite(total)):
            return math.inf
        return norm(AlgebraElement(element.kind, total))

    tails = [window(a, b) for a, b in zip(depths, depths[1:])]
    verdict = _classify(tails, tol)
    while verdict is Growth.INDETERMINATE and depths[-1] * 2 <= max_depth:
        depths.append(depths[-1] * 2)
        tails.append(window(depths[-2], depths[-1]))
        verdict = _classify(tails, tol)

    logger.debug("membership diagnostic depths=%s tails=%s verdict=%s", depths, tails, verdict.value)
    return GrowthDiagnostic(tuple(depths), tuple(tails), verdict)
