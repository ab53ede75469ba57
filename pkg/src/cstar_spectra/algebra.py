"""
Concrete C*-algebras and their arithmetic.

Three representations are supported:
- ContinuousFunctions: C([0,1]) as piecewise-linear interpolants on a uniform
  node grid (values stored per node).
- EssentiallyBounded: L-infinity((0,1)) as step functions on uniform cells
  (values stored per cell).
- MatrixAlgebra: complex n x n matrices.

Function elements are multiplied nodewise (cellwise), so every operation is
exact pointwise algebra on the stored samples. |alpha| is extremized on a
refined grid because |piecewise-linear| can dip between nodes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .config import DEFAULT_CONFIG, ToleranceConfig
from .errors import KindMismatch, NonFiniteEntry, NotInvertible, ShapeMismatch

DEFAULT_TOLERANCES = DEFAULT_CONFIG.tolerances


# =============================================================================
# Algebra kinds
# =============================================================================

@dataclass(frozen=True)
class GridSpec:
    """Uniform discretization of [0,1]."""

    resolution: int = 256
    refinement_factor: int = 4

    def __post_init__(self):
        if self.resolution < 2:
            raise ShapeMismatch(f"grid resolution must be at least 2, got {self.resolution}")
        if self.refinement_factor < 1:
            raise ShapeMismatch(f"refinement_factor must be at least 1, got {self.refinement_factor}")


@dataclass(frozen=True)
class ContinuousFunctions:
    grid: GridSpec = field(default_factory=GridSpec)

    label = "continuous"

    @property
    def element_shape(self) -> tuple[int, ...]:
        return (self.grid.resolution,)

    def sample_points(self) -> np.ndarray:
        """Grid nodes t_i = i/(R-1)."""
        return np.linspace(0.0, 1.0, self.grid.resolution)


@dataclass(frozen=True)
class EssentiallyBounded:
    grid: GridSpec = field(default_factory=GridSpec)

    label = "step"

    @property
    def element_shape(self) -> tuple[int, ...]:
        return (self.grid.resolution,)

    def sample_points(self) -> np.ndarray:
        """Cell midpoints (c + 1/2)/R."""
        resolution = self.grid.resolution
        return (np.arange(resolution) + 0.5) / resolution


@dataclass(frozen=True)
class MatrixAlgebra:
    """M_n(C). With finite_section set, M_n stands for the n x n compression of B(l2)."""

    n: int
    finite_section: bool = False

    label = "matrix"

    def __post_init__(self):
        if self.n < 1:
            raise ShapeMismatch(f"matrix algebra size must be at least 1, got {self.n}")

    @property
    def element_shape(self) -> tuple[int, ...]:
        return (self.n, self.n)


FunctionKind = Union[ContinuousFunctions, EssentiallyBounded]
AlgebraKind = Union[ContinuousFunctions, EssentiallyBounded, MatrixAlgebra]


def is_function_kind(kind: AlgebraKind) -> bool:
    return isinstance(kind, (ContinuousFunctions, EssentiallyBounded))


def is_commutative(kind: AlgebraKind) -> bool:
    return is_function_kind(kind)


def scalar_kind() -> ContinuousFunctions:
    """The algebra C, carried as constants on the smallest grid."""
    return ContinuousFunctions(GridSpec(resolution=2, refinement_factor=1))


def fiber_count(kind: AlgebraKind) -> int:
    """Number of independent fibers of the fiberwise action (1 for matrices)."""
    return kind.grid.resolution if is_function_kind(kind) else 1


# =============================================================================
# Elements
# =============================================================================

@dataclass(frozen=True, eq=False)
class AlgebraElement:
    """An immutable element of a concrete C*-algebra."""

    kind: AlgebraKind
    data: np.ndarray

    def __post_init__(self):
        data = np.array(self.data, dtype=np.complex128)
        if data.shape != self.kind.element_shape:
            raise ShapeMismatch(
                f"{self.kind.label} element needs shape {self.kind.element_shape}, got {data.shape}"
            )
        if not np.all(np.isfinite(data)):
            raise NonFiniteEntry(f"{self.kind.label} element has non-finite entries")
        data.flags.writeable = False
        object.__setattr__(self, "data", data)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.data, other.data)

    def __hash__(self) -> int:
        return hash((self.kind, self.data.tobytes()))

    def __repr__(self) -> str:
        return f"AlgebraElement({self.kind.label}, norm={norm(self):.6g})"

    def __add__(self, other: AlgebraElement | complex) -> AlgebraElement:
        return add(self, _lift(self.kind, other))

    __radd__ = __add__

    def __sub__(self, other: AlgebraElement | complex) -> AlgebraElement:
        return sub(self, _lift(self.kind, other))

    def __rsub__(self, other: complex) -> AlgebraElement:
        return sub(_lift(self.kind, other), self)

    def __mul__(self, other: AlgebraElement | complex) -> AlgebraElement:
        if isinstance(other, AlgebraElement):
            return mul(self, other)
        return AlgebraElement(self.kind, self.data * complex(other))

    def __rmul__(self, other: complex) -> AlgebraElement:
        return AlgebraElement(self.kind, complex(other) * self.data)

    def __neg__(self) -> AlgebraElement:
        return AlgebraElement(self.kind, -self.data)


def _lift(kind: AlgebraKind, value: AlgebraElement | complex) -> AlgebraElement:
    if isinstance(value, AlgebraElement):
        return value
    return scalar(kind, value)


def _same_kind(alpha: AlgebraElement, beta: AlgebraElement):
    if alpha.kind != beta.kind:
        raise KindMismatch(f"cannot combine {alpha.kind} with {beta.kind}")


def make_element(kind: AlgebraKind, spec) -> AlgebraElement:
    """Validate a value table (function kinds) or matrix (matrix kind)."""
    return AlgebraElement(kind, np.asarray(spec, dtype=np.complex128))


def unit(kind: AlgebraKind) -> AlgebraElement:
    if isinstance(kind, MatrixAlgebra):
        return AlgebraElement(kind, np.eye(kind.n))
    return AlgebraElement(kind, np.ones(kind.element_shape))


def zero(kind: AlgebraKind) -> AlgebraElement:
    return AlgebraElement(kind, np.zeros(kind.element_shape))


def scalar(kind: AlgebraKind, value: complex) -> AlgebraElement:
    """value * 1_A."""
    return complex(value) * unit(kind)


def add(alpha: AlgebraElement, beta: AlgebraElement) -> AlgebraElement:
    _same_kind(alpha, beta)
    return AlgebraElement(alpha.kind, alpha.data + beta.data)


def sub(alpha: AlgebraElement, beta: AlgebraElement) -> AlgebraElement:
    _same_kind(alpha, beta)
    return AlgebraElement(alpha.kind, alpha.data - beta.data)


def mul(alpha: AlgebraElement, beta: AlgebraElement) -> AlgebraElement:
    _same_kind(alpha, beta)
    if isinstance(alpha.kind, MatrixAlgebra):
        return AlgebraElement(alpha.kind, alpha.data @ beta.data)
    return AlgebraElement(alpha.kind, alpha.data * beta.data)


def star(alpha: AlgebraElement) -> AlgebraElement:
    if isinstance(alpha.kind, MatrixAlgebra):
        return AlgebraElement(alpha.kind, alpha.data.conj().T)
    return AlgebraElement(alpha.kind, alpha.data.conj())


def refined_values(alpha: AlgebraElement) -> np.ndarray:
    """Samples of a function element on the refined grid.

    Continuous kind: the piecewise-linear interpolant at refinement_factor
    points per grid interval plus the last node. Step kind: the cell values.
    """
    kind = alpha.kind
    if isinstance(kind, EssentiallyBounded):
        return alpha.data
    if not isinstance(kind, ContinuousFunctions):
        raise KindMismatch("refined samples exist only for function algebras")
    r = kind.grid.refinement_factor
    s = np.arange(r) / r
    nodes = alpha.data
    inner = nodes[:-1, None] * (1.0 - s) + nodes[1:, None] * s
    return np.concatenate([inner.ravel(), nodes[-1:]])


def norm(alpha: AlgebraElement) -> float:
    if isinstance(alpha.kind, MatrixAlgebra):
        return float(np.linalg.norm(alpha.data, ord=2))
    return float(np.max(np.abs(refined_values(alpha))))


def inf_abs(alpha: AlgebraElement) -> float:
    """inf|alpha| on the refined grid, or sigma_min for matrices."""
    if isinstance(alpha.kind, MatrixAlgebra):
        return float(np.linalg.svd(alpha.data, compute_uv=False)[-1])
    return float(np.min(np.abs(refined_values(alpha))))


def try_invert(alpha: AlgebraElement,
               tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> AlgebraElement:
    """Return alpha^{-1}; raises NotInvertible when inf_abs <= eq_tol."""
    value = inf_abs(alpha)
    if value <= tolerances.eq_tol:
        raise NotInvertible(f"element is not invertible (inf|alpha| = {value:.3g})", inf_abs=value)
    if isinstance(alpha.kind, MatrixAlgebra):
        return AlgebraElement(alpha.kind, np.linalg.inv(alpha.data))
    return AlgebraElement(alpha.kind, 1.0 / alpha.data)


def power(alpha: AlgebraElement, k: int) -> AlgebraElement:
    if k < 0:
        return power(try_invert(alpha), -k)
    if isinstance(alpha.kind, MatrixAlgebra):
        return AlgebraElement(alpha.kind, np.linalg.matrix_power(alpha.data, k))
    return AlgebraElement(alpha.kind, alpha.data ** k)


class PowerSequence:
    """k -> beta^k, computed incrementally and cached."""

    def __init__(self, beta: AlgebraElement):
        self.beta = beta
        self._cache = [unit(beta.kind)]

    def __call__(self, k: int) -> AlgebraElement:
        while len(self._cache) <= k:
            self._cache.append(mul(self._cache[-1], self.beta))
        return self._cache[k]


# =============================================================================
# Sets, indicators and annihilators
# =============================================================================

def indicator(kind: FunctionKind, lower: float, upper: float) -> AlgebraElement:
    """Indicator of the open interval (lower, upper) sampled on the grid."""
    t = kind.sample_points()
    return AlgebraElement(kind, ((t > lower) & (t < upper)).astype(float))


def node_indicator(alpha: AlgebraElement,
                   predicate: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement | None:
    """Indicator of the nodes (cells) whose stored value satisfies predicate."""
    mask = predicate(alpha.data)
    if not mask.any():
        return None
    return AlgebraElement(alpha.kind, mask.astype(float))


def interval_indicator(alpha: AlgebraElement,
                       predicate: Callable[[np.ndarray], np.ndarray]) -> AlgebraElement | None:
    """Grid-scale reading of "on a set of positive measure" / "on a closed subinterval".

    Step kind: cells whose value satisfies predicate. Continuous kind: nodes
    bounding a full grid interval on which every refined sample satisfies it.
    """
    if isinstance(alpha.kind, EssentiallyBounded):
        return node_indicator(alpha, predicate)
    return _interval_mask_indicator(alpha.kind, predicate(refined_values(alpha)))


def _interval_mask_indicator(kind: ContinuousFunctions, refined_mask: np.ndarray) -> AlgebraElement | None:
    r = kind.grid.refinement_factor
    intervals = kind.grid.resolution - 1
    padded = refined_mask[1:]
    inner = refined_mask[:-1].reshape(intervals, r) & padded.reshape(intervals, r)
    good = inner.all(axis=1)
    if not good.any():
        return None
    nodes = np.zeros(kind.grid.resolution, dtype=bool)
    nodes[:-1] |= good
    nodes[1:] |= good
    return AlgebraElement(kind, nodes.astype(float))


def _null_vectors(matrix: np.ndarray, tol: float) -> np.ndarray:
    """Orthonormal basis (as columns) of {v : |matrix v| <= tol}."""
    _, s, vh = scipy.linalg.svd(matrix)
    rank = int(np.sum(s > tol))
    return vh[rank:].conj().T


def right_annihilator_basis(alpha: AlgebraElement,
                            tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> list[AlgebraElement]:
    """Nonzero Y with alpha Y = 0 (empty list when none exist at grid scale)."""
    tol = tolerances.eq_tol
    if isinstance(alpha.kind, MatrixAlgebra):
        n = alpha.kind.n
        basis = []
        for v in _null_vectors(alpha.data, tol).T:
            for column in range(n):
                y = np.zeros((n, n), dtype=np.complex128)
                y[:, column] = v
                basis.append(AlgebraElement(alpha.kind, y))
        return basis
    chi = interval_indicator(alpha, lambda values: np.abs(values) <= tol)
    return [] if chi is None else [chi]


def common_right_annihilator(alpha: AlgebraElement, beta: AlgebraElement,
                             tolerances: ToleranceConfig = DEFAULT_TOLERANCES) -> AlgebraElement | None:
    """A nonzero gamma with alpha gamma = beta gamma = 0, or None."""
    _same_kind(alpha, beta)
    tol = tolerances.eq_tol
    if isinstance(alpha.kind, MatrixAlgebra):
        null = _null_vectors(np.vstack([alpha.data, beta.data]), tol)
        if null.shape[1] == 0:
            return None
        gamma = np.zeros(alpha.kind.element_shape, dtype=np.complex128)
        gamma[:, 0] = null[:, 0]
        return AlgebraElement(alpha.kind, gamma)
    if isinstance(alpha.kind, EssentiallyBounded):
        mask = (np.abs(alpha.data) <= tol) & (np.abs(beta.data) <= tol)
        return AlgebraElement(alpha.kind, mask.astype(float)) if mask.any() else None
    mask = (np.abs(refined_values(alpha)) <= tol) & (np.abs(refined_values(beta)) <= tol)
    return _interval_mask_indicator(alpha.kind, mask)


# =============================================================================
# Predicates
# =============================================================================

def is_unitary(alpha: AlgebraElement, tol: float = 1e-8) -> bool:
    one = unit(alpha.kind)
    return (norm(sub(mul(star(alpha), alpha), one)) <= tol
            and norm(sub(mul(alpha, star(alpha)), one)) <= tol)


def is_hermitian(alpha: AlgebraElement, tol: float = 1e-9) -> bool:
    return norm(sub(alpha, star(alpha))) <= tol


def is_projection(alpha: AlgebraElement, tol: float = 1e-9) -> bool:
    return is_hermitian(alpha, tol) and norm(sub(mul(alpha, alpha), alpha)) <= tol


def geometric_rate(beta: AlgebraElement) -> float:
    """lim ||beta^k||^(1/k) by repeated squaring (the spectral radius).

    Function kinds return sup|beta| on the refined grid, which is the exact
    rate for a normal element.
    """
    if is_function_kind(beta.kind):
        return norm(beta)
    m = np.array(beta.data)
    scale = np.linalg.norm(m, ord=2)
    if scale == 0.0:
        return 0.0
    m = m / scale
    log_c = math.log(scale)
    estimate = scale
    for level in range(1, 41):
        m = m @ m
        s = np.linalg.norm(m, ord=2)
        if s == 0.0:
            return 0.0
        m = m / s
        log_c = 2.0 * log_c + math.log(s)
        previous, estimate = estimate, math.exp(log_c / 2.0 ** level)
        if abs(estimate - previous) <= 1e-13 * max(estimate, 1e-300):
            break
    return estimate
