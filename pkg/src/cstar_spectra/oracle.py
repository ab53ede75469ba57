"""
Truncation oracle: brute-force evidence for bounded-below, kernels and solvability.

Operators are flattened to complex matrices. Every bank operator acts fiberwise
over a function algebra, so a function kind yields one matrix per grid
node/cell. A matrix kind yields a single matrix on the stacked matrix
coordinates, with alpha acting by left multiplication (alpha (x) I).

Three sections are available:
- square: rows and columns are the coordinates within the depth;
- rectangular: columns within the depth, rows within twice the depth. Its
  smallest singular value is the bounded-below constant on vectors supported
  within the depth;
- complete: the rows whose equation references no column beyond the depth.

Results are evidence, not proof: the report says so.
"""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
import scipy.linalg

from .algebra import AlgebraElement, AlgebraKind, MatrixAlgebra, fiber_count, is_function_kind, scalar_kind, star
from .config import DEFAULT_CONFIG, SpectraConfig
from .errors import ShapeMismatch
from .module import Indexing, Integers, ModuleVector, indexing_like, vector_norm
from .operators import OperatorExpr, adjoint, apply, apply_coords, check_compatible, embedded_kind, indexing_for, shifted

logger = logging.getLogger(__name__)

# Largest fiber_count * rows * cols flattened at once before fibers are screened
SCREEN_BUDGET = 2 ** 22

KERNEL_INTERIOR_MASS = 0.9
KERNEL_CANDIDATE_LIMIT = 16
STABLE_CHANGE = 0.10
DIVERGENCE_FACTOR = 2.0
SOLVE_GROWTH = 1.15


class Section(str, Enum):
    SQUARE = "square"
    RECTANGULAR = "rectangular"
    COMPLETE = "complete"


class OracleVerdict(str, Enum):
    CERTIFIED = "CertifiedBoundedBelow"
    NEAR_SINGULAR = "NearSingularTrend"
    INDETERMINATE = "Indeterminate"


class Trend(str, Enum):
    BOUNDED_BELOW = "BoundedBelow"
    SINGULAR = "Singular"
    UNDECIDED = "Undecided"


# =============================================================================
# Flattening
# =============================================================================

@dataclass(frozen=True, eq=False)
class FlattenedTruncation:
    """Per-fiber finite sections of an operator at one depth."""

    depth: int
    kind: AlgebraKind
    indexing: Indexing
    section: Section
    fibers: np.ndarray          # (fiber, row, column)
    fiber_ids: np.ndarray
    row_coords: np.ndarray      # module index of every row
    col_coords: np.ndarray      # module index of every column
    col_positions: np.ndarray   # flat position of every column in a depth-``depth`` vector
    row_offsets: np.ndarray     # position of every row inside its coordinate (matrix kind)

    @property
    def fiber_count(self) -> int:
        return len(self.fiber_ids)

    def _interior(self, coords: np.ndarray) -> np.ndarray:
        return np.abs(coords) <= self.depth // 2 if isinstance(self.indexing, Integers) \
            else coords <= self.depth // 2

    def interior_columns(self) -> np.ndarray:
        return self._interior(self.col_coords)

    def interior_rows(self) -> np.ndarray:
        return self._interior(self.row_coords)

    def column_vector(self, values: np.ndarray, fiber: int | None = None) -> ModuleVector:
        """Place a column-space vector back into H_A at this depth."""
        size = self.indexing.size
        if isinstance(self.kind, MatrixAlgebra):
            flat = np.zeros(size * self.kind.n ** 2, dtype=np.complex128)
            flat[self.col_positions] = values
            return ModuleVector(self.kind, self.indexing, flat.reshape(size, self.kind.n, self.kind.n))
        coords = np.zeros((size, self.kind.grid.resolution), dtype=np.complex128)
        coords[self.col_positions, fiber] = values
        return ModuleVector(self.kind, self.indexing, coords)


def _positions(kind: AlgebraKind, indexing: Indexing) -> tuple[np.ndarray, np.ndarray]:
    """Module index and offset inside the coordinate of every flat position."""
    coords = indexing.indices()
    if isinstance(kind, MatrixAlgebra):
        block = kind.n * kind.n
        flat = np.arange(indexing.size * block)
        return np.repeat(coords, block), flat % block
    return coords, np.zeros(indexing.size, dtype=int)


def _in_range(coords: np.ndarray, indexing: Indexing) -> np.ndarray:
    if isinstance(indexing, Integers):
        return np.abs(coords) <= indexing.radius
    return coords <= indexing.length


def _full_matrices(op: OperatorExpr, kind: AlgebraKind, indexing: Indexing, fiber_ids: np.ndarray) -> np.ndarray:
    """Columns are apply() on basis vectors of ``indexing``."""
    size = indexing.size
    if isinstance(kind, MatrixAlgebra):
        n = kind.n
        width = size * n * n
        matrix = np.empty((1, width, width), dtype=np.complex128)
        for p in range(width):
            unit_coords = np.zeros(width, dtype=np.complex128)
            unit_coords[p] = 1.0
            image = apply_coords(op, kind, indexing, unit_coords.reshape(size, n, n))
            matrix[0, :, p] = image.reshape(-1)
        return matrix

    resolution = kind.grid.resolution
    matrices = np.empty((len(fiber_ids), size, size), dtype=np.complex128)
    for j in range(size):
        unit_coords = np.zeros((size, resolution), dtype=np.complex128)
        unit_coords[j] = 1.0
        image = apply_coords(op, kind, indexing, unit_coords)
        matrices[:, :, j] = image[:, fiber_ids].T
    return matrices


def flatten(op: OperatorExpr, N: int, kind: AlgebraKind | None = None,
            section: Section | str = Section.SQUARE, fibers=None) -> FlattenedTruncation:
    """Finite section of ``op`` at depth N (N coordinates, or radius N over the integers)."""
    section = Section(section)
    kind = kind or embedded_kind(op) or scalar_kind()
    if N < 1:
        raise ShapeMismatch(f"truncation depth must be positive, got {N}")
    indexing = indexing_for(op, N)
    check_compatible(op, kind, indexing)

    fiber_ids = np.arange(fiber_count(kind)) if fibers is None or not is_function_kind(kind) \
        else np.asarray(sorted(set(int(f) for f in fibers)))
    built_on = indexing if section is Section.SQUARE else indexing.scaled(2)
    full = _full_matrices(op, kind, built_on, fiber_ids)

    coords, offsets = _positions(kind, built_on)
    in_range = _in_range(coords, indexing)
    cols = in_range.copy()
    if section is Section.RECTANGULAR and isinstance(kind, MatrixAlgebra) and kind.finite_section:
        # drop coordinate matrices with a nonzero last row
        cols &= offsets // kind.n != kind.n - 1

    if section is Section.SQUARE:
        rows = in_range
    elif section is Section.RECTANGULAR:
        rows = np.ones_like(in_range)
    else:
        leaks = np.any(np.abs(full[:, :, ~in_range]) > 0.0, axis=(0, 2))
        rows = in_range & ~leaks

    matrices = full[:, rows][:, :, cols]
    col_positions = np.flatnonzero(cols) - np.flatnonzero(in_range)[0]
    if not is_function_kind(kind):
        fiber_ids = np.array([0])
    return FlattenedTruncation(
        depth=N,
        kind=kind,
        indexing=indexing,
        section=section,
        fibers=matrices,
        fiber_ids=fiber_ids,
        row_coords=coords[rows],
        col_coords=coords[cols],
        col_positions=col_positions,
        row_offsets=offsets[rows],
    )


def fiber_min_singular(ft: FlattenedTruncation) -> np.ndarray:
    """sigma_min of every fiber (0 for an empty section)."""
    rows, cols = ft.fibers.shape[1:]
    if rows == 0 or cols == 0 or rows < cols:
        return np.zeros(ft.fiber_count)
    return np.linalg.svd(ft.fibers, compute_uv=False)[:, -1]


def min_singular(ft: FlattenedTruncation) -> float:
    return float(np.min(fiber_min_singular(ft)))


def complete_coordinates(ft: FlattenedTruncation) -> tuple[int, ...]:
    """Module indices whose every row survives in the section."""
    coords, counts = np.unique(ft.row_coords, return_counts=True)
    block = ft.kind.n ** 2 if isinstance(ft.kind, MatrixAlgebra) else 1
    return tuple(int(k) for k in coords[counts == block])


def _needs_screening(kind: AlgebraKind, size: int, config: SpectraConfig) -> bool:
    count = fiber_count(kind)
    return count > config.screen_fibers and count * size * size > SCREEN_BUDGET


def scaled_depth(kind: AlgebraKind, depth: int) -> int:
    """Depth in module coordinates; a matrix kind carries n*n unknowns per coordinate."""
    if isinstance(kind, MatrixAlgebra):
        return max(2, depth // kind.n)
    return depth


def ladder_depths(kind: AlgebraKind, depths) -> tuple[int, ...]:
    scaled = []
    for depth in depths:
        value = scaled_depth(kind, depth)
        if scaled and value <= scaled[-1]:
            value = scaled[-1] + 1
        scaled.append(value)
    return tuple(scaled)


def _built_size(op: OperatorExpr, depth: int, section: Section) -> int:
    indexing = indexing_for(op, depth)
    return (indexing if section is Section.SQUARE else indexing.scaled(2)).size


# =============================================================================
# Reports
# =============================================================================

@dataclass(frozen=True)
class KernelCandidate:
    vector: ModuleVector
    fiber: int
    residual: float
    interior_mass: float
    rows: tuple[int, ...] = ()   # module indices of the rows the residual was measured on

    def to_dict(self) -> dict:
        return {
            "fiber": self.fiber,
            "residual": self.residual,
            "interior_mass": self.interior_mass,
            "support": self.vector.support(1e-12),
        }


@dataclass(frozen=True)
class OracleReport:
    depths: tuple[int, ...]
    sv_min: tuple[float, ...]
    verdict: OracleVerdict
    bound: float | None
    trend: Trend
    extrapolated_bound: float | None
    section: Section
    fibers: tuple[int, ...]
    samples: tuple[tuple[int, int, float], ...] = ()
    kernel_candidates: tuple[KernelCandidate, ...] = ()
    solve_residuals: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        return {
            "evidence": "finite-section estimate",
            "section": self.section.value,
            "depths": list(self.depths),
            "sv_min": list(self.sv_min),
            "verdict": self.verdict.value,
            "bound": self.bound,
            "trend": self.trend.value,
            "extrapolated_bound": self.extrapolated_bound,
            "screened_fibers": list(self.fibers),
            "kernel_candidates": [c.to_dict() for c in self.kernel_candidates],
            "solve_residuals": list(self.solve_residuals),
        }

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["depth", "fiber", "sv_min"])
        for depth, fiber, value in self.samples:
            writer.writerow([depth, fiber, repr(value)])
        return buffer.getvalue()


def classify_ladder(sv: list[float], tol: float) -> tuple[OracleVerdict, float | None]:
    a, b, c = sv[-3:]
    if c <= tol or (a >= DIVERGENCE_FACTOR * b and b >= DIVERGENCE_FACTOR * c):
        return OracleVerdict.NEAR_SINGULAR, None
    stable = abs(b - a) <= STABLE_CHANGE * a and abs(c - b) <= STABLE_CHANGE * b
    if stable and min(a, b, c) >= tol:
        return OracleVerdict.CERTIFIED, min(a, b, c)
    return OracleVerdict.INDETERMINATE, None


def extrapolate(sv: list[float], verdict: OracleVerdict, bound: float | None,
                tol: float) -> tuple[Trend, float | None]:
    """Richardson step sigma^2 = (4 s_N^2 - s_{N/2}^2) / 3 when the strict rule is silent."""
    if verdict is OracleVerdict.CERTIFIED:
        return Trend.BOUNDED_BELOW, bound
    if verdict is OracleVerdict.NEAR_SINGULAR:
        return Trend.SINGULAR, 0.0
    previous, last = sv[-2], sv[-1]
    squared = (4.0 * last * last - previous * previous) / 3.0
    if squared <= 0.0:
        return Trend.SINGULAR, 0.0
    estimate = math.sqrt(squared)
    if estimate < 0.25 * last:
        return Trend.SINGULAR, estimate
    if estimate >= 0.5 * last and estimate > tol:
        return Trend.BOUNDED_BELOW, estimate
    return Trend.UNDECIDED, estimate


def bounded_below_ladder(op: OperatorExpr, alpha: AlgebraElement, depths=None,
                         section: Section | str = Section.SQUARE,
                         config: SpectraConfig = DEFAULT_CONFIG) -> OracleReport:
    """sigma_min of flatten(op - alpha I) across a depth ladder."""
    section = Section(section)
    depths = tuple(depths or ladder_depths(alpha.kind, config.oracle_depths))
    if len(depths) < 3 or any(b <= a for a, b in zip(depths, depths[1:])):
        raise ShapeMismatch("oracle depths must be strictly increasing with at least 3 entries")
    kind = alpha.kind
    target = shifted(op, alpha)

    sv, samples = [], []
    screened = None
    for depth in depths:
        fibers = screened if _needs_screening(kind, _built_size(target, depth, section), config) else None
        ft = flatten(target, depth, kind, section, fibers)
        per_fiber = fiber_min_singular(ft)
        sv.append(float(per_fiber.min()))
        samples.extend((depth, int(f), float(s)) for f, s in zip(ft.fiber_ids, per_fiber))
        order = np.argsort(per_fiber, kind="stable")[:config.screen_fibers]
        screened = tuple(int(f) for f in ft.fiber_ids[order])

    verdict, bound = classify_ladder(sv, config.oracle_sv_tol)
    trend, extrapolated = extrapolate(sv, verdict, bound, config.oracle_sv_tol)
    logger.debug("ladder %s section=%s sv=%s verdict=%s trend=%s", depths, section.value, sv,
                 verdict.value, trend.value)
    return OracleReport(
        depths=depths,
        sv_min=tuple(sv),
        verdict=verdict,
        bound=bound,
        trend=trend,
        extrapolated_bound=extrapolated,
        section=section,
        fibers=screened,
        samples=tuple(samples),
    )


# =============================================================================
# Kernels
# =============================================================================

def _screen(target: OperatorExpr, kind: AlgebraKind, config: SpectraConfig) -> tuple[int, ...]:
    ft = flatten(target, 32, kind, Section.SQUARE)
    order = np.argsort(fiber_min_singular(ft), kind="stable")[:config.screen_fibers]
    return tuple(int(f) for f in ft.fiber_ids[order])


def kernel_search(op: OperatorExpr, alpha: AlgebraElement, N: int | None = None, fibers=None,
                  config: SpectraConfig = DEFAULT_CONFIG,
                  limit: int = KERNEL_CANDIDATE_LIMIT) -> list[KernelCandidate]:
    """Interior-supported null vectors of op - alpha I on the complete rows.

    Null directions concentrated beyond N/2 are truncation artifacts and are
    discarded, as are candidates whose residual grows once the vector is
    zero-padded to depth 2N.
    """
    N = N or scaled_depth(alpha.kind, config.kernel_depth)
    kind = alpha.kind
    target = shifted(op, alpha)
    if fibers is None and _needs_screening(kind, _built_size(target, N, Section.COMPLETE), config):
        fibers = _screen(target, kind, config)

    ft = flatten(target, N, kind, Section.COMPLETE, fibers)
    interior = ft.interior_columns()
    rows = complete_coordinates(ft)
    tol = config.oracle_sv_tol
    candidates = []
    for index, fiber in enumerate(ft.fiber_ids):
        matrix = ft.fibers[index]
        if matrix.shape[0]:
            _, s, vh = scipy.linalg.svd(matrix)
            rank = int(np.sum(s > tol))
        else:
            vh, rank = np.eye(matrix.shape[1]), 0
        null = vh[rank:].conj().T
        if null.shape[1] == 0:
            continue
        _, mass_sv, mix = scipy.linalg.svd(null[interior], full_matrices=False)
        for sigma, coefficients in zip(mass_sv, mix.conj()):
            mass = float(sigma * sigma)
            if mass < KERNEL_INTERIOR_MASS:
                break
            v = null @ coefficients
            v = v / np.linalg.norm(v)
            residual = float(np.linalg.norm(matrix @ v)) if matrix.shape[0] else 0.0
            candidate = KernelCandidate(ft.column_vector(v, int(fiber)), int(fiber), residual, mass, rows)
            recheck = residual_at_depth(op, alpha, candidate, 2 * N)
            if recheck > tol:
                logger.debug("dropping fiber %d candidate: residual %.3g at depth %d", fiber, recheck, 2 * N)
                continue
            candidates.append(candidate)

    candidates.sort(key=lambda c: (-c.interior_mass, c.fiber))
    logger.debug("kernel search N=%d found %d candidates", N, len(candidates))
    return candidates[:limit]


# =============================================================================
# Solving
# =============================================================================

@dataclass(frozen=True)
class SolveResult:
    solution: ModuleVector
    residual: float
    depths: tuple[int, ...]
    solution_norms: tuple[float, ...]
    residuals: tuple[float, ...]
    diverging: bool

    def to_dict(self) -> dict:
        return {
            "residual": self.residual,
            "depths": list(self.depths),
            "solution_norms": list(self.solution_norms),
            "residuals": list(self.residuals),
            "diverging": self.diverging,
        }


def _target_rows(target: ModuleVector, ft: FlattenedTruncation) -> np.ndarray:
    """Right-hand side restricted to the rows of ``ft`` (one row vector per fiber)."""
    rhs = np.zeros((ft.fiber_count, len(ft.row_coords)), dtype=np.complex128)
    indices = {int(k): i for i, k in enumerate(target.indexing.indices())}
    if isinstance(ft.kind, MatrixAlgebra):
        for r, coord in enumerate(ft.row_coords):
            if (position := indices.get(int(coord))) is not None:
                rhs[0, r] = target.coords[position].reshape(-1)[ft.row_offsets[r]]
        return rhs
    for r, coord in enumerate(ft.row_coords):
        if (position := indices.get(int(coord))) is not None:
            rhs[:, r] = target.coords[position, ft.fiber_ids]
    return rhs


def solve(op: OperatorExpr, alpha: AlgebraElement, target: ModuleVector, N: int | None = None,
          fibers=None, config: SpectraConfig = DEFAULT_CONFIG) -> SolveResult:
    """Minimum-norm least squares for (op - alpha I) x = target on the complete rows.

    Runs the sub-ladder N/4, N/2, N. A fiber whose solution norm grows by at
    least 15% on each of the last two doublings marks the equation as not
    solvable in H_A.
    """
    kind = alpha.kind
    op_target = shifted(op, alpha)
    if N is None:
        N = config.bilateral_radius if isinstance(target.indexing, Integers) else config.truncation
    depths = (max(N // 4, 1), max(N // 2, 2), N)

    norms, residuals = [], []
    history: dict[int, list[float]] = {}
    solution = None
    for depth in depths:
        if fibers is None and _needs_screening(kind, _built_size(op_target, depth, Section.COMPLETE), config):
            fibers = _largest_norm_fibers(solution, config)
        ft = flatten(op_target, depth, kind, Section.COMPLETE, fibers)
        rhs = _target_rows(target, ft)
        columns = np.zeros((ft.fiber_count, ft.fibers.shape[2]), dtype=np.complex128)
        fiber_residuals = []
        for index in range(ft.fiber_count):
            x, *_ = scipy.linalg.lstsq(ft.fibers[index], rhs[index], lapack_driver="gelsd")
            columns[index] = x
            fiber_residuals.append(float(np.linalg.norm(ft.fibers[index] @ x - rhs[index])))
        solution = _assemble(ft, columns)
        for fiber, value in _fiber_norms(ft, columns, solution):
            history.setdefault(fiber, []).append(value)
        norms.append(vector_norm(solution))
        residuals.append(max(fiber_residuals))

    diverging = any(_growing(values) for values in history.values())
    logger.debug("solve depths=%s norms=%s residuals=%s diverging=%s", depths, norms, residuals, diverging)
    return SolveResult(solution, residuals[-1], depths, tuple(norms), tuple(residuals), diverging)


def _assemble(ft: FlattenedTruncation, columns: np.ndarray) -> ModuleVector:
    if isinstance(ft.kind, MatrixAlgebra):
        return ft.column_vector(columns[0])
    size = ft.indexing.size
    coords = np.zeros((size, ft.kind.grid.resolution), dtype=np.complex128)
    coords[np.ix_(ft.col_positions, ft.fiber_ids)] = columns.T
    return ModuleVector(ft.kind, ft.indexing, coords)


def _fiber_norms(ft: FlattenedTruncation, columns: np.ndarray, solution: ModuleVector):
    if isinstance(ft.kind, MatrixAlgebra):
        return [(0, vector_norm(solution))]
    per_fiber = np.sqrt(np.sum(np.abs(columns) ** 2, axis=1))
    return [(int(f), float(v)) for f, v in zip(ft.fiber_ids, per_fiber)]


def _growing(values: list[float]) -> bool:
    if len(values) < 3:
        return False
    a, b, c = values[-3:]
    return a > 0.0 and b >= SOLVE_GROWTH * a and c >= SOLVE_GROWTH * b


def _largest_norm_fibers(solution: ModuleVector | None, config: SpectraConfig):
    if solution is None:
        return None
    per_fiber = np.sqrt(np.sum(np.abs(solution.coords) ** 2, axis=0))
    order = np.argsort(-per_fiber, kind="stable")[:config.screen_fibers]
    return tuple(int(f) for f in order)


# =============================================================================
# Combined verdict
# =============================================================================

def invertibility_verdict(op: OperatorExpr, alpha: AlgebraElement,
                          config: SpectraConfig = DEFAULT_CONFIG) -> OracleReport:
    """Square ladder plus kernel searches on op - alpha and op* - alpha*.

    Any interior kernel candidate on either side makes the trend Singular.
    """
    report = bounded_below_ladder(op, alpha, section=Section.SQUARE, config=config)
    kind = alpha.kind
    depth = scaled_depth(kind, config.kernel_depth)
    size = _built_size(shifted(op, alpha), depth, Section.COMPLETE)
    fibers = report.fibers if _needs_screening(kind, size, config) else None
    candidates = (kernel_search(op, alpha, depth, fibers, config)
                  + kernel_search(adjoint(op), star(alpha), depth, fibers, config))

    if report.trend is Trend.SINGULAR or candidates:
        trend = Trend.SINGULAR
    elif report.trend is Trend.BOUNDED_BELOW:
        trend = Trend.BOUNDED_BELOW
    else:
        trend = Trend.UNDECIDED
    return replace(report, trend=trend, kernel_candidates=tuple(candidates))


def residual_on_rows(op: OperatorExpr, alpha: AlgebraElement, x: ModuleVector,
                     rows: np.ndarray | None = None) -> float:
    """||(op - alpha I) x|| restricted to a coordinate mask (default: interior)."""
    image = apply(shifted(op, alpha), x)
    mask = x.indexing.interior() if rows is None else rows
    kept = np.array(image.coords)
    kept[~mask] = 0.0
    return vector_norm(ModuleVector(image.kind, image.indexing, kept))


def residual_at_depth(op: OperatorExpr, alpha: AlgebraElement, candidate: KernelCandidate, depth: int) -> float:
    """Residual of a kernel candidate on its own rows after zero-padding to ``depth``."""
    x = candidate.vector.resized(indexing_like(candidate.vector.indexing, depth))
    return residual_on_rows(op, alpha, x, np.isin(x.indexing.indices(), candidate.rows))
