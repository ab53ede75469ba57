"""
Closed-form membership rules for generalized spectra over a C*-algebra A.

Every rule returns a SpectrumVerdict carrying a Certificate. Witness vectors
are built explicitly and re-verified by applying the operator before they
are returned; a witness that fails its own check raises WitnessCheckFailed.

Thresholds are inclusive where the spectrum is closed: values within
boundary_band of 1 count as In. "Positive measure" and "on a closed
subinterval" are read at grid scale (one cell, or one full grid interval).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Sequence

import numpy as np

from .algebra import (
    AlgebraElement,
    ContinuousFunctions,
    EssentiallyBounded,
    MatrixAlgebra,
    PowerSequence,
    common_right_annihilator,
    geometric_rate,
    inf_abs,
    interval_indicator,
    is_commutative,
    is_function_kind,
    norm,
    refined_values,
    right_annihilator_basis,
    star,
    sub,
    try_invert,
)
from .config import DEFAULT_CONFIG, SpectraConfig
from .errors import (
    BoundsNotClosedForm,
    DifferenceNotInvertible,
    IndexOutOfRange,
    KindMismatch,
    KindUnsupported,
    NonFiniteEntry,
    NotApplicable,
    NotCommutative,
    NotInvertible,
    NotNormal,
    NotSelfAdjoint,
    PreconditionFailed,
    PreconditionNotCertified,
    SkewPartNotInvertible,
    WitnessCheckFailed,
)
from .module import (
    Growth,
    GrowthDiagnostic,
    ModuleVector,
    Natural,
    basis_vector,
    inner_product,
    is_orthogonal,
    sequence_membership_diagnostic,
    vector_norm,
)
from .operators import (
    BoundsMethod,
    DiagonalUnitary,
    ExpanderKind,
    OperatorExpr,
    UnilateralShift,
    WeightedShift,
    adjoint,
    apply,
    block_shift,
    expander_operator,
    indexing_for,
    is_normal,
    is_self_adjoint,
    self_adjoint_bounds,
    shifted,
)
from .oracle import (
    OracleReport,
    OracleVerdict,
    Section,
    Trend,
    bounded_below_ladder,
    kernel_search,
    residual_on_rows,
    solve,
)

logger = logging.getLogger(__name__)

KERNEL_RESIDUAL_TOL = 1e-8
PAIRING_TOL = 1e-8
MIN_WITNESS_NORM = 1e-6
STAR_TRANSFER_TOL = 1e-7
ORTHOGONALITY_TOL = 1e-7
SOLVE_RESIDUAL_TOL = 1e-7
SKEW_CROSS_CHECK_SLACK = 1e-6
DEFECT_RELATIVE_TOL = 1e-6
RANDOM_TARGETS = 4


# =============================================================================
# Verdicts and certificates
# =============================================================================

class Membership(str, Enum):
    IN = "In"
    OUT = "Out"
    BOUNDARY_INDETERMINATE = "BoundaryIndeterminate"
    INCONCLUSIVE = "Inconclusive"


class SpectrumPart(str, Enum):
    FULL = "Full"
    POINT = "Point"
    RESIDUAL_LIKE = "ResidualLike"
    APPROX_POINT = "ApproxPoint"


class CertificateKind(str, Enum):
    KERNEL = "KernelWitness"
    COKERNEL = "CokernelWitness"
    RESOLVENT = "ResolventSolution"
    BOUND = "InvertibilityBound"
    GROWTH = "GrowthDiagnostic"
    ORACLE = "OracleReport"
    NONE = "None"


@dataclass(frozen=True)
class Certificate:
    kind: CertificateKind
    vector: ModuleVector | None = None
    residual: float | None = None
    max_pairing: float | None = None
    target_index: int | None = None
    remainder: float | None = None
    bound: float | None = None
    growth: GrowthDiagnostic | None = None
    oracle: OracleReport | None = None
    reason: str | None = None

    def to_dict(self) -> dict[str, Any]:
        from .literals import vector_to_literal

        payload: dict[str, Any] = {"kind": self.kind.value}
        for name in ("residual", "max_pairing", "target_index", "remainder", "bound", "reason"):
            value = getattr(self, name)
            if value is not None:
                payload[name] = value
        if self.vector is not None:
            payload["vector"] = vector_to_literal(self.vector)
        if self.growth is not None:
            payload["growth"] = self.growth.to_dict()
        if self.oracle is not None:
            payload["oracle"] = self.oracle.to_dict()
        return payload


@dataclass(frozen=True)
class SpectrumVerdict:
    membership: Membership
    part: SpectrumPart
    certificate: Certificate
    rule: str
    notes: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        payload = {
            "membership": self.membership.value,
            "spectrum_part": self.part.value,
            "rule": self.rule,
            "certificate": self.certificate.to_dict(),
        }
        if self.notes:
            payload["notes"] = dict(self.notes)
        return payload


def _none(reason: str) -> Certificate:
    return Certificate(CertificateKind.NONE, reason=reason)


# =============================================================================
# Shared helpers
# =============================================================================

def _require_function_kind(alpha: AlgebraElement, what: str):
    if not is_function_kind(alpha.kind):
        raise KindUnsupported(f"{what} is defined over C([0,1]) or L-infinity, not {alpha.kind.label}")


def _require_step_kind(alpha: AlgebraElement, what: str):
    if not isinstance(alpha.kind, EssentiallyBounded):
        raise KindUnsupported(f"{what} needs the step-function algebra, not {alpha.kind.label}")


def _cells_left(kind) -> np.ndarray:
    return kind.sample_points() < 0.5


OFF_GRID_REASON = "|alpha| < 1 only between grid nodes: no node-level witness at this resolution"


def _contraction_mask(alpha: AlgebraElement, region: np.ndarray | None = None) -> np.ndarray | None:
    """Nodes (cells) in ``region`` where |alpha| <= 1 - eps, eps = (1 - min|alpha|)/2.

    The minimum is over stored nodes, since witness coordinates live there.
    None when no node in the region has |alpha| < 1; ``inf_abs`` may still be
    below 1 when a continuous alpha dips only between nodes.
    """
    values = np.abs(alpha.data)
    region = np.ones(values.shape, dtype=bool) if region is None else region
    if not region.any():
        return None
    smallest = float(values[region].min())
    if smallest >= 1.0:
        return None
    eps = (1.0 - smallest) / 2.0
    return region & (values <= 1.0 - eps)


def _ladder(alpha_kind, N: int, indices: Sequence[int], base: np.ndarray, chi: np.ndarray) -> ModuleVector:
    """x_{indices[j]} = chi * base^j, zero elsewhere."""
    coords = np.zeros((N, *alpha_kind.element_shape), dtype=np.complex128)
    current = chi.astype(np.complex128)
    for index in indices:
        coords[index - 1] = current
        current = current * base
    return ModuleVector(alpha_kind, Natural(N), coords)


def _dyadic_indices(N: int) -> list[int]:
    indices, k = [], 1
    while k <= N:
        indices.append(k)
        k *= 2
    return indices


def _odd_ladder_indices(N: int) -> list[int]:
    """r_1 = 2, r_{k+1} = 2 r_k - 1."""
    indices, r = [], 2
    while r <= N:
        indices.append(r)
        r = 2 * r - 1
    return indices


def _max_pairing(op: OperatorExpr, alpha: AlgebraElement, x: ModuleVector) -> float:
    """max over interior k of ||<(op - alpha) e_k, x>||."""
    target = shifted(op, alpha)
    worst = 0.0
    for k in x.indexing.indices()[x.indexing.interior()]:
        image = apply(target, basis_vector(int(k), x.kind, x.indexing))
        worst = max(worst, norm(inner_product(image, x)))
    return worst


def _verified_kernel(op: OperatorExpr, alpha: AlgebraElement, x: ModuleVector, what: str) -> Certificate:
    residual = residual_on_rows(op, alpha, x)
    if residual > KERNEL_RESIDUAL_TOL or vector_norm(x) < MIN_WITNESS_NORM:
        raise WitnessCheckFailed(f"{what} kernel witness failed verification", residual=residual)
    return Certificate(CertificateKind.KERNEL, vector=x, residual=residual)


def _verified_cokernel(op: OperatorExpr, alpha: AlgebraElement, x: ModuleVector, what: str) -> Certificate:
    pairing = _max_pairing(op, alpha, x)
    if pairing > PAIRING_TOL or vector_norm(x) < MIN_WITNESS_NORM:
        raise WitnessCheckFailed(f"{what} cokernel witness failed verification", max_pairing=pairing)
    return Certificate(CertificateKind.COKERNEL, vector=x, max_pairing=pairing)


def _inverse_powers(alpha: AlgebraElement, config: SpectraConfig) -> GrowthDiagnostic:
    """Membership of (alpha^-1, alpha^-2, ...) in H_A."""
    powers = PowerSequence(try_invert(alpha, config.tolerances))
    return sequence_membership_diagnostic(powers, config=config)


def _random_targets(kind, indexing, count: int, seed: int) -> list[ModuleVector]:
    rng = np.random.default_rng(seed)
    shape = (indexing.size, *kind.element_shape)
    targets = []
    for _ in range(count):
        coords = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        coords[~indexing.interior()] = 0.0
        targets.append(ModuleVector(kind, indexing, coords))
    return targets


def _require_commutative(alpha: AlgebraElement, message: str):
    if not is_commutative(alpha.kind):
        raise NotCommutative(message)


def _require_self_adjoint(op: OperatorExpr, alpha: AlgebraElement):
    if not is_self_adjoint(op, kind=alpha.kind):
        raise NotSelfAdjoint("the operator is not self-adjoint")


# =============================================================================
# Unilateral shift
# =============================================================================

def shift_cokernel_witness(alpha: AlgebraElement, N: int | None = None,
                           config: SpectraConfig = DEFAULT_CONFIG) -> Certificate:
    """x = (g, a*g, a*^2 g, ...) orthogonal to the range of alpha I - S.

    g is the indicator of {|alpha| <= 1 - eps}; the pairing is checked over
    k <= N/2.
    """
    _require_function_kind(alpha, "the shift cokernel witness")
    N = N or config.witness_depth
    if inf_abs(alpha) >= 1.0 - config.boundary_band:
        raise NotApplicable("alpha I - S has dense range when inf|alpha| >= 1")
    chi = _contraction_mask(alpha)
    if chi is None:
        raise NotApplicable(OFF_GRID_REASON)
    x = _ladder(alpha.kind, N, range(1, N + 1), alpha.data.conj(), chi)
    return _verified_cokernel(UnilateralShift(), alpha, x, "shift")


def unilateral_shift_spectrum(alpha: AlgebraElement,
                              config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """sigma(S) = {alpha : inf|alpha| <= 1} over C([0,1]) and L-infinity."""
    if isinstance(alpha.kind, MatrixAlgebra):
        raise KindUnsupported("over a matrix algebra use mn_shift_spectrum")
    band = config.boundary_band
    value = inf_abs(alpha)
    notes = {"inf_abs": value}

    if value <= 1.0 + band:
        rule = "unilateral-shift:closure" if abs(value - 1.0) <= band else "unilateral-shift:inf-abs"
        if value >= 1.0 - band:
            certificate = _none("boundary point: the spectrum is closed")
        elif _contraction_mask(alpha) is None:
            certificate = _none(OFF_GRID_REASON)
        else:
            certificate = shift_cokernel_witness(alpha, config=config)
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, rule, notes)

    growth = _inverse_powers(alpha, config)
    certificate = Certificate(CertificateKind.GROWTH, growth=growth, bound=value - 1.0)
    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL, certificate, "unilateral-shift:inf-abs", notes)


def unilateral_shift_point_spectrum(alpha: AlgebraElement,
                                    config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    _require_function_kind(alpha, "the point spectrum of S")
    return SpectrumVerdict(Membership.OUT, SpectrumPart.POINT,
                           _none("kernel recursion forces x = 0"), "unilateral-shift:point-empty")


def shift_resolvent_solution(alpha: AlgebraElement, k: int = 1, N: int | None = None,
                             config: SpectraConfig = DEFAULT_CONFIG) -> Certificate:
    """Solve (alpha I - S) x = e_k with x_n = alpha^-(n-k+1) for n >= k."""
    N = N or config.witness_depth
    if not 1 <= k <= N // 2:
        raise IndexOutOfRange(f"target index {k} outside 1..{N // 2}")
    inverse = try_invert(alpha, config.tolerances)
    indexing = Natural(N)

    coords = np.zeros((N, *alpha.kind.element_shape), dtype=np.complex128)
    powers = PowerSequence(inverse)
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            for n in range(k, N + 1):
                coords[n - 1] = powers(n - k + 1).data
        x = ModuleVector(alpha.kind, indexing, coords)
    except NonFiniteEntry as e:
        raise NotApplicable(f"alpha^-n overflows before depth {N}") from e

    image = apply(shifted(UnilateralShift(), alpha), x) + basis_vector(k, alpha.kind, indexing)
    kept = np.array(image.coords)
    kept[~indexing.interior()] = 0.0
    residual = vector_norm(ModuleVector(alpha.kind, indexing, kept))
    size = vector_norm(x)
    if residual > KERNEL_RESIDUAL_TOL * (1.0 + size):
        raise WitnessCheckFailed("resolvent solution failed verification", residual=residual)

    growth = sequence_membership_diagnostic(powers, config=config)
    remainder = norm(powers(N - k + 1))
    logger.debug("resolvent k=%d N=%d residual=%g remainder=%g growth=%s",
                 k, N, residual, remainder, growth.verdict.value)
    return Certificate(CertificateKind.RESOLVENT, vector=x, residual=residual, target_index=k,
                       remainder=remainder, growth=growth)


def shift_spectrum_commutative(alpha: AlgebraElement,
                               config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """sigma(S) = (A minus G(A)) union {alpha in G(A) : (alpha^-k) not in H_A}.

    Membership of (alpha^-k) is decided by the ratio test, sup|alpha^-1| < 1;
    the growth diagnostic is attached as evidence.
    """
    _require_function_kind(alpha, "the commutative shift rule")
    try:
        try_invert(alpha, config.tolerances)
    except NotInvertible as e:
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                               _none(f"alpha is not invertible (inf|alpha| = {e.inf_abs:.3g})"),
                               "commutative-shift:not-invertible", {"inf_abs": e.inf_abs})

    value = inf_abs(alpha)
    growth = _inverse_powers(alpha, config)
    inside = value <= 1.0 + config.boundary_band
    expected = Membership.IN if inside else Membership.OUT
    if (inside and growth.verdict is Growth.CONVERGING) or (not inside and growth.verdict is Growth.DIVERGING):
        logger.warning("growth diagnostic %s disagrees with the ratio test (inf|alpha| = %g)",
                       growth.verdict.value, value)
    bound = None if inside else value - 1.0
    certificate = Certificate(CertificateKind.GROWTH, growth=growth, bound=bound)
    return SpectrumVerdict(expected, SpectrumPart.FULL, certificate, "commutative-shift:ratio-test",
                           {"inf_abs": value})


def mn_shift_spectrum(T: AlgebraElement, config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """The shift over A = M_n.

    In finite dimension right invertible means invertible, and an invertible T
    has no right annihilators, so the annihilator part of the spectrum is
    empty. What remains: T singular, or (T^-k) not in H_A. The second
    condition is decided by the geometric rate of ||T^-k||.
    """
    if not isinstance(T.kind, MatrixAlgebra):
        raise KindUnsupported("mn_shift_spectrum needs a matrix algebra")
    notes: dict[str, Any] = {"right_annihilator_part": "empty for invertible T in finite dimension"}
    try:
        inverse = try_invert(T, config.tolerances)
    except NotInvertible:
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                               _none("T is not right invertible"), "mn-shift:not-invertible", notes)

    rate = geometric_rate(inverse)
    growth = sequence_membership_diagnostic(PowerSequence(inverse), config=config)
    notes["inverse_rate"] = rate
    certificate = Certificate(CertificateKind.GROWTH, growth=growth)
    if rate < 1.0 / (1.0 + config.boundary_band):
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL, certificate, "mn-shift:inverse-powers", notes)
    return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, "mn-shift:inverse-powers", notes)


def adjoint_shift_spectrum(beta: AlgebraElement,
                           config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """sigma(S*) = sigma(S)*, with kernel witness (g, beta g, beta^2 g, ...) inside the disc."""
    _require_function_kind(beta, "the adjoint shift rule")
    band = config.boundary_band
    value = inf_abs(beta)
    if value > 1.0 + band:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=value - 1.0),
                               "adjoint-shift:duality", {"inf_abs": value})
    if value >= 1.0 - band:
        certificate = _none("boundary point: the spectrum is closed")
    elif (chi := _contraction_mask(beta)) is None:
        certificate = _none(OFF_GRID_REASON)
    else:
        N = config.witness_depth
        x = _ladder(beta.kind, N, range(1, N + 1), beta.data, chi)
        certificate = _verified_kernel(adjoint(UnilateralShift()), beta, x, "adjoint shift")
    return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, "adjoint-shift:duality",
                           {"inf_abs": value})


# =============================================================================
# Weighted and block shifts
# =============================================================================

def weighted_shift_kernel_witness(alpha: AlgebraElement, weights: Sequence[AlgebraElement], j: int,
                                  config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """gamma e_j is in ker(alpha I - S_w) when alpha gamma = w_j gamma = 0."""
    if j < 1:
        raise IndexOutOfRange(f"weight index {j} must be >= 1")
    weights = tuple(weights)
    w_j = weights[(j - 1) % len(weights)]
    gamma = common_right_annihilator(alpha, w_j, config.tolerances)
    if gamma is None:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.POINT,
                               _none(f"no common annihilator at j = {j}"), "weighted-shift:common-annihilator")

    N = max(config.truncation, 2 * j + 2)
    x = basis_vector(j, alpha.kind, Natural(N), gamma)
    op = WeightedShift(weights)
    residual = vector_norm(apply(shifted(op, alpha), x))
    if residual > KERNEL_RESIDUAL_TOL:
        raise WitnessCheckFailed("weighted shift kernel witness failed verification", residual=residual)
    certificate = Certificate(CertificateKind.KERNEL, vector=x, residual=residual)
    return SpectrumVerdict(Membership.IN, SpectrumPart.POINT, certificate, "weighted-shift:common-annihilator",
                           {"index": j})


def block_shift_spectrum(alpha: AlgebraElement, config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """S~ acts as the identity on the (0,1/2) block and as S on the (1/2,1) block."""
    _require_step_kind(alpha, "the block shift rule")
    band = config.boundary_band
    left = _cells_left(alpha.kind)
    right = ~left
    values = np.abs(alpha.data)
    right_inf = float(values[right].min())
    op = block_shift(alpha.kind)
    notes: dict[str, Any] = {"right_inf_abs": right_inf}

    if right_inf <= 1.0 + band:
        certificate = _none("boundary point on the right block: the spectrum is closed")
        if right_inf < 1.0 - band:
            chi = _contraction_mask(alpha, right)
            N = config.witness_depth
            x = _ladder(alpha.kind, N, range(1, N + 1), alpha.data.conj(), chi)
            certificate = _verified_cokernel(op, alpha, x, "block shift")
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, "block-shift:right-block", notes)

    distance = np.abs(alpha.data - 1.0)
    unit_cells = left & (distance <= config.eq_tol)
    if unit_cells.any():
        x = basis_vector(1, alpha.kind, Natural(config.truncation),
                         AlgebraElement(alpha.kind, unit_cells.astype(float)))
        certificate = _verified_kernel(op, alpha, x, "block shift")
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, "block-shift:left-unit", notes)

    bound = min(right_inf - 1.0, float(distance[left].min()))
    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                           Certificate(CertificateKind.BOUND, bound=bound), "block-shift:blocks", notes)


# =============================================================================
# Residual part and bounded-below evidence
# =============================================================================

def _surjectivity_defect(op: OperatorExpr, alpha: AlgebraElement, config: SpectraConfig,
                         N: int, seed: int) -> tuple[bool, list[float]]:
    indexing = indexing_for(shifted(op, alpha), N)
    residuals, defect = [], False
    for target in _random_targets(alpha.kind, indexing, RANDOM_TARGETS, seed):
        result = solve(op, alpha, target, N, config=config)
        residuals.append(result.residual)
        if result.residual > DEFECT_RELATIVE_TOL * vector_norm(target) or result.diverging:
            defect = True
    return defect, residuals


def residual_point_duality(op: OperatorExpr, alpha: AlgebraElement, N: int | None = None,
                           config: SpectraConfig = DEFAULT_CONFIG, seed: int = 0) -> bool:
    """For F - alpha bounded below: not surjective iff alpha* has a kernel vector for F*."""
    N = N or config.truncation
    report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=config)
    if report.trend is not Trend.BOUNDED_BELOW:
        raise PreconditionNotCertified("the oracle could not certify F - alpha bounded below",
                                       oracle=report.to_dict())
    candidates = kernel_search(adjoint(op), star(alpha), N, config=config)
    defect, residuals = _surjectivity_defect(op, alpha, config, N, seed)
    logger.debug("residual duality: %d adjoint kernel candidates, defect=%s residuals=%s",
                 len(candidates), defect, residuals)
    return bool(candidates) == defect


def approx_point_membership(op: OperatorExpr, alpha: AlgebraElement,
                            config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """alpha is in the approximate point spectrum iff F - alpha is not bounded below."""
    report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=config)
    oracle = Certificate(CertificateKind.ORACLE, oracle=report)
    if report.trend is Trend.SINGULAR:
        return SpectrumVerdict(Membership.IN, SpectrumPart.APPROX_POINT, oracle, "oracle:approx-point")
    if report.trend is Trend.BOUNDED_BELOW:
        bound = report.bound if report.bound is not None else report.extrapolated_bound
        certificate = Certificate(CertificateKind.BOUND, bound=bound, oracle=report)
        return SpectrumVerdict(Membership.OUT, SpectrumPart.APPROX_POINT, certificate, "oracle:approx-point")
    return SpectrumVerdict(Membership.BOUNDARY_INDETERMINATE, SpectrumPart.APPROX_POINT, oracle,
                           "oracle:approx-point")


def bounded_below_implies_invertible(op: OperatorExpr, alpha: AlgebraElement,
                                     config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """Over a commutative A a self-adjoint F with F - alpha bounded below is invertible."""
    _require_commutative(alpha, "bounded below implies invertible only over a commutative algebra")
    _require_self_adjoint(op, alpha)
    report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=config)
    if report.verdict is OracleVerdict.CERTIFIED:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=report.bound, oracle=report),
                               "bounded-below:invertible")
    oracle = Certificate(CertificateKind.ORACLE, oracle=report)
    if report.trend is Trend.SINGULAR:
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, oracle, "oracle-deferred")
    return SpectrumVerdict(Membership.BOUNDARY_INDETERMINATE, SpectrumPart.FULL, oracle, "oracle-deferred")


def normal_residual_empty_check(op: OperatorExpr, alpha: AlgebraElement,
                                config: SpectraConfig = DEFAULT_CONFIG, seed: int = 0) -> bool:
    """For normal F over a commutative A, bounded below implies surjective."""
    _require_commutative(alpha, "S is in the residual spectrum of P.I over B(H): "
                                "the residual part is empty only over a commutative algebra")
    if not is_normal(op, kind=alpha.kind):
        raise NotNormal("the operator is not normal")
    report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=config)
    if report.trend is not Trend.BOUNDED_BELOW:
        return True
    N = config.truncation
    indexing = indexing_for(shifted(op, alpha), N)
    for target in _random_targets(alpha.kind, indexing, RANDOM_TARGETS, seed):
        result = solve(op, alpha, target, N, config=config)
        if result.residual > SOLVE_RESIDUAL_TOL * (1.0 + vector_norm(target)):
            logger.debug("normal residual check: solve residual %g", result.residual)
            return False
    return True


# =============================================================================
# Unitary and bilateral shift
# =============================================================================

def unitary_norm_screen(alpha: AlgebraElement, config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """The spectrum of any unitary lies in {||alpha|| >= 1, ||alpha^-1|| >= 1}."""
    band = config.boundary_band
    size = norm(alpha)
    if size < 1.0 - band:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=1.0 - size), "unitary-screen:norm")
    try:
        inverse_size = norm(try_invert(alpha, config.tolerances))
    except NotInvertible:
        inverse_size = None
    if inverse_size is not None and inverse_size < 1.0 - band:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=1.0 / inverse_size - 1.0),
                               "unitary-screen:inverse-norm")
    return SpectrumVerdict(Membership.INCONCLUSIVE, SpectrumPart.FULL,
                           _none("the screen needs the specific unitary to decide"), "unitary-screen:norm")


def bilateral_shift_spectrum(f: AlgebraElement, config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """sigma(V): |f| takes the value 1 (continuous), or comes within the band of 1 on a cell (step).

    The step case reads "for every eps > 0" at the single scale eps = boundary_band.
    """
    _require_function_kind(f, "the bilateral shift rule")
    band = config.boundary_band
    values = np.abs(refined_values(f))
    if isinstance(f.kind, ContinuousFunctions):
        lo, hi = float(values.min()), float(values.max())
        notes = {"range": [lo, hi]}
        if lo <= 1.0 + band and hi >= 1.0 - band:
            return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                                   _none("|f| attains 1: alpha I - V is not surjective"),
                                   "bilateral-shift:range", notes)
        bound = 1.0 - hi if hi < 1.0 - band else lo - 1.0
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=bound), "bilateral-shift:range", notes)

    distance = float(np.abs(values - 1.0).min())
    notes = {"cell_distance": distance}
    if distance <= band:
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                               _none("|f| is within the band of 1 on a cell"), "bilateral-shift:cell", notes)
    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                           Certificate(CertificateKind.BOUND, bound=distance), "bilateral-shift:cell", notes)


def bilateral_shift_point_spectrum(f: AlgebraElement,
                                   config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    _require_function_kind(f, "the point spectrum of V")
    return SpectrumVerdict(Membership.OUT, SpectrumPart.POINT,
                           _none("fiberwise the classical bilateral shift has no eigenvectors"),
                           "bilateral-shift:point-empty")


def diagonal_unitary_spectrum(beta: AlgebraElement, alphas: Sequence[AlgebraElement],
                              config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """beta is in the spectrum iff beta - alpha_k is singular for some k of the cycle."""
    alphas = tuple(alphas)
    for alpha in alphas:
        if alpha.kind != beta.kind:
            raise KindMismatch(f"diagonal entry over {alpha.kind} against beta over {beta.kind}")
    op = DiagonalUnitary(alphas)
    size = norm(beta)
    notes: dict[str, Any] = {"norm_beta": size}
    N = max(config.truncation, 2 * len(alphas))

    bounds = []
    for k, alpha in enumerate(alphas, start=1):
        difference = sub(beta, alpha)
        basis = right_annihilator_basis(difference, config.tolerances)
        if basis:
            x = basis_vector(k, beta.kind, Natural(N), basis[0])
            certificate = _verified_kernel(op, beta, x, "diagonal unitary")
            if size > 1.0:
                notes["norm_exceeds_one"] = True
            notes["index"] = k
            return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate,
                                   "diagonal-unitary:annihilator", notes)
        try:
            bounds.append(1.0 / norm(try_invert(difference, config.tolerances)))
        except NotInvertible:
            notes["index"] = k
            if size > 1.0:
                notes["norm_exceeds_one"] = True
            return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                                   _none(f"beta - alpha_{k} is not right invertible"),
                                   "diagonal-unitary:not-invertible", notes)

    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                           Certificate(CertificateKind.BOUND, bound=min(bounds)),
                           "diagonal-unitary:invertible", notes)


# =============================================================================
# Self-adjoint and normal operators
# =============================================================================

def selfadjoint_point_star_transfer(op: OperatorExpr, alpha: AlgebraElement, x: ModuleVector,
                                    config: SpectraConfig = DEFAULT_CONFIG) -> bool:
    """Does the kernel vector x for alpha also witness alpha*?"""
    _require_commutative(alpha, "the star transfer of point spectra needs a commutative algebra")
    _require_self_adjoint(op, alpha)
    residual = vector_norm(apply(shifted(op, alpha), x))
    if residual > KERNEL_RESIDUAL_TOL:
        raise PreconditionFailed(f"x is not a kernel vector for alpha (residual {residual:.3g})",
                                 residual=residual)
    return vector_norm(apply(shifted(op, star(alpha)), x)) <= STAR_TRANSFER_TOL


def skew_resolvent_bound(op: OperatorExpr, alpha: AlgebraElement,
                         config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """||(F - alpha)^-1|| <= 2 ||(alpha - alpha*)^-1|| for self-adjoint F over a commutative A."""
    if isinstance(alpha.kind, MatrixAlgebra):
        raise NotCommutative("the skew bound fails over M_2: T1 = [[2,1],[1,0]] and "
                             "T2 = [[0,i],[i,i]] give T2 - T2* invertible but T1 - T2 singular")
    _require_self_adjoint(op, alpha)
    try:
        skew_inverse = try_invert(sub(alpha, star(alpha)), config.tolerances)
    except NotInvertible as e:
        raise SkewPartNotInvertible("alpha - alpha* is not invertible; the bound needs it",
                                    inf_abs=e.inf_abs) from e

    bound = 1.0 / (2.0 * norm(skew_inverse))
    report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=config)
    observed = min(report.sv_min)
    if observed < bound - SKEW_CROSS_CHECK_SLACK:
        raise WitnessCheckFailed(f"oracle sigma_min {observed:.6g} is below the skew bound {bound:.6g}",
                                 bound=bound, sv_min=observed)
    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                           Certificate(CertificateKind.BOUND, bound=bound, oracle=report),
                           "skew-bound", {"oracle_sv_min": observed})


def selfadjoint_spectrum_envelope(op: OperatorExpr, alpha: AlgebraElement,
                                  config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """sigma(F) lies in {alpha : |alpha| meets [m, M]}; only the Out side is decided.

    The step case follows the contrapositive of the inclusion: no cell within
    the band of [m, M] means Out.
    """
    _require_function_kind(alpha, "the self-adjoint envelope")
    bounds = self_adjoint_bounds(op, kind=alpha.kind, config=config)
    if bounds.method is not BoundsMethod.CLOSED_FORM_DIAGONAL:
        raise BoundsNotClosedForm("m(F) and M(F) are not known in closed form for this operator",
                                  bounds=bounds.to_dict())
    m, M = bounds.m_lower, bounds.M_upper
    band = config.boundary_band
    values = np.abs(refined_values(alpha))
    notes = {"m": m, "M": M}

    if isinstance(alpha.kind, ContinuousFunctions):
        lo, hi = float(values.min()), float(values.max())
        meets = lo <= M + band and hi >= m - band
    else:
        meets = bool(np.any((values >= m - band) & (values <= M + band)))
    if meets:
        return SpectrumVerdict(Membership.INCONCLUSIVE, SpectrumPart.FULL,
                               _none("|alpha| meets [m, M]; the envelope is an inclusion"),
                               "self-adjoint-envelope", notes)
    distance = float(np.min(np.maximum(np.maximum(m - values, values - M), 0.0)))
    return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                           Certificate(CertificateKind.BOUND, bound=distance), "self-adjoint-envelope", notes)


def normal_kernel_orthogonality(op: OperatorExpr, alpha1: AlgebraElement, alpha2: AlgebraElement,
                                x1: ModuleVector, x2: ModuleVector,
                                config: SpectraConfig = DEFAULT_CONFIG) -> bool:
    """Kernels of F - alpha1 and F - alpha2 are orthogonal when alpha1 - alpha2 is invertible."""
    _require_commutative(alpha1, "kernels of a normal operator need not be orthogonal over a "
                                 "non-commutative algebra (skew projections give a counterexample)")
    if not is_normal(op, kind=alpha1.kind):
        raise NotNormal("the operator is not normal")
    for alpha, x in ((alpha1, x1), (alpha2, x2)):
        residual = vector_norm(apply(shifted(op, alpha), x))
        if residual > KERNEL_RESIDUAL_TOL:
            raise PreconditionFailed(f"not a kernel vector (residual {residual:.3g})", residual=residual)
    try:
        try_invert(sub(alpha1, alpha2), config.tolerances)
    except NotInvertible as e:
        raise DifferenceNotInvertible("alpha1 - alpha2 is not invertible in A",
                                      pairing=norm(inner_product(x1, x2))) from e
    return is_orthogonal(x1, x2, ORTHOGONALITY_TOL)


# =============================================================================
# Expanders and compressors
# =============================================================================

def _require_expander_kind(opkind: ExpanderKind, alpha: AlgebraElement):
    if opkind.is_block:
        _require_step_kind(alpha, f"the block operator {opkind.value}")
    else:
        _require_function_kind(alpha, f"the operator {opkind.value}")


def _compressor_kernel(opkind: ExpanderKind, beta: AlgebraElement, N: int) -> ModuleVector | None:
    """Geometric kernel vector of (Z, Z' or D) - beta on {|beta| < 1}.

    Z: x_{2^j} = chi beta^j. Z': x_{r_k} = chi beta^(k-1). D uses the Z'
    ladder on the left half and the Z ladder on the right half.
    """
    kind = beta.kind
    match opkind:
        case ExpanderKind.Z:
            chi = _contraction_mask(beta)
            return None if chi is None else _ladder(kind, N, _dyadic_indices(N), beta.data, chi)
        case ExpanderKind.Z_PRIME:
            chi = _contraction_mask(beta)
            return None if chi is None else _ladder(kind, N, _odd_ladder_indices(N), beta.data, chi)
        case ExpanderKind.D:
            left = _cells_left(kind)
            chi = _contraction_mask(beta)
            if chi is None:
                return None
            x = _ladder(kind, N, _dyadic_indices(N), beta.data, chi & ~left)
            return x + _ladder(kind, N, _odd_ladder_indices(N), beta.data, chi & left)
    raise ValueError(f"{opkind.value} has no geometric kernel ladder")


def _unit_coincidence(beta: AlgebraElement, N: int, config: SpectraConfig,
                      left_only: bool = False) -> ModuleVector | None:
    """(chi_M, 0, 0, ...) with M = {beta = 1} at grid scale."""
    chi = interval_indicator(beta, lambda values: np.abs(values - 1.0) <= config.eq_tol)
    if chi is None:
        return None
    mask = chi.data.real > 0
    if left_only:
        mask &= _cells_left(beta.kind)
        if not mask.any():
            return None
    return basis_vector(1, beta.kind, Natural(N), AlgebraElement(beta.kind, mask.astype(float)))


EXPANDER_ADJOINTS = {
    ExpanderKind.W_PRIME: ExpanderKind.Z,
    ExpanderKind.W_DOUBLE_PRIME: ExpanderKind.Z_PRIME,
    ExpanderKind.F: ExpanderKind.D,
}


def expander_spectra(opkind: ExpanderKind | str, alpha: AlgebraElement,
                     config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """Every member of the family has sigma = {alpha : inf|alpha| <= 1}."""
    opkind = ExpanderKind(opkind)
    _require_expander_kind(opkind, alpha)
    band = config.boundary_band
    value = inf_abs(alpha)
    rule = f"expander:{opkind.value}"
    notes = {"inf_abs": value}

    if value > 1.0 + band:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.FULL,
                               Certificate(CertificateKind.BOUND, bound=value - 1.0), rule, notes)
    if value >= 1.0 - band:
        return SpectrumVerdict(Membership.IN, SpectrumPart.FULL,
                               _none("boundary point: the spectrum is closed"), rule, notes)

    N = config.witness_depth
    op = expander_operator(opkind, alpha.kind)
    if opkind in EXPANDER_ADJOINTS:
        x = _compressor_kernel(EXPANDER_ADJOINTS[opkind], star(alpha), N)
        certificate = _none(OFF_GRID_REASON) if x is None else _verified_cokernel(op, alpha, x, opkind.value)
    else:
        x = _compressor_kernel(opkind, alpha, N)
        certificate = _none(OFF_GRID_REASON) if x is None else _verified_kernel(op, alpha, x, opkind.value)
    return SpectrumVerdict(Membership.IN, SpectrumPart.FULL, certificate, rule, notes)


def expander_point_spectra(opkind: ExpanderKind | str, alpha: AlgebraElement,
                           config: SpectraConfig = DEFAULT_CONFIG) -> SpectrumVerdict:
    """Point spectra of the family, each In verdict with a verified kernel witness."""
    opkind = ExpanderKind(opkind)
    _require_expander_kind(opkind, alpha)
    band = config.boundary_band
    value = inf_abs(alpha)
    N = config.witness_depth
    op = expander_operator(opkind, alpha.kind)
    rule = f"expander-point:{opkind.value}"
    notes = {"inf_abs": value}

    def inside(x: ModuleVector, reason: str) -> SpectrumVerdict:
        certificate = _verified_kernel(op, alpha, x, opkind.value)
        return SpectrumVerdict(Membership.IN, SpectrumPart.POINT, certificate, rule, {**notes, "case": reason})

    def outside(reason: str) -> SpectrumVerdict:
        return SpectrumVerdict(Membership.OUT, SpectrumPart.POINT, _none(reason), rule, notes)

    has_ladder = opkind in (ExpanderKind.Z, ExpanderKind.Z_PRIME, ExpanderKind.D)
    if has_ladder and value < 1.0 - band:
        if (x := _compressor_kernel(opkind, alpha, N)) is None:
            return SpectrumVerdict(Membership.IN, SpectrumPart.POINT, _none(OFF_GRID_REASON), rule,
                                   {**notes, "case": "inf|alpha| < 1"})
        return inside(x, "inf|alpha| < 1")

    if opkind in (ExpanderKind.W_DOUBLE_PRIME, ExpanderKind.Z_PRIME, ExpanderKind.F, ExpanderKind.D):
        left_only = opkind.is_block
        if (x := _unit_coincidence(alpha, N, config, left_only)) is not None:
            return inside(x, "alpha = 1 on a set of positive measure")

    if has_ladder and abs(value - 1.0) <= band:
        return SpectrumVerdict(Membership.BOUNDARY_INDETERMINATE, SpectrumPart.POINT,
                               _none("inf|alpha| is within the band of 1"), rule, notes)
    return outside("kernel recursion forces x = 0")


# =============================================================================
# Star duality
# =============================================================================

class DualityPair(str, Enum):
    SHIFT = "S"
    DYADIC = "W'/Z"
    ODD = "W''/Z'"


def spectrum_star_duality_check(pair: DualityPair | str, alpha: AlgebraElement,
                                config: SpectraConfig = DEFAULT_CONFIG) -> bool:
    """membership(alpha, F) == membership(alpha*, F*)."""
    pair = DualityPair(pair)
    conjugate = star(alpha)
    match pair:
        case DualityPair.SHIFT:
            first = unilateral_shift_spectrum(alpha, config)
            second = adjoint_shift_spectrum(conjugate, config)
        case DualityPair.DYADIC:
            first = expander_spectra(ExpanderKind.W_PRIME, alpha, config)
            second = expander_spectra(ExpanderKind.Z, conjugate, config)
        case _:
            first = expander_spectra(ExpanderKind.W_DOUBLE_PRIME, alpha, config)
            second = expander_spectra(ExpanderKind.Z_PRIME, conjugate, config)
    return first.membership == second.membership
