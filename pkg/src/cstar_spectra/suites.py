"""
Verification suites: named panels that compare the closed-form rules against
the truncation oracle and re-check every witness.

A suite is a generator of Case objects. Each case carries the query document
that reproduces it through ``cstar-spectra check`` and a check callable that
returns None on success or a failure message.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable, Iterator

import numpy as np

from .algebra import (
    AlgebraElement,
    AlgebraKind,
    ContinuousFunctions,
    EssentiallyBounded,
    GridSpec,
    MatrixAlgebra,
    indicator,
    inf_abs,
    make_element,
    mul,
    norm,
    refined_values,
    scalar,
    scalar_kind,
    star,
    sub,
    unit,
)
from .config import DEFAULT_CONFIG, SpectraConfig
from .errors import (
    BoundsNotClosedForm,
    DifferenceNotInvertible,
    NotCommutative,
    SkewPartNotInvertible,
    SpectraError,
    UnknownSuite,
)
from .literals import element_to_literal, kind_to_spec, operator_to_literal
from .module import Growth, Integers, ModuleVector, Natural, basis_vector, inner_product
from .operators import (
    BilateralShift,
    DiagonalSelfAdjoint,
    DiagonalUnitary,
    ExpanderKind,
    OperatorExpr,
    ScalarMult,
    Sum,
    UnilateralShift,
    adjoint,
    block_shift,
    expander_operator,
)
from .oracle import (
    Section,
    Trend,
    bounded_below_ladder,
    invertibility_verdict,
    kernel_search,
    solve,
)
from .spectra import (
    KERNEL_RESIDUAL_TOL,
    PAIRING_TOL,
    CertificateKind,
    DualityPair,
    Membership,
    adjoint_shift_spectrum,
    approx_point_membership,
    bilateral_shift_spectrum,
    block_shift_spectrum,
    diagonal_unitary_spectrum,
    expander_point_spectra,
    expander_spectra,
    mn_shift_spectrum,
    normal_kernel_orthogonality,
    normal_residual_empty_check,
    residual_point_duality,
    selfadjoint_point_star_transfer,
    selfadjoint_spectrum_envelope,
    shift_resolvent_solution,
    skew_resolvent_bound,
    spectrum_star_duality_check,
    unilateral_shift_spectrum,
    weighted_shift_kernel_witness,
)

logger = logging.getLogger(__name__)

# The M_2 pair for which the skew bound fails
T1 = [[2, 1], [1, 0]]
T2 = [[0, 1j], [1j, 1j]]


# =============================================================================
# Scale and results
# =============================================================================

@dataclass(frozen=True)
class Scale:
    name: str
    resolution: int
    margin: float
    kernel_depth: int
    cases: dict[str, int]


SCALES = {
    "small": Scale("small", 32, 0.1, 128, {
        "scalar-reduction": 200, "prop-shift": 12, "lemma-resolvent": 20, "mn-shift": 60,
        "weighted-shift": 20, "block-shift": 12, "cor-skew-bound": 10, "cor-envelope": 20,
        "ex-expanders": 4, "prop-bilateral": 20, "star-duality": 100, "unitary-conjugation": 6,
    }),
    "full": Scale("full", 256, 0.05, 256, {
        "scalar-reduction": 1000, "prop-shift": 200, "lemma-resolvent": 100, "mn-shift": 200,
        "weighted-shift": 100, "block-shift": 100, "cor-skew-bound": 50, "cor-envelope": 200,
        "ex-expanders": 100, "prop-bilateral": 200, "star-duality": 500, "unitary-conjugation": 40,
    }),
}


@dataclass(frozen=True)
class Case:
    case_id: str
    query: dict[str, Any]
    check: Callable[[], str | None]


@dataclass
class SuiteResult:
    suite: str
    seed: int
    scale: str
    cases: int = 0
    failures: list[dict[str, Any]] = field(default_factory=list)
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self, include_time: bool = True) -> dict[str, Any]:
        payload = {
            "suite": self.suite,
            "seed": self.seed,
            "scale": self.scale,
            "cases": self.cases,
            "passed": self.passed,
            "failures": sorted(self.failures, key=lambda f: f["case"]),
        }
        if include_time:
            payload["wall_time"] = round(self.wall_time, 3)
        return payload


@dataclass(frozen=True)
class Context:
    rng: np.random.Generator
    scale: Scale
    config: SpectraConfig

    def count(self, suite: str) -> int:
        return self.scale.cases[suite]

    def continuous(self) -> ContinuousFunctions:
        return ContinuousFunctions(GridSpec(self.scale.resolution))

    def step(self) -> EssentiallyBounded:
        return EssentiallyBounded(GridSpec(self.scale.resolution))

    def function_kind(self, i: int) -> AlgebraKind:
        return self.step() if i % 2 else self.continuous()


# =============================================================================
# Query documents and random elements
# =============================================================================

def query(operator: str | OperatorExpr, alpha: AlgebraElement, question: str = "full",
          **extra: Any) -> dict[str, Any]:
    """A document that `cstar-spectra check` accepts."""
    document: dict[str, Any] = {
        "algebra": kind_to_spec(alpha.kind),
        "element": element_to_literal(alpha),
        "operator": operator if isinstance(operator, str) else operator_to_literal(operator),
        "question": question,
    }
    for key, value in extra.items():
        if isinstance(value, AlgebraElement):
            value = element_to_literal(value)
        elif isinstance(value, (list, tuple)):
            value = [element_to_literal(v) if isinstance(v, AlgebraElement) else v for v in value]
        document[key] = value
    return document


def random_profile(rng: np.random.Generator, kind: AlgebraKind) -> np.ndarray:
    """Nonvanishing complex values: a few smooth modes over a dominant offset."""
    R = kind.grid.resolution
    if isinstance(kind, EssentiallyBounded):
        return rng.uniform(1.0, 3.0, R) * np.exp(2j * np.pi * rng.uniform(size=R))
    t = kind.sample_points()
    modes = rng.normal(size=3) + 1j * rng.normal(size=3)
    phases = rng.uniform(0.0, 2.0 * np.pi, 3)
    wave = sum(m * np.cos(2.0 * np.pi * (j + 1) * t + p) for j, (m, p) in enumerate(zip(modes, phases)))
    offset = (1.5 * np.abs(modes).sum() + 0.5) * np.exp(2j * np.pi * rng.uniform())
    return offset + wave


def random_element(rng: np.random.Generator, kind: AlgebraKind, target_inf: float) -> AlgebraElement:
    """Random element with inf|alpha| exactly target_inf."""
    alpha = make_element(kind, random_profile(rng, kind))
    return make_element(kind, alpha.data * (target_inf / inf_abs(alpha)))


def random_real(rng: np.random.Generator, kind: ContinuousFunctions, lower: float, upper: float) -> AlgebraElement:
    """Smooth real function with values in [lower, upper]."""
    t = kind.sample_points()
    wave = np.cos(2.0 * np.pi * rng.integers(1, 4) * t + rng.uniform(0.0, 2.0 * np.pi))
    return make_element(kind, lower + (upper - lower) * (wave + 1.0) / 2.0)


def panel_target(rng: np.random.Generator, inside: bool, margin: float) -> float:
    return float(rng.uniform(0.3, 1.0 - margin) if inside else rng.uniform(1.0 + margin, 2.0))


def _expect(condition: bool, message: str) -> str | None:
    return None if condition else message


def _first(*messages: str | None) -> str | None:
    return next((m for m in messages if m is not None), None)


def _oracle_agrees(report, inside: bool) -> str | None:
    singular = report.trend is Trend.SINGULAR
    return _expect(singular == inside,
                   f"oracle trend {report.trend.value} (sv_min {list(report.sv_min)}) "
                   f"against predicate {'In' if inside else 'Out'}")


# =============================================================================
# Suites
# =============================================================================

def scalar_reduction(ctx: Context) -> Iterator[Case]:
    kind = scalar_kind()
    for i in range(ctx.count("scalar-reduction")):
        radius = float(ctx.rng.uniform(0.0, 2.0))
        while abs(radius - 1.0) <= 1e-3:
            radius = float(ctx.rng.uniform(0.0, 2.0))
        alpha = scalar(kind, radius * np.exp(2j * np.pi * ctx.rng.uniform()))

        def check(alpha=alpha, radius=radius):
            inside = radius <= 1.0
            first = unilateral_shift_spectrum(alpha, ctx.config).membership
            second = bilateral_shift_spectrum(alpha, ctx.config).membership
            expected_v = Membership.IN if abs(radius - 1.0) <= ctx.config.boundary_band else Membership.OUT
            return _first(
                _expect(first == (Membership.IN if inside else Membership.OUT), f"S verdict {first.value}"),
                _expect(second == expected_v, f"V verdict {second.value}"),
            )

        yield Case(f"alpha-{i:04d}", query("S", alpha), check)


def prop_shift(ctx: Context) -> Iterator[Case]:
    op = UnilateralShift()
    for i in range(ctx.count("prop-shift")):
        inside = i % 2 == 0
        target = panel_target(ctx.rng, inside, ctx.scale.margin)
        alpha = random_element(ctx.rng, ctx.function_kind(i // 2), target)

        def check(alpha=alpha, inside=inside, target=target):
            verdict = unilateral_shift_spectrum(alpha, ctx.config)
            certificate = verdict.certificate
            witness = None
            if inside and target < 0.95:
                witness = _expect(certificate.kind is CertificateKind.COKERNEL
                                  and certificate.max_pairing <= PAIRING_TOL,
                                  f"cokernel witness missing or pairing {certificate.max_pairing}")
            kernels = kernel_search(op, alpha, config=ctx.config)
            return _first(
                _expect(verdict.membership == (Membership.IN if inside else Membership.OUT),
                        f"verdict {verdict.membership.value}"),
                witness,
                _oracle_agrees(invertibility_verdict(op, alpha, ctx.config), inside),
                _expect(not kernels, f"{len(kernels)} interior kernel candidates for S"),
            )

        yield Case(f"panel-{i:04d}", query("S", alpha, cross_check=True), check)


def lemma_resolvent(ctx: Context) -> Iterator[Case]:
    for i in range(ctx.count("lemma-resolvent")):
        alpha = random_element(ctx.rng, ctx.function_kind(i), float(ctx.rng.uniform(1.05 + 1e-3, 2.5)))
        k = int(ctx.rng.integers(1, 9))

        def check(alpha=alpha, k=k):
            certificate = shift_resolvent_solution(alpha, k, N=64, config=ctx.config)
            return _first(
                _expect(certificate.residual <= KERNEL_RESIDUAL_TOL, f"residual {certificate.residual:.3g}"),
                _expect(certificate.growth.verdict is Growth.CONVERGING,
                        f"growth {certificate.growth.verdict.value}"),
            )

        yield Case(f"invertible-{i:04d}", query("S", alpha, "resolvent", index=k), check)

    one = unit(ctx.continuous())

    def check_unit():
        certificate = shift_resolvent_solution(one, 1, N=64, config=ctx.config)
        return _expect(certificate.growth.verdict is Growth.DIVERGING,
                       f"growth for alpha = 1 is {certificate.growth.verdict.value}")

    yield Case("unit", query("S", one, "resolvent", index=1), check_unit)


def mn_shift(ctx: Context) -> Iterator[Case]:
    band = ctx.config.boundary_band
    for i in range(ctx.count("mn-shift")):
        n = 2 + i % 2
        while True:
            T = (ctx.rng.normal(size=(n, n)) + 1j * ctx.rng.normal(size=(n, n))) * ctx.rng.uniform(0.3, 1.5)
            smallest = float(np.abs(np.linalg.eigvals(T)).min())
            if abs(smallest - 1.0) > 1e-3:
                break
        element = make_element(MatrixAlgebra(n), T)

        def check(element=element, smallest=smallest):
            verdict = mn_shift_spectrum(element, ctx.config)
            expected = Membership.IN if smallest <= 1.0 + band else Membership.OUT
            return _expect(verdict.membership == expected,
                           f"verdict {verdict.membership.value} with min |eigenvalue| {smallest:.6g}")

        yield Case(f"matrix-{i:04d}", query("S", element), check)

    singular = make_element(MatrixAlgebra(2), [[1, 2], [2, 4]])
    yield Case("singular", query("S", singular),
               lambda: _expect(mn_shift_spectrum(singular, ctx.config).membership == Membership.IN,
                               "singular T classified Out"))


def weighted_shift(ctx: Context) -> Iterator[Case]:
    kind = ctx.step()
    right = indicator(kind, 0.5, 1.0)

    def example(alpha, weights, j, expected):
        def check():
            verdict = weighted_shift_kernel_witness(alpha, weights, j, ctx.config)
            message = _expect(verdict.membership == expected, f"verdict {verdict.membership.value}")
            if message is None and expected == Membership.IN:
                gamma = verdict.certificate.vector.entry(j)
                message = _first(
                    _expect(verdict.certificate.residual <= KERNEL_RESIDUAL_TOL, "residual too large"),
                    _expect(norm(mul(alpha, gamma)) <= 1e-9, "alpha gamma != 0"),
                    _expect(norm(gamma) > 0.0, "gamma is zero"),
                )
            return message
        return check

    for j in (1, 2, 3):
        yield Case(f"indicator-j{j}", query("weighted", right, "kernel", weights=[right], index=j),
                   example(right, (right,), j, Membership.IN))
    one = unit(kind)
    yield Case("unit", query("weighted", one, "kernel", weights=[right], index=1),
               example(one, (right,), 1, Membership.OUT))
    E11 = make_element(MatrixAlgebra(2), [[1, 0], [0, 0]])
    yield Case("matrix-e11", query("weighted", E11, "kernel", weights=[E11], index=1),
               example(E11, (E11,), 1, Membership.IN))

    R = kind.grid.resolution
    for i in range(ctx.count("weighted-shift")):
        count = int(ctx.rng.integers(1, 4))
        j = int(ctx.rng.integers(1, 7))

        def sparse(probability):
            values = ctx.rng.uniform(0.5, 2.0, R) * np.exp(2j * np.pi * ctx.rng.uniform(size=R))
            values[ctx.rng.uniform(size=R) < probability] = 0.0
            return make_element(kind, values)

        alpha = sparse(0.3)
        weights = tuple(sparse(0.3) for _ in range(count))
        w_j = weights[(j - 1) % count]
        common = bool(np.any((alpha.data == 0) & (w_j.data == 0)))
        expected = Membership.IN if common else Membership.OUT
        yield Case(f"panel-{i:04d}", query("weighted", alpha, "kernel", weights=list(weights), index=j),
                   example(alpha, weights, j, expected))


def block_shift_suite(ctx: Context) -> Iterator[Case]:
    kind = ctx.step()
    op = block_shift(kind)
    left = kind.sample_points() < 0.5
    margin = ctx.scale.margin

    def case(alpha, expected, rule=None, oracle=True):
        def check():
            verdict = block_shift_spectrum(alpha, ctx.config)
            return _first(
                _expect(verdict.membership == expected, f"verdict {verdict.membership.value}"),
                _expect(rule is None or verdict.rule == rule, f"rule {verdict.rule}"),
                _oracle_agrees(invertibility_verdict(op, alpha, ctx.config), expected == Membership.IN)
                if oracle else None,
            )
        return check

    half = scalar(kind, 0.5)
    yield Case("half", query("S~", half), case(half, Membership.IN, "block-shift:right-block"))
    unit_left = make_element(kind, np.where(left, 1.0, 3.0))
    yield Case("unit-left", query("S~", unit_left), case(unit_left, Membership.IN, "block-shift:left-unit"))
    three = scalar(kind, 3.0)
    yield Case("three", query("S~", three), case(three, Membership.OUT, "block-shift:blocks"))

    for i in range(ctx.count("block-shift")):
        inside = i % 2 == 0
        values = random_profile(ctx.rng, kind)
        right_inf = float(np.abs(values[~left]).min())
        values[~left] *= panel_target(ctx.rng, inside, margin) / right_inf
        far = np.abs(values[left] - 1.0) < margin
        values[left] = np.where(far, 1.0 + 2.0 * margin, values[left])
        alpha = make_element(kind, values)
        expected = Membership.IN if inside else Membership.OUT
        yield Case(f"panel-{i:04d}", query("S~", alpha, cross_check=True), case(alpha, expected))


def cor_skew_bound(ctx: Context) -> Iterator[Case]:
    kind = ctx.continuous()
    for i in range(ctx.count("cor-skew-bound")):
        op = DiagonalSelfAdjoint((random_real(ctx.rng, kind, 0.5, 2.0), random_real(ctx.rng, kind, 0.2, 3.0)))
        sign = 1.0 if i % 2 else -1.0
        real = random_real(ctx.rng, kind, -2.0, 2.0)
        imaginary = random_real(ctx.rng, kind, 0.05, 0.6)
        alpha = make_element(kind, real.data + 1j * sign * imaginary.data)

        def check(op=op, alpha=alpha):
            verdict = skew_resolvent_bound(op, alpha, ctx.config)
            report = bounded_below_ladder(op, alpha, section=Section.RECTANGULAR, config=ctx.config)
            bound = verdict.certificate.bound
            return _expect(min(report.sv_min) >= bound - 1e-6,
                           f"sigma_min {min(report.sv_min):.6g} below the bound {bound:.6g}")

        yield Case(f"panel-{i:04d}", query(op, alpha, "skew-bound"), check)


def ex_m2_counterexample(ctx: Context) -> Iterator[Case]:
    kind = MatrixAlgebra(2)
    first, second = make_element(kind, T1), make_element(kind, T2)
    op = ScalarMult(first)

    def skew_invertible():
        return _expect(inf_abs(sub(second, star(second))) > 1e-6, "T2 - T2* is singular")

    def difference_singular():
        det = abs(np.linalg.det(sub(first, second).data))
        return _expect(det <= 1e-12, f"|det(T1 - T2)| = {det:.3g}")

    def bound_rejected():
        try:
            skew_resolvent_bound(op, second, ctx.config)
        except NotCommutative:
            return None
        return "skew bound accepted over M_2"

    def oracle_singular():
        report = invertibility_verdict(op, second, ctx.config)
        return _expect(report.trend is Trend.SINGULAR, f"oracle trend {report.trend.value}")

    document = query(op, second, "skew-bound")
    yield Case("skew-invertible", document, skew_invertible)
    yield Case("difference-singular", document, difference_singular)
    yield Case("bound-rejected", document, bound_rejected)
    yield Case("oracle-singular", document, oracle_singular)


def cor_envelope(ctx: Context) -> Iterator[Case]:
    kind = ctx.continuous()
    t = kind.sample_points()
    op = DiagonalSelfAdjoint((make_element(kind, 1.0 + t),))
    for i in range(ctx.count("cor-envelope")):
        alpha = make_element(kind, random_profile(ctx.rng, kind))
        if i % 2:
            alpha = make_element(kind, alpha.data * (ctx.rng.uniform(0.2, 0.94) / norm(alpha)))
        else:
            alpha = make_element(kind, alpha.data * (ctx.rng.uniform(2.06, 3.0) / inf_abs(alpha)))

        def check(alpha=alpha):
            verdict = selfadjoint_spectrum_envelope(op, alpha, ctx.config)
            report = invertibility_verdict(op, alpha, ctx.config)
            return _first(
                _expect(verdict.membership == Membership.OUT and verdict.certificate.bound > 0.0,
                        f"verdict {verdict.membership.value}"),
                _expect(report.trend is Trend.BOUNDED_BELOW, f"oracle trend {report.trend.value}"),
            )

        yield Case(f"panel-{i:04d}", query(op, alpha, "envelope", cross_check=True), check)

    middle = scalar(kind, 1.5)
    yield Case("inside-envelope", query(op, middle, "envelope"),
               lambda: _expect(selfadjoint_spectrum_envelope(op, middle, ctx.config).membership
                               == Membership.INCONCLUSIVE, "alpha = 1.5 was decided"))

    symmetric = Sum(UnilateralShift(), adjoint(UnilateralShift()))

    def not_closed_form():
        try:
            selfadjoint_spectrum_envelope(symmetric, scalar(kind, 3.0), ctx.config)
        except BoundsNotClosedForm:
            return None
        return "S + S* envelope was decided without closed-form bounds"

    yield Case("no-closed-form", query(symmetric, scalar(kind, 3.0), "envelope"), not_closed_form)


def ex_expanders(ctx: Context) -> Iterator[Case]:
    margin = ctx.scale.margin
    for opkind in ExpanderKind:
        for i in range(ctx.count("ex-expanders")):
            inside = i % 2 == 0
            kind = ctx.step() if opkind.is_block else ctx.function_kind(i // 2)
            target = panel_target(ctx.rng, inside, margin)
            alpha = random_element(ctx.rng, kind, target)

            def check(opkind=opkind, alpha=alpha, inside=inside, target=target):
                op = expander_operator(opkind, alpha.kind)
                verdict = expander_spectra(opkind, alpha, ctx.config)
                witness = None
                if inside and opkind in (ExpanderKind.Z, ExpanderKind.Z_PRIME):
                    certificate = expander_point_spectra(opkind, alpha, ctx.config).certificate
                    witness = _expect(certificate.kind is CertificateKind.KERNEL
                                      and certificate.residual <= KERNEL_RESIDUAL_TOL,
                                      f"kernel witness residual {certificate.residual}")
                empty = None
                if opkind is ExpanderKind.W_PRIME:
                    kernels = kernel_search(op, alpha, config=ctx.config)
                    empty = _expect(not kernels, f"{len(kernels)} kernel candidates for W'")
                return _first(
                    _expect(verdict.membership == (Membership.IN if inside else Membership.OUT),
                            f"verdict {verdict.membership.value}"),
                    witness,
                    empty,
                    _oracle_agrees(invertibility_verdict(op, alpha, ctx.config), inside),
                )

            yield Case(f"{opkind.name.lower()}-{i:04d}", query(opkind.value, alpha, cross_check=True), check)

    kind = ctx.step()
    coincident = make_element(kind, np.where(kind.sample_points() < 0.5, 1.0, 3.0))
    for opkind in (ExpanderKind.W_DOUBLE_PRIME, ExpanderKind.Z_PRIME, ExpanderKind.F, ExpanderKind.D):
        def check(opkind=opkind):
            verdict = expander_point_spectra(opkind, coincident, ctx.config)
            certificate = verdict.certificate
            return _expect(verdict.membership == Membership.IN and certificate.residual <= 1e-12,
                           f"unit coincidence {verdict.membership.value}, residual {certificate.residual}")

        yield Case(f"unit-coincidence-{opkind.name.lower()}", query(opkind.value, coincident, "point"), check)


def prop_bilateral(ctx: Context) -> Iterator[Case]:
    kind = ctx.continuous()
    margin = ctx.scale.margin
    op = BilateralShift()
    target = basis_vector(0, kind, Integers(ctx.config.bilateral_radius))
    for i in range(ctx.count("prop-bilateral")):
        inside = i % 2 == 0
        while True:
            values = random_profile(ctx.rng, kind)
            if inside:
                modulus = np.abs(values)
                pivot = int(np.argmin(np.abs(modulus - np.sqrt(modulus.min() * modulus.max()))))
                f = make_element(kind, values / modulus[pivot])
            elif i % 4 == 1:
                f = make_element(kind, values * ctx.rng.uniform(0.3, 1.0 - margin) / norm(make_element(kind, values)))
            else:
                f = make_element(kind, values * ctx.rng.uniform(1.0 + margin, 2.0) / inf_abs(make_element(kind, values)))
            sampled = np.abs(refined_values(f))
            if not inside or (sampled.min() <= 1.0 - margin and sampled.max() >= 1.0 + margin):
                break

        def check(f=f, inside=inside):
            verdict = bilateral_shift_spectrum(f, ctx.config)
            result = solve(op, f, target, config=ctx.config)
            oracle_in = result.diverging or result.residual > 1e-6
            kernels = kernel_search(op, f, config=ctx.config)
            return _first(
                _expect(verdict.membership == (Membership.IN if inside else Membership.OUT),
                        f"verdict {verdict.membership.value}"),
                _expect(oracle_in == inside, f"solution norms {list(result.solution_norms)}"),
                _expect(not kernels, f"{len(kernels)} kernel candidates for V"),
            )

        yield Case(f"panel-{i:04d}", query("V", f), check)


def _star_transfer_pieces(kind: EssentiallyBounded):
    g1 = indicator(kind, 0.0, 0.5) * 2.0
    g2 = unit(kind)
    f = indicator(kind, 0.6, 0.9)
    x = ModuleVector.from_entries(kind, Natural(16), [f] + [scalar(kind, 0.0)] * 15)
    return DiagonalSelfAdjoint((g1, g2)), g1, f, x


def ex_star_transfer(ctx: Context) -> Iterator[Case]:
    kind = ctx.step()
    op, g1, _, x = _star_transfer_pieces(kind)
    alpha = g1 * 1j

    def transfers():
        return _expect(selfadjoint_point_star_transfer(op, alpha, x, ctx.config), "x does not witness alpha*")

    def self_adjoint_point():
        y = basis_vector(2, kind, Natural(16))
        return _expect(selfadjoint_point_star_transfer(op, unit(kind), y, ctx.config),
                       "self-adjoint alpha did not transfer")

    def skew_rejected():
        try:
            skew_resolvent_bound(op, alpha, ctx.config)
        except SkewPartNotInvertible:
            return None
        return "skew bound accepted with alpha - alpha* singular"

    def matrix_rejected():
        E11 = make_element(MatrixAlgebra(2), [[1, 0], [0, 0]])
        try:
            selfadjoint_point_star_transfer(ScalarMult(E11), E11, basis_vector(1, E11.kind, Natural(4)),
                                            ctx.config)
        except NotCommutative:
            return None
        return "matrix algebra accepted"

    yield Case("transfer", query(op, alpha, "point"), transfers)
    yield Case("self-adjoint", query(op, unit(kind), "point"), self_adjoint_point)
    yield Case("skew-part", query(op, alpha, "skew-bound"), skew_rejected)
    yield Case("matrix", query("S", make_element(MatrixAlgebra(2), [[1, 0], [0, 0]]), "point"), matrix_rejected)


def ex_residual_matrix(ctx: Context) -> Iterator[Case]:
    kind = MatrixAlgebra(4, finite_section=True)
    P = make_element(kind, np.diag([1.0, 0.0, 0.0, 0.0]))
    shift = make_element(kind, np.eye(4, k=-1))
    op = ScalarMult(P)

    def bounded_below():
        report = bounded_below_ladder(op, shift, section=Section.RECTANGULAR, config=ctx.config)
        return _expect(min(report.sv_min) >= 1.0 - 1e-6 and report.trend is Trend.BOUNDED_BELOW,
                       f"rectangular sigma_min {list(report.sv_min)}")

    def adjoint_kernel():
        candidates = kernel_search(adjoint(op), star(shift), config=ctx.config)
        return _expect(bool(candidates), "no adjoint kernel vector")

    def duality():
        return _expect(residual_point_duality(op, shift, config=ctx.config), "duality failed")

    def normal_rejected():
        try:
            normal_residual_empty_check(op, shift, ctx.config)
        except NotCommutative:
            return None
        return "normal residual check accepted a matrix algebra"

    document = query(op, shift, "residual-duality")
    yield Case("bounded-below", query(op, shift, "approx"), bounded_below)
    yield Case("adjoint-kernel", document, adjoint_kernel)
    yield Case("duality", document, duality)
    yield Case("normal-rejected", document, normal_rejected)


def ex_kernel_orthogonality(ctx: Context) -> Iterator[Case]:
    kind = ctx.step()
    left = indicator(kind, 0.0, 0.5)
    right = indicator(kind, 0.5, 1.0)
    zero_el, one = scalar(kind, 0.0), unit(kind)
    indexing = Natural(16)

    def separated():
        op = DiagonalSelfAdjoint((right,))
        x1, x2 = basis_vector(1, kind, indexing, left), basis_vector(1, kind, indexing, right)
        return _expect(normal_kernel_orthogonality(op, zero_el, one, x1, x2, ctx.config),
                       "kernels for 0 and 1 not orthogonal")

    def shared_vector():
        op, g1, _, x = _star_transfer_pieces(kind)
        try:
            normal_kernel_orthogonality(op, zero_el, g1 * 1j, x, x, ctx.config)
        except DifferenceNotInvertible as e:
            return _expect(e.details.get("pairing", 0.0) > 0.0, "pairing reported as zero")
        return "non-invertible difference accepted"

    def skew_projection():
        matrices = MatrixAlgebra(2)
        Pi = make_element(matrices, [[1, 1], [0, 0]])
        I = unit(matrices)
        P1 = make_element(matrices, [[1, 0], [0, 0]])
        P2 = make_element(matrices, [[0.5, -0.5], [-0.5, 0.5]])
        x1 = basis_vector(1, matrices, Natural(4), P1)
        x2 = basis_vector(1, matrices, Natural(4), P2)
        pairing = norm(inner_product(x1, x2))
        try:
            normal_kernel_orthogonality(ScalarMult(I), Pi, sub(I, Pi), x1, x2, ctx.config)
        except NotCommutative:
            return _expect(pairing > 0.1, f"skew kernels pair to {pairing:.3g}")
        return "skew projection accepted"

    def same_vector():
        op = DiagonalSelfAdjoint((right,))
        x = basis_vector(1, kind, indexing, left)
        try:
            normal_kernel_orthogonality(op, zero_el, one, x, x, ctx.config)
        except SpectraError as e:
            return _expect(e.code == 15, f"unexpected error {e.kind}")
        return "x1 = x2 accepted"

    yield Case("separated", query(DiagonalSelfAdjoint((right,)), zero_el, "kernel"), separated)
    yield Case("shared-vector", query(DiagonalSelfAdjoint((left * 2.0, one)), zero_el, "kernel"), shared_vector)
    yield Case("skew-projection", query(ScalarMult(unit(MatrixAlgebra(2))),
                                        make_element(MatrixAlgebra(2), [[1, 1], [0, 0]]), "kernel"),
               skew_projection)
    yield Case("same-vector", query(DiagonalSelfAdjoint((right,)), one, "kernel"), same_vector)


def ex_diagonal_unitary(ctx: Context) -> Iterator[Case]:
    kind = ctx.step()
    t = kind.sample_points()
    rotation = make_element(kind, np.exp(2j * np.pi * t))
    left = t < 0.5
    beta = make_element(kind, np.where(left, rotation.data, 3.0))

    def case(beta, alphas, expected, large_norm=False):
        def check():
            verdict = diagonal_unitary_spectrum(beta, alphas, ctx.config)
            report = invertibility_verdict(DiagonalUnitary(tuple(alphas)), beta, ctx.config)
            return _first(
                _expect(verdict.membership == expected, f"verdict {verdict.membership.value}"),
                _expect(not large_norm or verdict.notes.get("norm_exceeds_one"), "norm 3 not flagged"),
                _oracle_agrees(report, expected == Membership.IN),
            )
        return check

    yield Case("norm-three", query("diagonal-unitary", beta, unitaries=[rotation]),
               case(beta, (rotation,), Membership.IN, large_norm=True))
    five = scalar(kind, 5.0)
    yield Case("five", query("diagonal-unitary", five, unitaries=[unit(kind)]),
               case(five, (unit(kind),), Membership.OUT))
    yield Case("coincident", query("diagonal-unitary", rotation, unitaries=[rotation]),
               case(rotation, (rotation,), Membership.IN))


def star_duality(ctx: Context) -> Iterator[Case]:
    for pair in DualityPair:
        for i in range(ctx.count("star-duality")):
            radius = float(ctx.rng.uniform(0.3, 2.0))
            alpha = random_element(ctx.rng, ctx.function_kind(i), radius)
            operator = "S" if pair is DualityPair.SHIFT else pair.value.split("/")[0]
            yield Case(f"{pair.name.lower()}-{i:04d}", query(operator, alpha),
                       lambda pair=pair, alpha=alpha: _expect(
                           spectrum_star_duality_check(pair, alpha, ctx.config), "memberships differ"))

    def adjoint_rule():
        alpha = random_element(np.random.default_rng(0), ctx.continuous(), 0.5)
        forward = unilateral_shift_spectrum(alpha, ctx.config).membership
        return _expect(adjoint_shift_spectrum(star(alpha), ctx.config).membership == forward,
                       "S* rule disagrees with S")

    yield Case("adjoint-rule", query("S*", random_element(np.random.default_rng(0), ctx.continuous(), 0.5)),
               adjoint_rule)


def unitary_conjugation(ctx: Context) -> Iterator[Case]:
    kind = ctx.continuous()
    t = kind.sample_points()
    operators = {
        "S": UnilateralShift(),
        "W'": expander_operator(ExpanderKind.W_PRIME, kind),
        "Z": expander_operator(ExpanderKind.Z, kind),
    }
    for name, op in operators.items():
        for i in range(ctx.count("unitary-conjugation")):
            phases = [make_element(kind, np.exp(2j * np.pi * (ctx.rng.uniform() + k * t))) for k in range(2)]
            U = DiagonalUnitary(tuple(phases))
            conjugated = adjoint(U) @ op @ U
            alpha = random_element(ctx.rng, kind, float(ctx.rng.uniform(0.3, 2.0)))

            def check(op=op, conjugated=conjugated, alpha=alpha):
                plain = bounded_below_ladder(op, alpha, config=ctx.config)
                rotated = bounded_below_ladder(conjugated, alpha, config=ctx.config)
                drift = max(abs(a - b) for a, b in zip(plain.sv_min, rotated.sv_min))
                return _first(
                    _expect(drift <= 1e-8, f"sigma_min drift {drift:.3g}"),
                    _expect(plain.trend is rotated.trend, f"trends {plain.trend.value} / {rotated.trend.value}"),
                )

            yield Case(f"{name}-{i:04d}", query(conjugated, alpha, "approx"), check)


def scalar_boundary(ctx: Context) -> Iterator[Case]:
    kind = scalar_kind()
    for i, angle in enumerate(np.linspace(0.0, 1.0, 8, endpoint=False)):
        alpha = scalar(kind, np.exp(2j * np.pi * angle))

        def check(alpha=alpha):
            full = unilateral_shift_spectrum(alpha, ctx.config)
            approx = approx_point_membership(UnilateralShift(), alpha, ctx.config)
            bilateral = bilateral_shift_spectrum(alpha, ctx.config)
            return _first(
                _expect(full.membership == Membership.IN and full.rule == "unilateral-shift:closure",
                        f"S verdict {full.membership.value} by {full.rule}"),
                _expect(approx.membership == Membership.IN, f"approx verdict {approx.membership.value}"),
                _expect(bilateral.membership == Membership.IN, f"V verdict {bilateral.membership.value}"),
            )

        yield Case(f"angle-{i:02d}", query("S", alpha, "approx"), check)

    half = scalar(kind, 0.5)
    yield Case("interior-half", query("S", half, "approx"),
               lambda: _expect(approx_point_membership(UnilateralShift(), half, ctx.config).membership
                               == Membership.OUT, "alpha = 1/2 is not an approximate eigenvalue"))


SUITES: dict[str, Callable[[Context], Iterator[Case]]] = {
    "scalar-reduction": scalar_reduction,
    "prop-shift": prop_shift,
    "lemma-resolvent": lemma_resolvent,
    "mn-shift": mn_shift,
    "weighted-shift": weighted_shift,
    "block-shift": block_shift_suite,
    "cor-skew-bound": cor_skew_bound,
    "ex-m2-counterexample": ex_m2_counterexample,
    "cor-envelope": cor_envelope,
    "ex-expanders": ex_expanders,
    "prop-bilateral": prop_bilateral,
    "ex-star-transfer": ex_star_transfer,
    "ex-residual-matrix": ex_residual_matrix,
    "ex-kernel-orthogonality": ex_kernel_orthogonality,
    "ex-diagonal-unitary": ex_diagonal_unitary,
    "star-duality": star_duality,
    "unitary-conjugation": unitary_conjugation,
    "scalar-boundary": scalar_boundary,
}


def run_suite(suite: str, seed: int = 0, scale: str = "small",
              config: SpectraConfig = DEFAULT_CONFIG) -> SuiteResult:
    """Run one named suite; failures carry the query document and the seed."""
    if suite not in SUITES:
        raise UnknownSuite(f"unknown suite '{suite}'", known=sorted(SUITES))
    if scale not in SCALES:
        raise UnknownSuite(f"unknown scale '{scale}' (expected small or full)")
    chosen = SCALES[scale]
    ctx = Context(np.random.default_rng(seed), chosen, replace(config, kernel_depth=chosen.kernel_depth))

    result = SuiteResult(suite, seed, scale)
    started = time.perf_counter()
    for case in SUITES[suite](ctx):
        result.cases += 1
        try:
            message = case.check()
        except SpectraError as e:
            message = f"{e.kind}: {e}"
        if message is not None:
            logger.warning("%s/%s failed: %s", suite, case.case_id, message)
            result.failures.append({"case": case.case_id, "message": message,
                                    "seed": seed, "query": case.query})
    result.wall_time = time.perf_counter() - started
    logger.info("suite %s: %d cases, %d failures", suite, result.cases, len(result.failures))
    return result
