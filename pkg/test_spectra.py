#!/usr/bin/env python3
"""
Tests for the closed-form membership rules and their certificates.

Usage:
    source ./devsetup.sh
    python test_spectra.py
"""

import sys

from testrunner import TestRunner, run_script

import numpy as np

from cstar_spectra.algebra import (
    ContinuousFunctions,
    EssentiallyBounded,
    GridSpec,
    MatrixAlgebra,
    make_element,
    scalar,
    scalar_kind,
)
from cstar_spectra.errors import (
    BoundsNotClosedForm,
    DifferenceNotInvertible,
    KindUnsupported,
    NotApplicable,
    NotCommutative,
    NotNormal,
    NotSelfAdjoint,
    PreconditionFailed,
    SkewPartNotInvertible,
)
from cstar_spectra.expression import parse_expression
from cstar_spectra.module import Growth, Natural, basis_vector
from cstar_spectra.operators import (
    BilateralShift,
    DiagonalSelfAdjoint,
    ExpanderKind,
    UnilateralShift,
    adjoint,
)
from cstar_spectra.spectra import (
    CertificateKind,
    Membership,
    SpectrumPart,
    adjoint_shift_spectrum,
    approx_point_membership,
    bilateral_shift_spectrum,
    block_shift_spectrum,
    bounded_below_implies_invertible,
    diagonal_unitary_spectrum,
    expander_point_spectra,
    expander_spectra,
    mn_shift_spectrum,
    normal_kernel_orthogonality,
    normal_residual_empty_check,
    residual_point_duality,
    selfadjoint_point_star_transfer,
    selfadjoint_spectrum_envelope,
    shift_cokernel_witness,
    shift_resolvent_solution,
    shift_spectrum_commutative,
    skew_resolvent_bound,
    spectrum_star_duality_check,
    unilateral_shift_point_spectrum,
    unilateral_shift_spectrum,
    unitary_norm_screen,
    weighted_shift_kernel_witness,
)

CONTINUOUS = ContinuousFunctions(GridSpec(9))
SMALL = ContinuousFunctions(GridSpec(5))
STEP = EssentiallyBounded(GridSpec(4))
M2 = MatrixAlgebra(2)


def affine(kind, a, b):
    """a + b t on the kind's grid."""
    return make_element(kind, a + b * kind.sample_points())


def run_unilateral_tests(runner: TestRunner):
    runner.section("Unilateral shift")

    inside = unilateral_shift_spectrum(affine(CONTINUOUS, 0.5, 0.25))
    runner.test("0.5 + 0.25t is in sigma(S)", inside.membership is Membership.IN)
    runner.test("inside points carry a cokernel witness", inside.certificate.kind is CertificateKind.COKERNEL)
    runner.test("the cokernel witness pairs to zero", inside.certificate.max_pairing <= 1e-8,
                str(inside.certificate.max_pairing))

    outside = unilateral_shift_spectrum(affine(CONTINUOUS, 2.0, 1.0))
    runner.test("2 + t is outside sigma(S)", outside.membership is Membership.OUT)
    runner.test("outside points carry a growth diagnostic",
                outside.certificate.kind is CertificateKind.GROWTH
                and outside.certificate.growth.verdict is Growth.CONVERGING)
    runner.test("the gap to the disc is inf|alpha| - 1", abs(outside.certificate.bound - 1.0) < 1e-12)

    edge = unilateral_shift_spectrum(scalar(CONTINUOUS, 1.0))
    runner.test("inf|alpha| = 1 is in by closure",
                edge.membership is Membership.IN and edge.rule == "unilateral-shift:closure")
    runner.test("the full spectrum is reported as Full", edge.part is SpectrumPart.FULL)
    runner.test("the point spectrum of S is empty",
                unilateral_shift_point_spectrum(scalar(CONTINUOUS, 0.5)).membership is Membership.OUT)

    runner.test_raises("matrix algebras are routed elsewhere", KindUnsupported,
                       lambda: unilateral_shift_spectrum(scalar(M2, 0.5)))
    runner.test_raises("no cokernel witness outside the disc", NotApplicable,
                       lambda: shift_cokernel_witness(scalar(CONTINUOUS, 2.0)))

    runner.section("Resolvent solutions")

    solution = shift_resolvent_solution(scalar(CONTINUOUS, 2.0))
    runner.test("alpha = 2 gives a resolvent solution", solution.kind is CertificateKind.RESOLVENT)
    runner.test("the resolvent residual is small", solution.residual < 1e-8, str(solution.residual))
    runner.test("alpha^-n is summable for alpha = 2", solution.growth.verdict is Growth.CONVERGING)
    runner.test("x_1 = alpha^-1", np.allclose(solution.vector.entry(1).data, 0.5))

    unit_circle = shift_resolvent_solution(scalar(CONTINUOUS, 1.0))
    runner.test("alpha = 1 solves formally but the powers do not decay",
                unit_circle.growth.verdict is Growth.DIVERGING)

    runner.section("Commutative and matrix shift rules")

    runner.test("non-invertible alpha is in sigma(S)",
                shift_spectrum_commutative(scalar(CONTINUOUS, 0.0)).rule == "commutative-shift:not-invertible")
    runner.test("0.5 is in sigma(S) by the ratio test",
                shift_spectrum_commutative(scalar(CONTINUOUS, 0.5)).membership is Membership.IN)
    verdict = shift_spectrum_commutative(scalar(CONTINUOUS, 3.0))
    runner.test("3 is outside sigma(S) by the ratio test",
                verdict.membership is Membership.OUT and abs(verdict.certificate.bound - 2.0) < 1e-12)

    runner.test("diag(2, 3) is outside sigma(S) over M_2",
                mn_shift_spectrum(make_element(M2, [[2, 0], [0, 3]])).membership is Membership.OUT)
    runner.test("diag(2, 1/2) is in sigma(S) over M_2",
                mn_shift_spectrum(make_element(M2, [[2, 0], [0, 0.5]])).membership is Membership.IN)
    singular = mn_shift_spectrum(make_element(M2, [[1, 0], [0, 0]]))
    runner.test("singular T is in sigma(S) over M_2",
                singular.membership is Membership.IN and singular.rule == "mn-shift:not-invertible")
    jordan = mn_shift_spectrum(make_element(M2, [[2, 100], [0, 2]]))
    runner.test("a large norm with spectral radius 2 is still outside", jordan.membership is Membership.OUT,
                str(jordan.notes))
    runner.test_raises("function kinds are rejected by the matrix rule", KindUnsupported,
                       lambda: mn_shift_spectrum(scalar(CONTINUOUS, 2.0)))

    adjoint_verdict = adjoint_shift_spectrum(scalar(CONTINUOUS, 0.5))
    runner.test("0.5 is in sigma(S*) with a kernel witness",
                adjoint_verdict.membership is Membership.IN
                and adjoint_verdict.certificate.kind is CertificateKind.KERNEL)


def run_weighted_and_block_tests(runner: TestRunner):
    runner.section("Weighted shifts")

    alpha = make_element(STEP, [0, 0, 1, 1])
    weights = (make_element(STEP, [0, 1, 1, 1]),)
    verdict = weighted_shift_kernel_witness(alpha, weights, 1)
    runner.test("a common annihilator gives a point of the point spectrum",
                verdict.membership is Membership.IN and verdict.part is SpectrumPart.POINT)
    runner.test("the weighted witness is supported on e_1", verdict.certificate.vector.support() == [1])
    no_gamma = weighted_shift_kernel_witness(alpha, (scalar(STEP, 1.0),), 1)
    runner.test("an invertible weight leaves no witness", no_gamma.membership is Membership.OUT)

    runner.section("Block shift")

    outside = block_shift_spectrum(scalar(STEP, 2.0))
    runner.test("2 is outside sigma(S~)", outside.membership is Membership.OUT)
    runner.test("the gap is the distance to both blocks", abs(outside.certificate.bound - 1.0) < 1e-12)
    inside = block_shift_spectrum(scalar(STEP, 0.5))
    runner.test("0.5 is in sigma(S~) through the right block",
                inside.membership is Membership.IN and inside.certificate.kind is CertificateKind.COKERNEL)
    unit_left = block_shift_spectrum(make_element(STEP, [1, 1, 3, 3]))
    runner.test("alpha = 1 on the left block is an eigenvalue",
                unit_left.rule == "block-shift:left-unit" and unit_left.certificate.kind is CertificateKind.KERNEL)
    runner.test_raises("the block shift needs step functions", KindUnsupported,
                       lambda: block_shift_spectrum(scalar(CONTINUOUS, 2.0)))


def run_oracle_backed_tests(runner: TestRunner):
    runner.section("Approximate point spectrum and residual part")

    kind = scalar_kind()
    S = UnilateralShift()
    approx = approx_point_membership(S, scalar(kind, 0.5))
    runner.test("1/2 is not in the approximate point spectrum of S",
                approx.membership is Membership.OUT and approx.part is SpectrumPart.APPROX_POINT)
    runner.test("S - 1/2 is residual-point dual", residual_point_duality(S, scalar(kind, 0.5)))
    runner.test("S - 2 is residual-point dual", residual_point_duality(S, scalar(kind, 2.0)))

    runner.test("V - 2 is surjective", normal_residual_empty_check(BilateralShift(), scalar(kind, 2.0)))
    runner.test_raises("the residual check needs a normal operator", NotNormal,
                       lambda: normal_residual_empty_check(S, scalar(kind, 2.0)))

    runner.section("Bounded below over a commutative algebra")

    diagonal = DiagonalSelfAdjoint((affine(SMALL, 1.0, 1.0),))
    verdict = bounded_below_implies_invertible(diagonal, scalar(SMALL, 3.0))
    runner.test("diag(1 + t) - 3 is invertible", verdict.membership is Membership.OUT)
    runner.test("its lower bound is 1", abs(verdict.certificate.bound - 1.0) < 1e-9, str(verdict.certificate.bound))
    runner.test_raises("matrix algebras are not commutative", NotCommutative,
                       lambda: bounded_below_implies_invertible(diagonal, scalar(M2, 3.0)))
    runner.test_raises("S is not self-adjoint", NotSelfAdjoint,
                       lambda: bounded_below_implies_invertible(S, scalar(SMALL, 3.0)))


def run_unitary_tests(runner: TestRunner):
    runner.section("Unitary screen")

    small = unitary_norm_screen(scalar(CONTINUOUS, 0.5))
    runner.test("||alpha|| < 1 is outside", small.membership is Membership.OUT)
    large = unitary_norm_screen(scalar(CONTINUOUS, 3.0))
    runner.test("||alpha^-1|| < 1 is outside",
                large.membership is Membership.OUT and large.rule == "unitary-screen:inverse-norm")
    runner.test("the unit circle is inconclusive",
                unitary_norm_screen(scalar(CONTINUOUS, 1.0)).membership is Membership.INCONCLUSIVE)

    runner.section("Bilateral shift")

    runner.test("|0.5 + t| crosses 1 on C([0,1])",
                bilateral_shift_spectrum(affine(CONTINUOUS, 0.5, 1.0)).membership is Membership.IN)
    far = bilateral_shift_spectrum(scalar(CONTINUOUS, 3.0))
    runner.test("3 is outside sigma(V)", far.membership is Membership.OUT and abs(far.certificate.bound - 2.0) < 1e-12)
    runner.test("a step function that jumps over 1 is outside sigma(V)",
                bilateral_shift_spectrum(affine(STEP, 0.5, 1.0)).membership is Membership.OUT)
    runner.test("a step function equal to 1 on a cell is in sigma(V)",
                bilateral_shift_spectrum(make_element(STEP, [0.5, 1, 2, 2])).membership is Membership.IN)

    runner.section("Diagonal unitaries")

    rotation = make_element(STEP, [1, 1j, -1, -1j])
    alphas = (rotation, scalar(STEP, 1.0))
    eigen = diagonal_unitary_spectrum(rotation, alphas)
    runner.test("beta = alpha_1 is an eigenvalue",
                eigen.membership is Membership.IN and eigen.certificate.kind is CertificateKind.KERNEL)
    far = diagonal_unitary_spectrum(scalar(STEP, 5.0), alphas)
    runner.test("5 is outside with gap 4", far.membership is Membership.OUT
                and abs(far.certificate.bound - 4.0) < 1e-12)
    mixed = diagonal_unitary_spectrum(make_element(STEP, [1, 5, 5, 5]), alphas)
    runner.test("a spectral point may have norm above 1",
                mixed.membership is Membership.IN and mixed.notes.get("norm_exceeds_one") is True)


def run_selfadjoint_tests(runner: TestRunner):
    runner.section("Self-adjoint and normal operators")

    g = make_element(STEP, [1, 2, 3, 4])
    F = DiagonalSelfAdjoint((g,))
    first_cell = make_element(STEP, [1, 0, 0, 0])
    second_cell = make_element(STEP, [0, 1, 0, 0])
    x1 = basis_vector(1, STEP, Natural(8), first_cell)
    x2 = basis_vector(1, STEP, Natural(8), second_cell)

    alpha = make_element(STEP, [1, 5j, 0, 0])
    runner.test("a kernel vector for alpha also serves alpha*", selfadjoint_point_star_transfer(F, alpha, x1))
    runner.test_raises("a non-kernel vector is rejected", PreconditionFailed,
                       lambda: selfadjoint_point_star_transfer(F, alpha, x2))

    alpha1 = make_element(STEP, [1, 7, 7, 7])
    alpha2 = make_element(STEP, [5, 2, 5, 5])
    runner.test("kernels for separated alphas are orthogonal",
                normal_kernel_orthogonality(F, alpha1, alpha2, x1, x2))
    runner.test_raises("equal alphas are not separated", DifferenceNotInvertible,
                       lambda: normal_kernel_orthogonality(F, alpha1, alpha1, x1, x1))

    runner.section("Skew bound")

    ramp = DiagonalSelfAdjoint((affine(SMALL, -1.0, 2.0),))
    skew = skew_resolvent_bound(ramp, scalar(SMALL, 0.5 + 0.5j))
    runner.test("diag(2t - 1) - (1/2 + i/2) is invertible", skew.membership is Membership.OUT)
    runner.test("the skew bound is 1/2", abs(skew.certificate.bound - 0.5) < 1e-12)
    runner.test("the oracle agrees with the bound", skew.notes["oracle_sv_min"] >= 0.5 - 1e-6)
    runner.test_raises("real alpha has no invertible skew part", SkewPartNotInvertible,
                       lambda: skew_resolvent_bound(ramp, scalar(SMALL, 0.5)))
    runner.test_raises("the skew bound fails over M_2", NotCommutative,
                       lambda: skew_resolvent_bound(ramp, scalar(M2, 0.5j)))

    runner.section("Self-adjoint envelope")

    positive = DiagonalSelfAdjoint((affine(SMALL, 1.0, 1.0),))
    far = selfadjoint_spectrum_envelope(positive, scalar(SMALL, 5.0))
    runner.test("5 lies outside [1, 2]", far.membership is Membership.OUT and abs(far.certificate.bound - 3.0) < 1e-9)
    runner.test("1.5 meets [1, 2] and stays undecided",
                selfadjoint_spectrum_envelope(positive, scalar(SMALL, 1.5)).membership is Membership.INCONCLUSIVE)
    S = UnilateralShift()
    runner.test_raises("S + S* has no closed-form bounds", BoundsNotClosedForm,
                       lambda: selfadjoint_spectrum_envelope(S + adjoint(S), scalar(SMALL, 5.0)))


def run_expander_tests(runner: TestRunner):
    runner.section("Expanders and compressors")

    half = scalar(CONTINUOUS, 0.5)
    dyadic = expander_spectra(ExpanderKind.W_PRIME, half)
    runner.test("0.5 is in sigma(W') with a cokernel witness",
                dyadic.membership is Membership.IN and dyadic.certificate.kind is CertificateKind.COKERNEL)
    compressor = expander_spectra("Z", half)
    runner.test("0.5 is in sigma(Z) with a kernel witness",
                compressor.membership is Membership.IN and compressor.certificate.kind is CertificateKind.KERNEL)
    runner.test("2 is outside sigma(W'')",
                expander_spectra(ExpanderKind.W_DOUBLE_PRIME, scalar(CONTINUOUS, 2.0)).membership is Membership.OUT)
    runner.test_raises("block operators need step functions", KindUnsupported,
                       lambda: expander_spectra(ExpanderKind.F, half))

    runner.section("Expander point spectra")

    runner.test("W' has no eigenvalue at 0.5",
                expander_point_spectra(ExpanderKind.W_PRIME, half).membership is Membership.OUT)
    runner.test("Z has an eigenvalue at 0.5", expander_point_spectra(ExpanderKind.Z, half).membership is Membership.IN)
    coincidence = expander_point_spectra(ExpanderKind.Z_PRIME, scalar(CONTINUOUS, 1.0))
    runner.test("Z' fixes e_1, so 1 is an eigenvalue",
                coincidence.membership is Membership.IN and coincidence.certificate.vector.support() == [1])
    runner.test("Z at 1 sits on the boundary",
                expander_point_spectra(ExpanderKind.Z, scalar(CONTINUOUS, 1.0)).membership
                is Membership.BOUNDARY_INDETERMINATE)

    runner.section("Star duality")

    runner.test("S and S* agree under conjugation",
                spectrum_star_duality_check("S", scalar(CONTINUOUS, 0.5 + 0.25j)))
    runner.test("W' and Z agree under conjugation", spectrum_star_duality_check("W'/Z", scalar(CONTINUOUS, 3.0)))
    runner.test("W'' and Z' agree under conjugation", spectrum_star_duality_check("W''/Z'", half))


def run_between_nodes_tests(runner: TestRunner):
    runner.section("Dips between grid nodes")

    # |alpha| = 1.2 at every node, 0 halfway between neighbours
    dip = parse_expression("1.2*exp(8*i*pi*t)", CONTINUOUS)
    runner.test("every node has |alpha| = 1.2", np.allclose(np.abs(dip.data), 1.2))

    verdict = unilateral_shift_spectrum(dip)
    runner.test("the dip is in sigma(S)", verdict.membership is Membership.IN, str(verdict.to_dict()))
    runner.test("no node-level cokernel witness is claimed", verdict.certificate.kind is CertificateKind.NONE)
    runner.test("the commutative rule agrees",
                shift_spectrum_commutative(dip).membership is Membership.IN)
    runner.test_raises("an explicit cokernel witness is not applicable", NotApplicable,
                       lambda: shift_cokernel_witness(dip))
    runner.test("the dip is in sigma(S*)", adjoint_shift_spectrum(dip).membership is Membership.IN)

    for name in ("W'", "W''", "Z", "Z'"):
        verdict = expander_spectra(name, dip)
        runner.test(f"the dip is in sigma({name})",
                    verdict.membership is Membership.IN and verdict.certificate.kind is CertificateKind.NONE)
    for name in ("Z", "Z'"):
        verdict = expander_point_spectra(name, dip)
        runner.test(f"the dip is an eigenvalue of {name}", verdict.membership is Membership.IN)
    runner.test("W' still has no eigenvalue", expander_point_spectra("W'", dip).membership is Membership.OUT)
    runner.test("S and S* agree on the dip", spectrum_star_duality_check("S", dip))
    runner.test("W' and Z agree on the dip", spectrum_star_duality_check("W'/Z", dip))


GROUPS = (
    run_unilateral_tests,
    run_weighted_and_block_tests,
    run_oracle_backed_tests,
    run_unitary_tests,
    run_selfadjoint_tests,
    run_expander_tests,
    run_between_nodes_tests,
)


def test_spectra():
    assert run_script("SPECTRA TESTS", *GROUPS)


def main():
    sys.exit(0 if run_script("SPECTRA TESTS", *GROUPS) else 1)


if __name__ == "__main__":
    main()
