#!/usr/bin/env python3
"""
Tests for the operator bank: action on truncated vectors, adjoints,
compatibility checks, self-adjointness/normality and the m(F), M(F) bounds.

Usage:
    source ./devsetup.sh
    python test_operators.py
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
    unit,
)
from cstar_spectra.errors import IndexingMismatch, KindMismatch, NotSelfAdjoint, PreconditionFailed
from cstar_spectra.module import Integers, ModuleVector, Natural, basis_vector, inner_product
from cstar_spectra.operators import (
    Adjoint,
    BilateralShift,
    BlockByIndicator,
    BoundsMethod,
    Compose,
    DiagonalSelfAdjoint,
    DiagonalUnitary,
    DyadicCompress,
    DyadicExpand,
    ExpanderKind,
    OddCompress,
    OddExpand,
    ScalarMult,
    Sum,
    UnilateralShift,
    WeightedShift,
    adjoint,
    apply,
    block_shift,
    expander_operator,
    is_normal,
    is_self_adjoint,
    self_adjoint_bounds,
)


def random_vector(rng: np.random.Generator, kind, indexing) -> ModuleVector:
    shape = (indexing.size, *kind.element_shape)
    return ModuleVector(kind, indexing, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def run_action_tests(runner: TestRunner):
    runner.section("Operator action")

    kind = EssentiallyBounded(GridSpec(4))
    N = Natural(8)

    def e(k, indexing=N):
        return basis_vector(k, kind, indexing)

    runner.test("S e_1 = e_2", apply(UnilateralShift(), e(1)) == e(2))
    runner.test("S drops the last coordinate", apply(UnilateralShift(), e(8)).support() == [])
    runner.test("S* e_2 = e_1", apply(adjoint(UnilateralShift()), e(2)) == e(1))
    runner.test("S* e_1 = 0", apply(adjoint(UnilateralShift()), e(1)).support() == [])
    runner.test("V e_0 = e_1", apply(BilateralShift(), e(0, Integers(3))) == e(1, Integers(3)))
    runner.test("W' e_3 = e_6", apply(DyadicExpand(), e(3)) == e(6))
    runner.test("W'' e_3 = e_5", apply(OddExpand(), e(3)) == e(5))
    runner.test("Z e_6 = e_3", apply(DyadicCompress(), e(6)) == e(3))
    runner.test("Z e_5 = 0", apply(DyadicCompress(), e(5)).support() == [])
    runner.test("Z' e_5 = e_3", apply(OddCompress(), e(5)) == e(3))
    runner.test("Z W' is the identity", apply(Compose(DyadicCompress(), DyadicExpand()), e(2)) == e(2))

    alpha = make_element(kind, [1, 2, 3, 4])
    runner.test("alpha I multiplies on the left", apply(ScalarMult(alpha), e(1)).entry(1) == alpha)

    w1, w2 = make_element(kind, [1, 0, 1, 0]), make_element(kind, [2, 2, 2, 2])
    weighted = WeightedShift((w1, w2))
    runner.test("weighted shift uses w_1 on e_1", apply(weighted, e(1)).entry(2) == w1)
    runner.test("weighted shift cycles to w_2 on e_2", apply(weighted, e(2)).entry(3) == w2)
    runner.test("weighted shift cycles back to w_1 on e_3", apply(weighted, e(3)).entry(4) == w1)

    shifted_block = block_shift(kind)
    image = apply(shifted_block, e(1))
    runner.test("S~ fixes the left half", np.array_equal(image.entry(1).data.real, [1, 1, 0, 0]))
    runner.test("S~ shifts the right half", np.array_equal(image.entry(2).data.real, [0, 0, 1, 1]))

    F = expander_operator(ExpanderKind.F, kind)
    image = apply(F, e(2))
    runner.test("F is W'' on the left half", np.array_equal(image.entry(3).data.real, [1, 1, 0, 0]))
    runner.test("F is W' on the right half", np.array_equal(image.entry(4).data.real, [0, 0, 1, 1]))

    runner.section("Operator algebra")

    S = UnilateralShift()
    runner.test("operators support + and @", isinstance(S + S, Sum) and isinstance(S @ S, Compose))
    runner.test("S - S annihilates", apply(S - S, e(1)).support() == [])


def run_adjoint_tests(runner: TestRunner):
    runner.section("Adjoints")

    runner.test("W'* = Z", adjoint(DyadicExpand()) == DyadicCompress())
    runner.test("W''* = Z'", adjoint(OddExpand()) == OddCompress())
    runner.test("S** = S", adjoint(adjoint(UnilateralShift())) == UnilateralShift())
    runner.test("S* stays an Adjoint node", adjoint(UnilateralShift()) == Adjoint(UnilateralShift()))
    composed = adjoint(Compose(DyadicExpand(), OddExpand()))
    runner.test("adjoint reverses compositions", composed == Compose(OddCompress(), DyadicCompress()))

    rng = np.random.default_rng(7)
    kind = EssentiallyBounded(GridSpec(4))
    matrices = MatrixAlgebra(2)
    g = make_element(kind, [1, -2, 0.5, 3])
    rotation = make_element(kind, np.exp(1j * np.arange(4)))
    operators = {
        "S": (UnilateralShift(), kind),
        "V": (BilateralShift(), kind),
        "W'": (DyadicExpand(), kind),
        "W''": (OddExpand(), kind),
        "S~": (block_shift(kind), kind),
        "weighted (step)": (WeightedShift((g, rotation)), kind),
        "weighted (M_2)": (WeightedShift((make_element(matrices, [[1, 2], [3, 4j]]),)), matrices),
        "diagonal unitary": (DiagonalUnitary((rotation, unit(kind))), kind),
        "S + W' S*": (Sum(UnilateralShift(), Compose(DyadicExpand(), adjoint(UnilateralShift()))), kind),
    }
    for name, (op, op_kind) in operators.items():
        indexing = Integers(6) if name == "V" else Natural(12)
        x = random_vector(rng, op_kind, indexing)
        y = random_vector(rng, op_kind, indexing)
        left = inner_product(apply(op, x), y)
        right = inner_product(x, apply(adjoint(op), y))
        runner.test(f"<Fx, y> = <x, F*y> for {name}", np.allclose(left.data, right.data))


def run_compatibility_tests(runner: TestRunner):
    runner.section("Compatibility")

    step = EssentiallyBounded(GridSpec(4))
    continuous = ContinuousFunctions(GridSpec(4))

    runner.test_raises("V on naturally indexed vectors is rejected", IndexingMismatch,
                       lambda: apply(BilateralShift(), basis_vector(1, step, Natural(4))))
    runner.test_raises("S on integer-indexed vectors is rejected", IndexingMismatch,
                       lambda: apply(UnilateralShift(), basis_vector(0, step, Integers(2))))
    runner.test_raises("alpha I over another kind is rejected", KindMismatch,
                       lambda: apply(ScalarMult(unit(step)), basis_vector(1, continuous, Natural(4))))
    runner.test_raises("non-unitary diagonal entries are rejected", PreconditionFailed,
                       lambda: DiagonalUnitary((scalar(step, 2.0),)))
    runner.test_raises("complex diagonal entries are not self-adjoint", NotSelfAdjoint,
                       lambda: DiagonalSelfAdjoint((scalar(step, 1j),)))
    runner.test_raises("block indicators must be projections", PreconditionFailed,
                       lambda: BlockByIndicator(scalar(step, 0.5), UnilateralShift(), UnilateralShift()))
    runner.test_raises("block indicators must be step functions", KindMismatch,
                       lambda: BlockByIndicator(unit(continuous), UnilateralShift(), UnilateralShift()))


def run_structure_tests(runner: TestRunner):
    runner.section("Self-adjointness and normality")

    kind = ContinuousFunctions(GridSpec(8))
    S = UnilateralShift()
    runner.test("S + S* is self-adjoint", is_self_adjoint(S + adjoint(S)))
    runner.test("S is not self-adjoint", not is_self_adjoint(S))
    runner.test("S is not normal", not is_normal(S))
    runner.test("V is normal", is_normal(BilateralShift()))
    rotation = make_element(kind, np.exp(2j * np.pi * kind.sample_points()))
    runner.test("diagonal unitaries are normal", is_normal(DiagonalUnitary((rotation,))))

    runner.section("Bounds m(F) and M(F)")

    t = kind.sample_points()
    diagonal = DiagonalSelfAdjoint((make_element(kind, 1.0 + t),))
    bounds = self_adjoint_bounds(diagonal)
    runner.test("positive diagonal bounds are closed form", bounds.method is BoundsMethod.CLOSED_FORM_DIAGONAL)
    runner.test("m(F) = min g", abs(bounds.m_lower - 1.0) < 1e-12 and bounds.m_lower == bounds.m_upper)
    runner.test("M(F) = max g", abs(bounds.M_upper - 2.0) < 1e-12 and bounds.M_lower == bounds.M_upper)

    symmetric = S + adjoint(S)
    sampled = self_adjoint_bounds(symmetric, kind=kind)
    runner.test("S + S* bounds are sampled", sampled.method is BoundsMethod.SAMPLED_SEARCH)
    runner.test("sampled M(F) bracket is ordered", sampled.M_lower <= sampled.M_upper + 1e-12)
    runner.test("S + S* has norm at most 2", sampled.M_upper <= 2.0 + 1e-9, str(sampled.to_dict()))
    runner.test_raises("bounds need a self-adjoint operator", NotSelfAdjoint, lambda: self_adjoint_bounds(S))

    V = BilateralShift()
    bilateral = V + adjoint(V)
    runner.test("V + V* is self-adjoint", is_self_adjoint(bilateral))
    sampled = self_adjoint_bounds(bilateral, kind=kind)
    runner.test("V + V* bounds sample integer-indexed vectors", sampled.method is BoundsMethod.SAMPLED_SEARCH)
    runner.test("V + V* bracket is ordered and at most 2",
                0.0 < sampled.M_lower <= sampled.M_upper + 1e-12 and sampled.M_upper <= 2.0 + 1e-9,
                str(sampled.to_dict()))


GROUPS = (run_action_tests, run_adjoint_tests, run_compatibility_tests, run_structure_tests)


def test_operators():
    assert run_script("OPERATOR TESTS", *GROUPS)


def main():
    sys.exit(0 if run_script("OPERATOR TESTS", *GROUPS) else 1)


if __name__ == "__main__":
    main()
