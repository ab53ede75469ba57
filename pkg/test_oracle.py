#!/usr/bin/env python3
"""
Tests for the truncation oracle: finite sections, singular value ladders,
kernel search and least-squares solving.

Usage:
    source ./devsetup.sh
    python test_oracle.py
"""

import sys

from testrunner import TestRunner, run_script

import numpy as np

from cstar_spectra.algebra import EssentiallyBounded, GridSpec, MatrixAlgebra, make_element, scalar, scalar_kind
from cstar_spectra.config import DEFAULT_CONFIG
from cstar_spectra.errors import ShapeMismatch
from cstar_spectra.module import ModuleVector, Natural, basis_vector
from cstar_spectra.operators import (
    BilateralShift,
    DyadicCompress,
    DyadicExpand,
    OddCompress,
    OddExpand,
    UnilateralShift,
    WeightedShift,
    adjoint,
    apply,
    indexing_for,
)
from cstar_spectra.oracle import (
    OracleVerdict,
    Section,
    Trend,
    bounded_below_ladder,
    classify_ladder,
    extrapolate,
    flatten,
    invertibility_verdict,
    kernel_search,
    ladder_depths,
    min_singular,
    residual_at_depth,
    residual_on_rows,
    scaled_depth,
    solve,
)


def run_section_tests(runner: TestRunner):
    runner.section("Finite sections")

    S = UnilateralShift()
    square = flatten(S, 4)
    runner.test("square section of S is the lower shift matrix", np.array_equal(square.fibers[0], np.eye(4, k=-1)))
    runner.test("scalar kind carries two fibers", square.fibers.shape == (2, 4, 4))

    rectangular = flatten(S, 4, section=Section.RECTANGULAR)
    runner.test("rectangular section keeps twice the rows", rectangular.fibers.shape == (2, 8, 4))
    runner.test("rectangular section of an isometry has sigma_min 1", abs(min_singular(rectangular) - 1.0) < 1e-12)
    runner.test("square section of S is singular", min_singular(square) < 1e-12)

    complete = flatten(adjoint(S), 4, section=Section.COMPLETE)
    runner.test("complete section of S* drops the row that leaks", complete.fibers.shape == (2, 3, 4))

    bilateral = flatten(BilateralShift(), 2)
    runner.test("V is flattened over -N..N", bilateral.fibers.shape == (2, 5, 5))

    step = EssentiallyBounded(GridSpec(8))
    runner.test("screened fibers are honored", flatten(S, 4, step, fibers=[3, 1]).fiber_ids.tolist() == [1, 3])
    runner.test("matrix kinds flatten to one matrix", flatten(S, 3, MatrixAlgebra(2)).fibers.shape == (1, 12, 12))
    runner.test_raises("depth 0 is rejected", ShapeMismatch, lambda: flatten(S, 0))

    runner.test("matrix depth is scaled by n", scaled_depth(MatrixAlgebra(2), 128) == 32)
    runner.test("function depth is unscaled", scaled_depth(step, 128) == 128)
    runner.test("scaled ladders stay strictly increasing",
                ladder_depths(MatrixAlgebra(4), (16, 32, 64, 128)) == (2, 3, 4, 8))


def run_classification_tests(runner: TestRunner):
    runner.section("Ladder classification")

    verdict, bound = classify_ladder([1.0, 1.0, 1.0], 1e-8)
    runner.test("stable ladder is certified", verdict is OracleVerdict.CERTIFIED and bound == 1.0)
    verdict, _ = classify_ladder([1.0, 0.4, 0.1], 1e-8)
    runner.test("halving ladder is near singular", verdict is OracleVerdict.NEAR_SINGULAR)
    verdict, _ = classify_ladder([1.0, 0.5, 1e-9], 1e-8)
    runner.test("a value below tolerance is near singular", verdict is OracleVerdict.NEAR_SINGULAR)
    verdict, _ = classify_ladder([1.0, 0.7, 0.5], 1e-8)
    runner.test("drifting ladder is indeterminate", verdict is OracleVerdict.INDETERMINATE)

    trend, estimate = extrapolate([1.0, 1.0, 0.9], OracleVerdict.INDETERMINATE, None, 1e-8)
    runner.test("mild drift extrapolates to bounded below", trend is Trend.BOUNDED_BELOW and estimate > 0.8)
    trend, estimate = extrapolate([2.0, 1.0, 0.5], OracleVerdict.INDETERMINATE, None, 1e-8)
    runner.test("1/N decay extrapolates to singular", trend is Trend.SINGULAR and estimate == 0.0)
    trend, estimate = extrapolate([1.0, 1.0, 1.0], OracleVerdict.CERTIFIED, 1.0, 1e-8)
    runner.test("certified ladder keeps its bound", trend is Trend.BOUNDED_BELOW and estimate == 1.0)


def run_ladder_tests(runner: TestRunner):
    runner.section("Ladders")

    kind = scalar_kind()
    S = UnilateralShift()

    outside = bounded_below_ladder(S, scalar(kind, 2.0))
    runner.test("S - 2 is certified bounded below", outside.verdict is OracleVerdict.CERTIFIED,
                str(outside.sv_min))
    runner.test("S - 2 has sigma_min near 1", 1.0 - 1e-9 <= outside.bound <= 1.01, str(outside.bound))

    inside = bounded_below_ladder(S, scalar(kind, 0.5))
    runner.test("square sections of S - 1/2 are near singular", inside.trend is Trend.SINGULAR,
                str(inside.sv_min))

    approx = bounded_below_ladder(S, scalar(kind, 0.5), section=Section.RECTANGULAR)
    runner.test("S - 1/2 is bounded below on rectangular sections", approx.trend is Trend.BOUNDED_BELOW,
                str(approx.sv_min))
    runner.test("the rectangular bound is at least 1/2", min(approx.sv_min) >= 0.5 - 1e-9)

    csv_text = outside.to_csv()
    runner.test("CSV has a header", csv_text.splitlines()[0] == "depth,fiber,sv_min")
    runner.test("CSV has one row per depth and fiber", len(csv_text.splitlines()) == 1 + 4 * 2)
    report = outside.to_dict()
    runner.test("report is labeled as an estimate", report["evidence"] == "finite-section estimate")

    runner.test_raises("short ladders are rejected", ShapeMismatch,
                       lambda: bounded_below_ladder(S, scalar(kind, 2.0), depths=(8, 16)))


def run_kernel_tests(runner: TestRunner):
    runner.section("Kernel search")

    kind = scalar_kind()
    S = UnilateralShift()

    runner.test("S - 1/2 has no kernel", kernel_search(S, scalar(kind, 0.5), 64) == [])
    candidates = kernel_search(adjoint(S), scalar(kind, 0.5), 64)
    runner.test("S* - 1/2 has an interior kernel vector", bool(candidates))
    if candidates:
        best = candidates[0]
        ratio = best.vector.coords[1, best.fiber] / best.vector.coords[0, best.fiber]
        runner.test("the kernel vector is geometric with ratio 1/2", abs(ratio - 0.5) < 1e-8, str(ratio))
        runner.test("the kernel vector has small residual", best.residual < 1e-8)
        runner.test("the kernel vector lives in the interior", best.interior_mass >= 0.9)

    runner.test("S* - 2 has no interior kernel vector", kernel_search(adjoint(S), scalar(kind, 2.0), 64) == [])
    ladders = kernel_search(DyadicCompress(), scalar(kind, 0.5), 64)
    runner.test("Z - 1/2 has kernel vectors", bool(ladders) and ladders[0].residual < 1e-8)

    runner.section("Invertibility verdict")

    report = invertibility_verdict(S, scalar(kind, 0.5))
    runner.test("S - 1/2 is singular", report.trend is Trend.SINGULAR)
    runner.test("the adjoint kernel is reported", bool(report.kernel_candidates))
    report = invertibility_verdict(S, scalar(kind, 2.0))
    runner.test("S - 2 is bounded below with no kernels",
                report.trend is Trend.BOUNDED_BELOW and not report.kernel_candidates)


def run_solve_tests(runner: TestRunner):
    runner.section("Solving")

    kind = scalar_kind()
    S = UnilateralShift()
    target = basis_vector(1, kind, Natural(48))

    outside = solve(S, scalar(kind, 2.0), target)
    runner.test("(S - 2) x = e_1 is solved", outside.residual < 1e-10)
    runner.test("the solution of (S - 2) x = e_1 converges", not outside.diverging, str(outside.solution_norms))
    first = outside.solution.entry(1).data[0]
    runner.test("x_1 = -1/2", abs(first + 0.5) < 1e-10, str(first))

    inside = solve(S, scalar(kind, 0.5), target)
    runner.test("(S - 1/2) x = e_1 diverges", inside.diverging, str(inside.solution_norms))
    runner.test("solve depths are N/4, N/2, N", inside.depths == (12, 24, 48))

    image_norm = residual_on_rows(S, scalar(kind, 0.0), target)
    runner.test("residual_on_rows measures the interior image", abs(image_norm - 1.0) < 1e-12)
    runner.test("the image of e_N/2 leaves the interior",
                residual_on_rows(S, scalar(kind, 0.0), basis_vector(24, kind, Natural(48))) == 0.0)


def random_vector(rng: np.random.Generator, kind, indexing) -> ModuleVector:
    shape = (indexing.size, *kind.element_shape)
    return ModuleVector(kind, indexing, rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def operator_panel(kind) -> dict:
    rng = np.random.default_rng(5)
    weights = tuple(make_element(kind, rng.standard_normal(kind.element_shape)) for _ in range(2))
    S = UnilateralShift()
    return {
        "S": S,
        "S*": adjoint(S),
        "V": BilateralShift(),
        "W'": DyadicExpand(),
        "W''": OddExpand(),
        "Z": DyadicCompress(),
        "Z'": OddCompress(),
        "weighted shift": WeightedShift(weights),
        "S + W' S*": S + DyadicExpand() @ adjoint(S),
    }


def run_invariant_tests(runner: TestRunner):
    runner.section("Fiberwise exactness (seeded random panel)")

    rng = np.random.default_rng(4242)
    for label, kind in (("step", EssentiallyBounded(GridSpec(4))), ("M_2", MatrixAlgebra(2))):
        for name, op in operator_panel(kind).items():
            indexing = indexing_for(op, 6)
            x = random_vector(rng, kind, indexing)
            for section, image in ((Section.SQUARE, apply(op, x)),
                                   (Section.RECTANGULAR, apply(op, x.resized(indexing.scaled(2))))):
                ft = flatten(op, 6, kind, section)
                if isinstance(kind, MatrixAlgebra):
                    exact = np.allclose(ft.fibers[0] @ x.coords.reshape(-1), image.coords.reshape(-1),
                                        rtol=0.0, atol=1e-12)
                else:
                    exact = all(np.allclose(ft.fibers[i] @ x.coords[:, f], image.coords[:, f], rtol=0.0, atol=1e-12)
                                for i, f in enumerate(ft.fiber_ids))
                runner.test(f"{section.value} section of {name} matches apply over {label}", exact)

    runner.section("Adjoint coherence (seeded random panel)")

    kind = EssentiallyBounded(GridSpec(4))
    for name, op in operator_panel(kind).items():
        forward = min_singular(flatten(op, 12, kind))
        backward = min_singular(flatten(adjoint(op), 12, kind))
        runner.test(f"sigma_min of {name} equals sigma_min of its adjoint", abs(forward - backward) < 1e-9,
                    f"{forward} vs {backward}")

    runner.section("Kernel candidates at double depth")

    kind = scalar_kind()
    step = EssentiallyBounded(GridSpec(4))
    half = make_element(step, [0.5, 0.25, 2.0, 0.5j])
    searches = {
        "S* - 1/2": (adjoint(UnilateralShift()), scalar(kind, 0.5), 32),
        "Z - 1/2": (DyadicCompress(), scalar(kind, 0.5), 32),
        "Z' - 1/3": (OddCompress(), scalar(kind, 1 / 3), 32),
        "S* - alpha over step functions": (adjoint(UnilateralShift()), half, 32),
        "W'' - 1": (OddExpand(), scalar(kind, 1.0), 16),
    }
    tol = DEFAULT_CONFIG.oracle_sv_tol
    for name, (op, alpha, N) in searches.items():
        candidates = kernel_search(op, alpha, N)
        runner.test(f"{name} has kernel candidates", bool(candidates))
        worst = max((residual_at_depth(op, alpha, c, 2 * N) for c in candidates), default=0.0)
        runner.test(f"{name} candidates keep their residual at depth 2N", worst <= tol, f"worst = {worst:.3g}")
        worst = max((abs(residual_at_depth(op, alpha, c, 2 * N) - c.residual) for c in candidates), default=0.0)
        runner.test(f"{name} residuals agree across depths", worst < 1e-12, f"worst = {worst:.3g}")


GROUPS = (run_section_tests, run_classification_tests, run_ladder_tests, run_kernel_tests, run_solve_tests,
          run_invariant_tests)


def test_oracle():
    assert run_script("ORACLE TESTS", *GROUPS)


def main():
    sys.exit(0 if run_script("ORACLE TESTS", *GROUPS) else 1)


if __name__ == "__main__":
    main()
