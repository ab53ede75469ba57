"""
Command-line front end.

    cstar-spectra check [DOCUMENT] [--operator S --element "0.5" ...]
    cstar-spectra witness [DOCUMENT]
    cstar-spectra verify SUITE [--seed N] [--scale small|full]
    cstar-spectra oracle-dump [DOCUMENT] [--section square|rectangular|complete]
    cstar-spectra serve

A DOCUMENT is a path, '-' for stdin, or inline JSON. Inline flags override
fields of the document. Reports go to stdout as JSON; logs go to stderr.

Exit codes: Out 0, In 1, BoundaryIndeterminate/Inconclusive 2, errors >= 10.
Boolean answers exit 0 when true and 1 when false.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .algebra import AlgebraElement, AlgebraKind, EssentiallyBounded, MatrixAlgebra
from .config import SpectraConfig, load_config
from .errors import InternalError, KindUnsupported, NotApplicable, ParseError, SpectraError
from .literals import element_from_literal, kind_from_spec, operator_from_literal
from .operators import (
    BilateralShift,
    DiagonalSelfAdjoint,
    DiagonalUnitary,
    ExpanderKind,
    OperatorExpr,
    UnilateralShift,
    WeightedShift,
    adjoint,
    block_shift,
    expander_operator,
)
from .oracle import Section, Trend, bounded_below_ladder, invertibility_verdict, kernel_search
from .spectra import (
    Certificate,
    CertificateKind,
    Membership,
    SpectrumPart,
    SpectrumVerdict,
    adjoint_shift_spectrum,
    approx_point_membership,
    bilateral_shift_point_spectrum,
    bilateral_shift_spectrum,
    block_shift_spectrum,
    bounded_below_implies_invertible,
    diagonal_unitary_spectrum,
    expander_point_spectra,
    expander_spectra,
    mn_shift_spectrum,
    normal_residual_empty_check,
    residual_point_duality,
    selfadjoint_spectrum_envelope,
    shift_cokernel_witness,
    shift_resolvent_solution,
    shift_spectrum_commutative,
    skew_resolvent_bound,
    unilateral_shift_point_spectrum,
    unilateral_shift_spectrum,
    unitary_norm_screen,
    weighted_shift_kernel_witness,
)

logger = logging.getLogger(__name__)

CATALOG = ("S", "S*", "V", "S~", "W'", "W''", "Z", "Z'", "F", "D",
           "weighted", "diagonal-unitary", "diagonal-self-adjoint")

QUESTIONS = ("full", "point", "commutative", "approx", "unitary-screen", "envelope", "skew-bound",
             "residual-duality", "normal-residual", "bounded-below", "kernel", "cokernel", "resolvent")

EXIT_CODES = {
    Membership.OUT: 0,
    Membership.IN: 1,
    Membership.BOUNDARY_INDETERMINATE: 2,
    Membership.INCONCLUSIVE: 2,
}


# =============================================================================
# Logging and output
# =============================================================================

def configure_logging():
    """stderr at WARNING; CSTAR_SPECTRA_DEBUG=1 switches to DEBUG."""
    level = logging.DEBUG if os.environ.get("CSTAR_SPECTRA_DEBUG") else logging.WARNING
    logging.basicConfig(stream=sys.stderr, level=level, format="%(levelname)s %(name)s: %(message)s")


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, complex):
        return [value.real, value.imag]
    if isinstance(value, (tuple, set)):
        return list(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def dumps(payload: dict[str, Any]) -> str:
    return json.dumps(payload, indent=2, default=_json_default)


def error_payload(error: SpectraError) -> dict[str, Any]:
    return {"error": error.to_dict()}


# =============================================================================
# Documents
# =============================================================================

def read_document(source: str | None) -> dict[str, Any]:
    """A path, '-' for stdin, or inline JSON; None gives an empty document."""
    if source is None:
        return {}
    if source == "-":
        text = sys.stdin.read()
    elif source.lstrip().startswith("{"):
        text = source
    else:
        try:
            text = Path(source).read_text()
        except OSError as e:
            raise ParseError(f"cannot read document {source}: {e}") from e
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"document is not valid JSON: {e.msg}", position=e.pos) from e
    if not isinstance(document, dict):
        raise ParseError("a query document must be a JSON object")
    return document


def apply_inline_flags(document: dict[str, Any], args: argparse.Namespace) -> dict[str, Any]:
    document = dict(document)
    for name in ("operator", "element", "question"):
        if (value := getattr(args, name, None)) is not None:
            document[name] = value
    algebra = dict(document.get("algebra") or {})
    if getattr(args, "kind", None) is not None:
        algebra["kind"] = args.kind
    if getattr(args, "resolution", None) is not None:
        algebra["resolution"] = args.resolution
    if getattr(args, "n", None) is not None:
        algebra["n"] = args.n
    if algebra:
        document["algebra"] = algebra
    if getattr(args, "index", None) is not None:
        document["index"] = args.index
    if getattr(args, "cross_check", False):
        document["cross_check"] = True
    return document


@dataclass(frozen=True)
class Query:
    """A parsed query document."""

    kind: AlgebraKind
    alpha: AlgebraElement
    operator_name: str
    operator: OperatorExpr
    question: str
    document: dict[str, Any]
    config: SpectraConfig

    @property
    def index(self) -> int:
        return int(self.document.get("index", 1))

    @property
    def seed(self) -> int:
        return int(self.document.get("seed", 0))


def _element_list(document: dict[str, Any], key: str, kind: AlgebraKind) -> tuple[AlgebraElement, ...]:
    literals = document.get(key)
    if not literals:
        raise ParseError(f"this operator needs a non-empty '{key}' list")
    return tuple(element_from_literal(item, kind) for item in literals)


def catalog_operator(name: str, document: dict[str, Any], kind: AlgebraKind) -> OperatorExpr:
    match name:
        case "S":
            return UnilateralShift()
        case "S*":
            return adjoint(UnilateralShift())
        case "V":
            return BilateralShift()
        case "S~":
            if not isinstance(kind, EssentiallyBounded):
                raise KindUnsupported("S~ is defined over the step algebra")
            return block_shift(kind)
        case "W'" | "W''" | "Z" | "Z'" | "F" | "D":
            opkind = ExpanderKind(name)
            if opkind.is_block and not isinstance(kind, EssentiallyBounded):
                raise KindUnsupported(f"{name} is defined over the step algebra")
            return expander_operator(opkind, kind)
        case "weighted":
            return WeightedShift(_element_list(document, "weights", kind))
        case "diagonal-unitary":
            return DiagonalUnitary(_element_list(document, "unitaries", kind))
        case "diagonal-self-adjoint":
            return DiagonalSelfAdjoint(_element_list(document, "diagonal", kind))
    raise ParseError(f"unknown operator '{name}' (catalog: {', '.join(CATALOG)})")


def parse_query(document: dict[str, Any], config_file: str | None = None) -> Query:
    if "element" not in document:
        raise ParseError("the document has no 'element'")
    config = load_config(config_file, document.get("config"))
    kind = kind_from_spec(document.get("algebra"))
    alpha = element_from_literal(document["element"], kind)
    question = document.get("question", "full")
    if question not in QUESTIONS:
        raise ParseError(f"unknown question '{question}' (expected one of {', '.join(QUESTIONS)})")

    raw = document.get("operator", "S")
    if isinstance(raw, str):
        name, operator = raw, catalog_operator(raw, document, kind)
    else:
        name, operator = "literal", operator_from_literal(raw, kind)
    return Query(kind, alpha, name, operator, question, document, config)


# =============================================================================
# Routing
# =============================================================================

Answer = SpectrumVerdict | Certificate | bool
Handler = Callable[[Query], Answer]


def _shift_full(q: Query) -> Answer:
    if isinstance(q.kind, MatrixAlgebra):
        return mn_shift_spectrum(q.alpha, q.config)
    return unilateral_shift_spectrum(q.alpha, q.config)


def _expander(point: bool) -> Handler:
    def handler(q: Query) -> Answer:
        if point:
            return expander_point_spectra(q.operator_name, q.alpha, q.config)
        return expander_spectra(q.operator_name, q.alpha, q.config)
    return handler


def _weighted(q: Query) -> Answer:
    return weighted_shift_kernel_witness(q.alpha, q.operator.weights, q.index, q.config)


RULES: dict[tuple[str, str], Handler] = {
    ("S", "full"): _shift_full,
    ("S", "point"): lambda q: unilateral_shift_point_spectrum(q.alpha, q.config),
    ("S", "kernel"): lambda q: unilateral_shift_point_spectrum(q.alpha, q.config),
    ("S", "commutative"): lambda q: shift_spectrum_commutative(q.alpha, q.config),
    ("S", "cokernel"): lambda q: shift_cokernel_witness(q.alpha, config=q.config),
    ("S", "resolvent"): lambda q: shift_resolvent_solution(q.alpha, q.index, config=q.config),
    ("S*", "full"): lambda q: adjoint_shift_spectrum(q.alpha, q.config),
    ("S*", "kernel"): lambda q: adjoint_shift_spectrum(q.alpha, q.config),
    ("V", "full"): lambda q: bilateral_shift_spectrum(q.alpha, q.config),
    ("V", "point"): lambda q: bilateral_shift_point_spectrum(q.alpha, q.config),
    ("V", "kernel"): lambda q: bilateral_shift_point_spectrum(q.alpha, q.config),
    ("S~", "full"): lambda q: block_shift_spectrum(q.alpha, q.config),
    ("weighted", "point"): _weighted,
    ("weighted", "kernel"): _weighted,
    ("diagonal-unitary", "full"): lambda q: diagonal_unitary_spectrum(q.alpha, q.operator.alphas, q.config),
    ("diagonal-self-adjoint", "full"): lambda q: bounded_below_implies_invertible(q.operator, q.alpha, q.config),
}
for _name in ("W'", "W''", "Z", "Z'", "F", "D"):
    RULES[(_name, "full")] = _expander(point=False)
    RULES[(_name, "cokernel")] = _expander(point=False)
    RULES[(_name, "point")] = _expander(point=True)
    RULES[(_name, "kernel")] = _expander(point=True)


def _oracle_only(q: Query) -> Answer:
    report = invertibility_verdict(q.operator, q.alpha, q.config)
    membership = {Trend.SINGULAR: Membership.IN,
                  Trend.BOUNDED_BELOW: Membership.OUT}.get(report.trend, Membership.BOUNDARY_INDETERMINATE)
    return SpectrumVerdict(membership, SpectrumPart.FULL, Certificate(CertificateKind.ORACLE, oracle=report),
                           "oracle-only")


def _oracle_kernel(q: Query) -> Answer:
    candidates = kernel_search(q.operator, q.alpha, config=q.config)
    if candidates:
        best = candidates[0]
        return SpectrumVerdict(Membership.IN, SpectrumPart.POINT,
                               Certificate(CertificateKind.KERNEL, vector=best.vector, residual=best.residual),
                               "oracle-only", {"fiber": best.fiber, "interior_mass": best.interior_mass})
    return SpectrumVerdict(Membership.INCONCLUSIVE, SpectrumPart.POINT,
                           Certificate(CertificateKind.NONE, reason="no interior kernel vector at this depth"),
                           "oracle-only")


GENERIC: dict[str, Handler] = {
    "full": _oracle_only,
    "point": _oracle_kernel,
    "kernel": _oracle_kernel,
    "approx": lambda q: approx_point_membership(q.operator, q.alpha, q.config),
    "unitary-screen": lambda q: unitary_norm_screen(q.alpha, q.config),
    "envelope": lambda q: selfadjoint_spectrum_envelope(q.operator, q.alpha, q.config),
    "skew-bound": lambda q: skew_resolvent_bound(q.operator, q.alpha, q.config),
    "residual-duality": lambda q: residual_point_duality(q.operator, q.alpha, config=q.config, seed=q.seed),
    "normal-residual": lambda q: normal_residual_empty_check(q.operator, q.alpha, q.config, seed=q.seed),
    "bounded-below": lambda q: bounded_below_implies_invertible(q.operator, q.alpha, q.config),
}


def route(q: Query) -> Handler:
    if (handler := RULES.get((q.operator_name, q.question))) is not None:
        return handler
    if (handler := GENERIC.get(q.question)) is not None:
        return handler
    raise NotApplicable(f"question '{q.question}' is not defined for operator '{q.operator_name}'")


def evaluate(document: dict[str, Any], config_file: str | None = None) -> tuple[dict[str, Any], int]:
    """Run one query; returns the JSON payload and the exit code."""
    q = parse_query(document, config_file)
    answer = route(q)(q)
    payload: dict[str, Any] = {"operator": q.operator_name, "question": q.question}

    match answer:
        case SpectrumVerdict():
            payload.update(answer.to_dict())
            code = EXIT_CODES[answer.membership]
        case Certificate():
            payload["certificate"] = answer.to_dict()
            code = 0
        case _:
            payload["answer"] = bool(answer)
            code = 0 if answer else 1

    if document.get("cross_check"):
        payload["oracle"] = invertibility_verdict(q.operator, q.alpha, q.config).to_dict()
    return payload, code


def build_witness(document: dict[str, Any], config_file: str | None = None) -> dict[str, Any]:
    """The certificate of a witness-producing rule; NotApplicable when there is no vector."""
    q = parse_query(document, config_file)
    answer = route(q)(q)
    certificate = answer.certificate if isinstance(answer, SpectrumVerdict) else answer
    if not isinstance(certificate, Certificate) or certificate.vector is None:
        verdict = answer.membership.value if isinstance(answer, SpectrumVerdict) else "no certificate"
        raise NotApplicable(f"the rule yields no witness vector ({verdict})")
    return {"operator": q.operator_name, "question": q.question, "certificate": certificate.to_dict()}


def oracle_dump(document: dict[str, Any], section: str, config_file: str | None = None):
    q = parse_query(document, config_file)
    try:
        section = Section(section)
    except ValueError as e:
        raise ParseError(f"unknown section '{section}'") from e
    return bounded_below_ladder(q.operator, q.alpha, section=section, config=q.config)


# =============================================================================
# Commands
# =============================================================================

def _emit(text: str, path: str | None):
    if path:
        Path(path).write_text(text + "\n")
    else:
        print(text)


def _query_document(args: argparse.Namespace) -> dict[str, Any]:
    return apply_inline_flags(read_document(args.document), args)


def cmd_check(args: argparse.Namespace) -> int:
    payload, code = evaluate(_query_document(args), args.config)
    _emit(dumps(payload), args.json)
    return code


def cmd_witness(args: argparse.Namespace) -> int:
    _emit(dumps(build_witness(_query_document(args), args.config)), args.json)
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    from .suites import run_suite

    result = run_suite(args.suite, args.seed, args.scale, load_config(args.config))
    _emit(dumps(result.to_dict()), args.json)
    return 0 if result.passed else 1


def cmd_oracle_dump(args: argparse.Namespace) -> int:
    report = oracle_dump(_query_document(args), args.section, args.config)
    sys.stdout.write(report.to_csv())
    if args.json:
        Path(args.json).write_text(dumps(report.to_dict()) + "\n")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .server import mcp

    mcp.run()
    return 0


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors raise ParseError so they keep the >= 10 exit codes."""

    def error(self, message: str):
        raise ParseError(f"{self.prog}: {message}")


def _add_query_flags(parser: argparse.ArgumentParser):
    parser.add_argument("document", nargs="?", help="path, '-' for stdin, or inline JSON")
    parser.add_argument("--operator", help=f"catalog name ({', '.join(CATALOG)})")
    parser.add_argument("--element", help="element expression, e.g. \"0.5 + t\"")
    parser.add_argument("--question", choices=QUESTIONS)
    parser.add_argument("--kind", choices=("continuous", "step", "matrix"))
    parser.add_argument("--resolution", type=int)
    parser.add_argument("--n", type=int, help="matrix size for --kind matrix")
    parser.add_argument("--index", type=int, help="target or weight index")
    parser.add_argument("--cross-check", action="store_true", help="attach an oracle report")


def build_parser() -> argparse.ArgumentParser:
    parser = ArgumentParser(prog="cstar-spectra",
                            description="Generalized spectra of operators on Hilbert C*-modules.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--json", metavar="PATH", help="write the report to PATH")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="decide spectral membership")
    _add_query_flags(check)
    check.set_defaults(handler=cmd_check)

    witness = sub.add_parser("witness", parents=[common], help="emit a verified witness vector")
    _add_query_flags(witness)
    witness.set_defaults(handler=cmd_witness)

    verify = sub.add_parser("verify", parents=[common], help="run a verification suite")
    verify.add_argument("suite")
    verify.add_argument("--seed", type=int, default=0)
    verify.add_argument("--scale", choices=("small", "full"), default="small")
    verify.set_defaults(handler=cmd_verify)

    dump = sub.add_parser("oracle-dump", parents=[common], help="CSV of the oracle ladder")
    _add_query_flags(dump)
    dump.add_argument("--section", default="square", choices=[s.value for s in Section])
    dump.set_defaults(handler=cmd_oracle_dump)

    serve = sub.add_parser("serve", help="run the MCP server over stdio")
    serve.set_defaults(handler=cmd_serve)
    return parser


def run(argv: list[str] | None = None) -> int:
    configure_logging()
    try:
        args = build_parser().parse_args(argv)
        return args.handler(args)
    except SpectraError as e:
        logger.debug("command failed", exc_info=True)
        print(dumps(error_payload(e)))
        return e.code
    except Exception as e:
        logger.exception("command failed unexpectedly")
        error = InternalError(f"{type(e).__name__}: {e}")
        print(dumps(error_payload(error)))
        return error.code
