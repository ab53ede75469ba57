"""
Error types for cstar-spectra.

Every error carries a stable ``code`` used as the CLI exit status and a short
``kind`` string used in JSON error payloads.
"""

from __future__ import annotations

from typing import Any


class SpectraError(Exception):
    """Base class for all library errors."""

    code = 15
    kind = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self) -> dict[str, Any]:
        payload: dict[str, Any] = {"kind": self.kind, "message": self.message}
        payload.update(self.details)
        return payload


# =============================================================================
# Input errors
# =============================================================================

class ParseError(SpectraError):
    code = 10
    kind = "parse_error"

    def __init__(self, message: str, position: int | None = None, **details: Any):
        super().__init__(message, position=position, **details)
        self.position = position


class EvalError(SpectraError):
    code = 10
    kind = "eval_error"


class ConfigError(SpectraError):
    code = 11
    kind = "config_error"


# =============================================================================
# Shape and kind errors
# =============================================================================

class ShapeMismatch(SpectraError):
    code = 12
    kind = "shape_mismatch"


class NonFiniteEntry(SpectraError):
    code = 12
    kind = "non_finite_entry"


class KindMismatch(SpectraError):
    code = 12
    kind = "kind_mismatch"


class IndexingMismatch(SpectraError):
    code = 12
    kind = "indexing_mismatch"


class IndexOutOfRange(SpectraError):
    code = 12
    kind = "index_out_of_range"


class KindUnsupported(SpectraError):
    code = 12
    kind = "kind_unsupported"


# =============================================================================
# Rule errors
# =============================================================================

class NotApplicable(SpectraError):
    code = 13
    kind = "not_applicable"


class NotInvertible(SpectraError):
    code = 13
    kind = "not_invertible"

    def __init__(self, message: str, inf_abs: float, **details: Any):
        super().__init__(message, inf_abs=inf_abs, **details)
        self.inf_abs = inf_abs


class UnknownSuite(SpectraError):
    code = 14
    kind = "unknown_suite"


class PreconditionFailed(SpectraError):
    code = 15
    kind = "precondition_failed"


class PreconditionNotCertified(PreconditionFailed):
    kind = "precondition_not_certified"


class NotCommutative(PreconditionFailed):
    kind = "not_commutative"


class NotSelfAdjoint(PreconditionFailed):
    kind = "not_self_adjoint"


class NotNormal(PreconditionFailed):
    kind = "not_normal"


class SkewPartNotInvertible(PreconditionFailed):
    kind = "skew_part_not_invertible"


class DifferenceNotInvertible(PreconditionFailed):
    kind = "difference_not_invertible"

    def __init__(self, message: str, pairing: float | None = None, **details: Any):
        super().__init__(message, pairing=pairing, **details)
        self.pairing = pairing


class BoundsNotClosedForm(PreconditionFailed):
    kind = "bounds_not_closed_form"


class WitnessCheckFailed(SpectraError):
    """A constructed witness failed its own verification (an internal bug)."""

    code = 16
    kind = "witness_check_failed"


class InternalError(SpectraError):
    """Any other exception escaping a command."""

    code = 17
    kind = "internal_error"
