"""
Expression grammar for function-algebra elements.

Supports complex literals (``2``, ``0.5``, ``3i``), the variable ``t``, the
imaginary unit ``i``, ``pi``, the operators ``+ - * / ^``, parentheses, the
functions exp/sin/cos/abs and ``indicator(a, b)`` (the open interval (a, b)).

Parsing produces a tree of small evaluators; evaluation samples the tree on
the grid of the requested kind. Over a matrix algebra the expression must be
constant and denotes a multiple of the identity.
"""

from __future__ import annotations

from typing import Callable

import numpy as np
from pyparsing import (
    Forward,
    Keyword,
    MatchFirst,
    OpAssoc,
    ParseBaseException,
    ParserElement,
    Regex,
    Suppress,
    infix_notation,
    one_of,
)

from .algebra import AlgebraElement, AlgebraKind, MatrixAlgebra, scalar
from .errors import EvalError, ParseError

# Packrat caching keeps infix_notation fast
ParserElement.enable_packrat()

# An evaluator maps the sample points (or None over a matrix algebra) to values
Evaluator = Callable[[np.ndarray | None], "np.ndarray | complex"]


def _constant(value: complex) -> Evaluator:
    return lambda t: value


def _variable(t: np.ndarray | None):
    if t is None:
        raise EvalError("the variable t is not defined over a matrix algebra")
    return t


def _checked(values, what: str):
    if not np.all(np.isfinite(values)):
        raise EvalError(f"{what} produced a non-finite value")
    return values


def _divide(a, b, t):
    zero = np.asarray(b) == 0
    if np.any(zero):
        if t is not None and np.ndim(b) > 0:
            where = float(t[np.argmax(zero)])
            raise EvalError(f"division by zero at t = {where:.6g}")
        raise EvalError("division by zero")
    return np.divide(a, b)


def _power(a, b, t):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return _checked(np.power(np.asarray(a, dtype=np.complex128), b), "power")


fn_map = {
    "exp": np.exp,
    "sin": np.sin,
    "cos": np.cos,
    "abs": np.abs,
}

op1_map = {
    "+": lambda x: x,
    "-": np.negative,
}

op2_map = {
    "+": lambda a, b, t: np.add(a, b),
    "-": lambda a, b, t: np.subtract(a, b),
    "*": lambda a, b, t: np.multiply(a, b),
    "/": _divide,
    "^": _power,
}


def _eval_single(tokens):
    op, operand = tokens[0]
    return lambda t: op1_map[op](operand(t))


def _eval_pair(reverse=False):
    def handler(tokens):
        items = list(tokens[0])
        operands, operators = items[0::2], items[1::2]

        def evaluate(t):
            values = [operand(t) for operand in operands]
            if reverse:
                result = values[-1]
                for op, value in zip(reversed(operators), reversed(values[:-1])):
                    result = op2_map[op](value, result, t)
                return result
            result = values[0]
            for op, value in zip(operators, values[1:]):
                result = op2_map[op](result, value, t)
            return result

        return evaluate
    return handler


def _eval_func(tokens):
    fn, argument = fn_map[tokens[0]], tokens[1]
    return lambda t: fn(argument(t))


def _eval_indicator(tokens):
    lower_expr, upper_expr = tokens[1], tokens[2]

    def evaluate(t):
        lower, upper = complex(lower_expr(None)), complex(upper_expr(None))
        if lower.imag or upper.imag:
            raise EvalError("indicator bounds must be real")
        if t is None:
            raise EvalError("indicator() is not defined over a matrix algebra")
        return ((t > lower.real) & (t < upper.real)).astype(float)

    return evaluate


def _construct_grammar():
    real = Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
    imaginary = Regex(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i(?![A-Za-z0-9_])")
    real.set_parse_action(lambda tokens: _constant(complex(float(tokens[0]))))
    imaginary.set_parse_action(lambda tokens: _constant(complex(0.0, float(tokens[0][:-1]))))

    variable = Keyword("t").set_parse_action(lambda: _variable)
    unit_i = Keyword("i").set_parse_action(lambda: _constant(1j))
    pi = Keyword("pi").set_parse_action(lambda: _constant(complex(np.pi)))

    expr = Forward()
    func_ident = MatchFirst([Keyword(fn) for fn in fn_map])
    func_call = (func_ident + Suppress("(") + expr + Suppress(")")).set_parse_action(_eval_func)
    indicator_call = (Keyword("indicator") + Suppress("(") + expr + Suppress(",") + expr
                      + Suppress(")")).set_parse_action(_eval_indicator)

    atom = indicator_call | func_call | imaginary | real | variable | unit_i | pi
    expr <<= infix_notation(
        atom,
        [
            ("^",            2, OpAssoc.LEFT, _eval_pair(reverse=True)),
            (one_of("+ -"),  1, OpAssoc.RIGHT, _eval_single),
            (one_of("* /"),  2, OpAssoc.LEFT, _eval_pair()),
            (one_of("+ -"),  2, OpAssoc.LEFT, _eval_pair()),
        ],
    )
    return expr


GRAMMAR = _construct_grammar()


def parse_tree(text: str) -> Evaluator:
    """Parse ``text`` into an evaluator; raises ParseError with the failing column."""
    try:
        return GRAMMAR.parse_string(text, parse_all=True)[0]
    except ParseBaseException as e:
        raise ParseError(f"cannot parse {text!r}: {e.msg} at column {e.col}", position=e.loc) from e


def parse_expression(text: str, kind: AlgebraKind) -> AlgebraElement:
    """Sample the expression on the grid of ``kind``."""
    evaluator = parse_tree(text)
    if isinstance(kind, MatrixAlgebra):
        value = evaluator(None)
        if np.ndim(value) != 0:
            raise EvalError("matrix-kind expressions must be constant")
        return scalar(kind, complex(value))

    t = kind.sample_points()
    with np.errstate(over="ignore", invalid="ignore"):
        values = evaluator(t)
    values = _checked(np.broadcast_to(np.asarray(values, dtype=np.complex128), t.shape), "expression")
    return AlgebraElement(kind, values)
