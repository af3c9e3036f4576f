import logging
import math
import re
from typing import Iterable, Mapping, Sequence

import numpy as np

from app.error import ExpressionDomainError, ExpressionSyntaxError, JetDomainError, UnknownSymbol
from app.expression.schema import (
    Binary,
    Call,
    Constant,
    Coordinate,
    Expr,
    Parameter,
    Token,
    Unary,
)
from app.jet.algebra import JetAlgebra
from app.jet.services import JET_FUNCTIONS, Jet, jet_lift

logger = logging.getLogger(__name__)

BUILTIN_CONSTANTS = {"pi": math.pi, "e": math.e}
FUNCTION_ALIASES = {"log": "ln"}
FUNCTION_NAMES = frozenset(JET_FUNCTIONS) | frozenset(FUNCTION_ALIASES)
RESERVED_NAMES = frozenset(BUILTIN_CONSTANTS) | FUNCTION_NAMES

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?", re.ASCII)
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_SINGLE = {
    "+": "plus",
    "-": "minus",
    "*": "star",
    "/": "slash",
    "^": "caret",
    "(": "lparen",
    ")": "rparen",
    ",": "comma",
}

# Binary operators: (precedence, associativity). Unary minus binds like * and /, looser than ^.
BINARY_OPERATORS = {
    "plus": (1, "left", "+"),
    "minus": (1, "left", "-"),
    "star": (2, "left", "*"),
    "slash": (2, "left", "/"),
    "caret": (4, "right", "^"),
}
UNARY_MINUS_PRECEDENCE = 2


def _is_digit(c: str) -> bool:
    # str.isdigit also accepts superscripts and other scripts
    return c.isascii() and c.isdigit()


def tokenize(src: str) -> list[Token]:
    tokens: list[Token] = []
    idx = 0
    while idx < len(src):
        c = src[idx]
        if c.isspace():
            idx += 1
            continue
        offset = len(src[:idx].encode("utf-8"))
        if _is_digit(c) or (c == "." and idx + 1 < len(src) and _is_digit(src[idx + 1])):
            m = _NUMBER.match(src, idx)
            tokens.append(Token("num", m.group(), offset, float(m.group())))
            idx = m.end()
            continue
        if c.isascii() and (c.isalpha() or c == "_"):
            m = _IDENT.match(src, idx)
            tokens.append(Token("ident", m.group(), offset))
            idx = m.end()
            continue
        if c in _SINGLE:
            tokens.append(Token(_SINGLE[c], c, offset))
            idx += 1
            continue
        raise ExpressionSyntaxError(f"illegal character {c!r} at byte offset {offset}")
    return tokens


class _TokenStream:
    def __init__(self, tokens: Sequence[Token], end_offset: int):
        self.tokens = list(tokens)
        self.pos = 0
        self.end_offset = end_offset

    def peek(self) -> Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def pop(self) -> Token:
        token = self.peek()
        if token is None:
            raise ExpressionSyntaxError(f"unexpected end of input at byte offset {self.end_offset}")
        self.pos += 1
        return token

    def expect(self, kind: str, what: str) -> Token:
        token = self.peek()
        if token is None:
            raise ExpressionSyntaxError(f"expected {what} at byte offset {self.end_offset}")
        if token.kind != kind:
            raise ExpressionSyntaxError(
                f"expected {what}, found {token.text!r} at byte offset {token.offset}"
            )
        return self.pop()


def parse(
    tokens: Sequence[Token],
    coordinates: Sequence[str] = (),
    parameters: Iterable[str] = (),
) -> Expr:
    """Precedence-climbing parse; identifiers bind to coordinates, parameters or pi/e."""
    coord_index = {name: i for i, name in enumerate(coordinates)}
    param_names = frozenset(parameters)
    end_offset = tokens[-1].offset + len(tokens[-1].text.encode("utf-8")) if tokens else 0
    stream = _TokenStream(tokens, end_offset)

    def resolve(token: Token) -> Expr:
        name = token.text
        if name in coord_index:
            return Coordinate(name, coord_index[name], token.offset)
        if name in param_names:
            return Parameter(name, token.offset)
        if name in BUILTIN_CONSTANTS:
            return Constant(BUILTIN_CONSTANTS[name], token.offset)
        if name in FUNCTION_NAMES:
            raise ExpressionSyntaxError(
                f"function {name!r} used without argument at byte offset {token.offset}"
            )
        raise UnknownSymbol(f"unknown name {name!r} at byte offset {token.offset}")

    def atom(min_prec: int) -> Expr:
        token = stream.pop()
        if token.kind == "minus":
            # an exponent keeps its own binding: 2^-x*y is (2^-x)*y
            return Unary("neg", climb(max(UNARY_MINUS_PRECEDENCE, min_prec)), token.offset)
        if token.kind == "lparen":
            inner = climb(0)
            stream.expect("rparen", "')'")
            return inner
        if token.kind == "num":
            return Constant(token.value, token.offset)
        if token.kind == "ident":
            following = stream.peek()
            if following is not None and following.kind == "lparen":
                fn = FUNCTION_ALIASES.get(token.text, token.text)
                if fn not in JET_FUNCTIONS:
                    raise UnknownSymbol(f"unknown function {token.text!r} at byte offset {token.offset}")
                stream.pop()
                argument = climb(0)
                stream.expect("rparen", "')' closing the function call")
                return Call(fn, argument, token.offset)
            return resolve(token)
        raise ExpressionSyntaxError(f"unexpected token {token.text!r} at byte offset {token.offset}")

    def climb(min_prec: int) -> Expr:
        lhs = atom(min_prec)
        while (token := stream.peek()) is not None and token.kind in BINARY_OPERATORS:
            prec, assoc, symbol = BINARY_OPERATORS[token.kind]
            if prec < min_prec:
                return lhs
            stream.pop()
            next_prec = prec + 1 if assoc == "left" else prec
            rhs = climb(next_prec)
            lhs = Binary(symbol, lhs, rhs, token.offset)
        return lhs

    result = climb(0)
    leftover = stream.peek()
    if leftover is not None:
        raise ExpressionSyntaxError(
            f"unexpected token {leftover.text!r} at byte offset {leftover.offset}"
        )
    return result


def parse_expression(
    src: str, coordinates: Sequence[str] = (), parameters: Iterable[str] = ()
) -> Expr:
    return parse(tokenize(src), coordinates, parameters)


def split_expression_list(src: str) -> list[str]:
    """Split a comma-separated list of expressions at top-level commas."""
    pieces: list[str] = []
    depth = 0
    start = 0
    for idx, c in enumerate(src):
        if c == "(":
            depth += 1
        elif c == ")":
            depth -= 1
        elif c == "," and depth == 0:
            pieces.append(src[start:idx].strip())
            start = idx + 1
    pieces.append(src[start:].strip())
    return pieces


def to_source(e: Expr) -> str:
    """Fully parenthesised source text; parses back to the same tree."""
    if isinstance(e, Constant):
        text = repr(float(e.value))
        return f"({text})" if e.value < 0 else text
    if isinstance(e, (Coordinate, Parameter)):
        return e.name
    if isinstance(e, Unary):
        return f"(-{to_source(e.child)})"
    if isinstance(e, Binary):
        return f"({to_source(e.left)} {e.op} {to_source(e.right)})"
    if isinstance(e, Call):
        return f"{e.fn}({to_source(e.child)})"
    raise TypeError(f"not an expression node: {e!r}")


def depends_on_coordinates(e: Expr) -> bool:
    if isinstance(e, Coordinate):
        return True
    if isinstance(e, (Constant, Parameter)):
        return False
    if isinstance(e, (Unary, Call)):
        return depends_on_coordinates(e.child)
    return depends_on_coordinates(e.left) or depends_on_coordinates(e.right)


def names_in(e: Expr) -> set[str]:
    if isinstance(e, (Coordinate, Parameter)):
        return {e.name}
    if isinstance(e, Constant):
        return set()
    if isinstance(e, (Unary, Call)):
        return names_in(e.child)
    return names_in(e.left) | names_in(e.right)


def eval_expr(
    e: Expr, point: Sequence[float], params: Mapping[str, float], order: int
) -> Jet:
    """Evaluate ``e`` in jet arithmetic at ``point``; coordinates are lifted with ``jet_lift``."""
    dim = len(point)
    algebra = JetAlgebra.get(dim, order)
    seeds = [jet_lift(float(v), i, dim, order).coeffs for i, v in enumerate(point)]
    coeffs = _finite(_evaluate(e, algebra, seeds, params, point), e, point)
    return Jet(algebra, coeffs)


def eval_coefficients(
    e: Expr, algebra: JetAlgebra, seeds: Sequence[np.ndarray], params: Mapping[str, float], point
) -> np.ndarray:
    """Array form of ``eval_expr`` for callers that evaluate many fields at one point."""
    return _finite(_evaluate(e, algebra, seeds, params, point), e, point)


def _finite(coeffs: np.ndarray, e: Expr, point) -> np.ndarray:
    if not np.all(np.isfinite(coeffs)):
        logger.error(f"Evaluation of {to_source(e)} overflowed at {tuple(point)}")
        raise ExpressionDomainError(
            f"non-finite value in {to_source(e)} at point {tuple(float(v) for v in point)}"
        )
    return coeffs


def _evaluate(e: Expr, algebra: JetAlgebra, seeds, params, point) -> np.ndarray:
    if isinstance(e, Constant):
        return algebra.constant(e.value)
    if isinstance(e, Coordinate):
        return seeds[e.index]
    if isinstance(e, Parameter):
        if e.name not in params:
            raise UnknownSymbol(f"parameter {e.name!r} has no value")
        return algebra.constant(params[e.name])
    try:
        if isinstance(e, Unary):
            return -_evaluate(e.child, algebra, seeds, params, point)
        if isinstance(e, Call):
            return algebra.apply(e.fn, _evaluate(e.child, algebra, seeds, params, point))
        left = _evaluate(e.left, algebra, seeds, params, point)
        if e.op == "^":
            if not depends_on_coordinates(e.right):
                exponent = float(_evaluate(e.right, algebra, seeds, params, point)[0])
                return algebra.apply("pow", left, exponent)
            right = _evaluate(e.right, algebra, seeds, params, point)
            return algebra.apply("exp", algebra.multiply(right, algebra.apply("ln", left)))
        right = _evaluate(e.right, algebra, seeds, params, point)
        if e.op == "+":
            return left + right
        if e.op == "-":
            return left - right
        if e.op == "*":
            return algebra.multiply(left, right)
        return algebra.divide(left, right)
    except JetDomainError as exc:
        logger.error(f"Evaluation of {to_source(e)} failed at {tuple(point)}: {exc}")
        raise ExpressionDomainError(
            f"{exc} in {to_source(e)} (byte offset {e.offset}) at point {tuple(float(v) for v in point)}"
        ) from exc


def evaluate_float(e: Expr, point: Sequence[float], params: Mapping[str, float]) -> float:
    """Plain real evaluation, used as the oracle for jet values and finite differences."""
    if isinstance(e, Constant):
        return e.value
    if isinstance(e, Coordinate):
        return float(point[e.index])
    if isinstance(e, Parameter):
        return float(params[e.name])
    if isinstance(e, Unary):
        return -evaluate_float(e.child, point, params)
    try:
        if isinstance(e, Call):
            x = evaluate_float(e.child, point, params)
            if e.fn == "ln":
                if x <= 0.0:
                    raise ValueError(f"ln of non-positive value {x}")
                return math.log(x)
            if e.fn == "sqrt":
                if x <= 0.0:
                    raise ValueError(f"sqrt of non-positive value {x}")
                return math.sqrt(x)
            return getattr(math, e.fn)(x)
        a = evaluate_float(e.left, point, params)
        b = evaluate_float(e.right, point, params)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        if not depends_on_coordinates(e.right) and float(b).is_integer():
            return a ** int(b)
        if a <= 0.0:
            raise ValueError(f"non-integer power of non-positive value {a}")
        return math.exp(b * math.log(a))
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise ExpressionDomainError(
            f"{exc} in {to_source(e)} (byte offset {e.offset}) at point {tuple(float(v) for v in point)}"
        ) from exc
