from dataclasses import dataclass, field
from typing import Literal, Union

TokenKind = Literal[
    "num", "ident", "plus", "minus", "star", "slash", "caret", "lparen", "rparen", "comma"
]


@dataclass(frozen=True, slots=True)
class Token:
    kind: TokenKind
    text: str
    offset: int  # byte offset into the UTF-8 source
    value: float | None = None


# AST nodes compare structurally; source offsets are carried for error messages only.

@dataclass(frozen=True, slots=True)
class Constant:
    value: float
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Coordinate:
    name: str
    index: int
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Parameter:
    name: str
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Unary:
    op: Literal["neg"]
    child: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Binary:
    op: Literal["+", "-", "*", "/", "^"]
    left: "Expr"
    right: "Expr"
    offset: int = field(default=0, compare=False)


@dataclass(frozen=True, slots=True)
class Call:
    fn: str
    child: "Expr"
    offset: int = field(default=0, compare=False)


Expr = Union[Constant, Coordinate, Parameter, Unary, Binary, Call]
