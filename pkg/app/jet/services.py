from numbers import Real
from typing import Literal

import numpy as np

from app.error import InsufficientJetOrder, JetShapeMismatch
from app.jet.algebra import JetAlgebra, MultiIndex

JET_FUNCTIONS = ("exp", "ln", "sin", "cos", "sinh", "cosh", "tanh", "sqrt")

ArithOp = Literal["add", "sub", "mul", "div"]


class Jet:
    """A scalar function known through its truncated Taylor expansion at one point.

    Instances are immutable. Arithmetic with plain numbers promotes the number
    to a constant jet; arithmetic between jets of different (dim, order) raises
    ``JetShapeMismatch``.
    """

    __slots__ = ("algebra", "coeffs")

    def __init__(self, algebra: JetAlgebra, coeffs: np.ndarray):
        coeffs = np.array(coeffs, dtype=float)
        if coeffs.shape != (algebra.size,):
            raise ValueError(f"expected {algebra.size} coefficients, got shape {coeffs.shape}")
        coeffs.flags.writeable = False
        self.algebra = algebra
        self.coeffs = coeffs

    @classmethod
    def constant(cls, value: float, dim: int, order: int) -> "Jet":
        algebra = JetAlgebra.get(dim, order)
        return cls(algebra, algebra.constant(value))

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def order(self) -> int:
        return self.algebra.order

    @property
    def value(self) -> float:
        return float(self.coeffs[0])

    def as_dict(self) -> dict[MultiIndex, float]:
        """Non-zero Taylor coefficients keyed by multi-index."""
        return {
            alpha: float(c)
            for alpha, c in zip(self.algebra.indices, self.coeffs)
            if c != 0.0
        }

    def coefficient(self, alpha: MultiIndex) -> float:
        return float(self.coeffs[self.algebra.position[tuple(alpha)]])

    def partial(self, alpha: MultiIndex) -> float:
        return float(self.algebra.partial(self.coeffs, alpha))

    def derivative(self, i: int) -> "Jet":
        """Jet of ``d f / d x_i``; one order lower."""
        if self.order < 1:
            raise InsufficientJetOrder("cannot differentiate a jet of order 0")
        if not 0 <= i < self.dim:
            raise IndexError(f"variable index {i} out of range for dim {self.dim}")
        lower = JetAlgebra.get(self.dim, self.order - 1)
        full = self.algebra.gradient(self.coeffs)[i]
        coeffs = np.array([full[self.algebra.position[alpha]] for alpha in lower.indices])
        return Jet(lower, coeffs)

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, Jet):
            if other.algebra is not self.algebra:
                raise JetShapeMismatch(
                    f"jets of (dim={self.dim}, order={self.order}) and "
                    f"(dim={other.dim}, order={other.order}) cannot be combined"
                )
            return other.coeffs
        if isinstance(other, Real):
            return self.algebra.constant(float(other))
        return NotImplemented

    def _wrap(self, coeffs: np.ndarray) -> "Jet":
        return Jet(self.algebra, coeffs)

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.coeffs + b)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.coeffs - b)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(b - self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Real):
            return self._wrap(self.coeffs * float(other))
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.algebra.multiply(self.coeffs, b))

    __rmul__ = __mul__

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.algebra.divide(self.coeffs, b))

    def __rtruediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self._wrap(self.algebra.divide(b, self.coeffs))

    def __neg__(self) -> "Jet":
        return self._wrap(-self.coeffs)

    def __pow__(self, exponent):
        if isinstance(exponent, Real):
            return self._wrap(self.algebra.apply("pow", self.coeffs, float(exponent)))
        b = self._coerce(exponent)
        if b is NotImplemented:
            return b
        log_base = self.algebra.apply("ln", self.coeffs)
        return self._wrap(self.algebra.apply("exp", self.algebra.multiply(b, log_base)))

    def __repr__(self) -> str:
        return f"Jet(dim={self.dim}, order={self.order}, coeffs={self.as_dict()})"


def jet_lift(value: float, var_index: int, dim: int, order: int) -> Jet:
    """Jet of the coordinate function ``x_{var_index}`` at a point where it equals ``value``."""
    if not 0 <= var_index < dim:
        raise IndexError(f"variable index {var_index} out of range for dim {dim}")
    if order < 1:
        raise InsufficientJetOrder("coordinate jets need order >= 1")
    algebra = JetAlgebra.get(dim, order)
    return Jet(algebra, algebra.variable(float(value), var_index))


def jet_arith(op: ArithOp, a: Jet, b: Jet) -> Jet:
    if a.algebra is not b.algebra:
        raise JetShapeMismatch(
            f"{op}: jets of (dim={a.dim}, order={a.order}) and (dim={b.dim}, order={b.order})"
        )
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown jet operation {op!r}")


def jet_apply(fn: str, a: Jet, exponent: float | None = None) -> Jet:
    """Compose ``fn`` with ``a``; ``fn`` is one of ``JET_FUNCTIONS`` or ``"pow"`` with ``exponent``."""
    if fn != "pow" and fn not in JET_FUNCTIONS:
        raise ValueError(f"unknown jet function {fn!r}")
    return Jet(a.algebra, a.algebra.apply(fn, a.coeffs, exponent))


def jet_partial(a: Jet, alpha: MultiIndex) -> float:
    return a.partial(alpha)
