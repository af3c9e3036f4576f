import logging
from itertools import product
from math import factorial, prod
from typing import Sequence

import numpy as np

from app.error import InsufficientJetOrder, JetDomainError

logger = logging.getLogger(__name__)

MultiIndex = tuple[int, ...]


class JetAlgebra:
    """Coefficient layout and kernels for jets in ``dim`` variables truncated at ``order``.

    A jet is a float array whose last axis runs over the multi-indices of total
    degree <= order, degree-major. The entry of multi-index ``alpha`` holds
    ``d^alpha f(p) / alpha!``. Every kernel works on arrays of shape
    ``(..., size)``, so a scalar jet and a jet-valued tensor share one code path.
    """

    # Class-level cache (shared across callers), one table set per (dim, order)
    _instances: dict[tuple[int, int], "JetAlgebra"] = {}

    @classmethod
    def get(cls, dim: int, order: int) -> "JetAlgebra":
        key = (dim, order)
        if key not in cls._instances:
            logger.debug(f"Building jet tables for dim={dim}, order={order}")
            cls._instances[key] = cls(dim, order)
        return cls._instances[key]

    def __init__(self, dim: int, order: int):
        if dim < 1:
            raise ValueError(f"jet dimension must be positive, got {dim}")
        if order < 0:
            raise ValueError(f"jet order must be non-negative, got {order}")
        self.dim = dim
        self.order = order

        indices = [a for a in product(range(order + 1), repeat=dim) if sum(a) <= order]
        indices.sort(key=lambda a: (sum(a), tuple(-x for x in a)))
        self.indices: list[MultiIndex] = indices
        self.position: dict[MultiIndex, int] = {a: k for k, a in enumerate(indices)}
        self.size = len(indices)
        self.degrees = np.array([sum(a) for a in indices], dtype=int)
        self.factorials = np.array(
            [float(prod(factorial(x) for x in a)) for a in indices]
        )
        self.linear = [self.position[self.unit(i)] for i in range(dim)] if order >= 1 else []

        # sparse product: every (p, q) whose degrees add up to at most ``order``
        left, right, target = [], [], []
        for p, a in enumerate(indices):
            for q, b in enumerate(indices):
                c = tuple(x + y for x, y in zip(a, b))
                if c in self.position:
                    left.append(p)
                    right.append(q)
                    target.append(self.position[c])
        self.pair_left = np.array(left, dtype=int)
        self.pair_right = np.array(right, dtype=int)
        self.pair_scatter = np.zeros((len(target), self.size))
        self.pair_scatter[np.arange(len(target)), target] = 1.0

        # d/dx_i maps coefficient alpha + e_i to alpha with factor (alpha_i + 1)
        self.derivative_table = np.zeros((dim, self.size, self.size))
        for i in range(dim):
            for p, a in enumerate(indices):
                shifted = a[:i] + (a[i] + 1,) + a[i + 1:]
                if shifted in self.position:
                    self.derivative_table[i, p, self.position[shifted]] = a[i] + 1.0

    def unit(self, i: int) -> MultiIndex:
        return tuple(1 if k == i else 0 for k in range(self.dim))

    def __repr__(self) -> str:
        return f"JetAlgebra(dim={self.dim}, order={self.order})"

    # construction

    def constant(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        out = np.zeros(values.shape + (self.size,))
        out[..., 0] = values
        return out

    def variable(self, value: float, i: int) -> np.ndarray:
        out = self.constant(value)
        if self.order >= 1:
            out[self.linear[i]] = 1.0
        return out

    # reading

    @staticmethod
    def value(a: np.ndarray) -> np.ndarray:
        return a[..., 0]

    def partial(self, a: np.ndarray, alpha: MultiIndex) -> np.ndarray:
        alpha = tuple(alpha)
        if len(alpha) != self.dim:
            raise ValueError(f"multi-index {alpha} has length {len(alpha)}, expected {self.dim}")
        if sum(alpha) > self.order:
            raise InsufficientJetOrder(
                f"derivative of degree {sum(alpha)} requested from a jet of order {self.order}"
            )
        k = self.position[alpha]
        return a[..., k] * self.factorials[k]

    def truncate(self, a: np.ndarray, order: int) -> np.ndarray:
        """Zero every coefficient above ``order`` (the part that is no longer exact)."""
        if order < 0:
            raise InsufficientJetOrder("jet order exhausted by repeated differentiation")
        out = np.array(a, dtype=float, copy=True)
        out[..., self.degrees > order] = 0.0
        return out

    # arithmetic

    def multiply(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return (a[..., self.pair_left] * b[..., self.pair_right]) @ self.pair_scatter

    def _pair_product(self, subscripts: str, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return np.einsum(subscripts, a[..., self.pair_left], b[..., self.pair_right]) @ self.pair_scatter

    def contract(self, subscripts: str, *operands: np.ndarray) -> np.ndarray:
        """``numpy.einsum`` over the tensor indices, jet product over the coefficient axis.

        ``subscripts`` names only the tensor indices (lower-case letters), e.g.
        ``"kl,lij->kij"``. Operands are folded left to right; each step keeps the
        indices still needed by the output or a later operand.
        """
        inputs, output = subscripts.replace(" ", "").split("->")
        terms = inputs.split(",")
        if len(terms) != len(operands):
            raise ValueError(f"{len(terms)} index groups for {len(operands)} operands")
        term, result = terms[0], operands[0]
        for k in range(1, len(terms)):
            needed = set(output).union(*terms[k + 1:])
            kept = "".join(dict.fromkeys(c for c in term + terms[k] if c in needed))
            result = self._pair_product(f"{term}P,{terms[k]}P->{kept}P", result, operands[k])
            term = kept
        if term != output:
            result = np.einsum(f"{term}P->{output}P", result)
        return result

    def gradient(self, a: np.ndarray) -> np.ndarray:
        """Partial derivatives, appended as the last tensor axis: ``out[..., m, :] = d_m a``."""
        if self.order < 1:
            raise InsufficientJetOrder("cannot differentiate a jet of order 0")
        return np.einsum("mpq,...q->...mp", self.derivative_table, a)

    def compose(self, a: np.ndarray, derivatives: Sequence) -> np.ndarray:
        """Taylor composition ``sum_k f^(k)(a0) / k! * (a - a0)^k``.

        ``derivatives[k]`` is ``f^(k)`` at the constant term, a float or an array
        broadcasting against ``a[..., 0]``. Powers of ``a - a0`` above ``order``
        vanish, so the finite sum is exact.
        """
        h = np.array(a, dtype=float, copy=True)
        h[..., 0] = 0.0
        result = self.constant(np.asarray(derivatives[self.order]) / factorial(self.order))
        result = np.broadcast_to(result, a.shape).copy()
        for k in range(self.order - 1, -1, -1):
            result = self.multiply(result, h)
            result[..., 0] += np.asarray(derivatives[k]) / factorial(k)
        return result

    def reciprocal(self, a: np.ndarray) -> np.ndarray:
        a0 = self.value(a)
        if np.any(a0 == 0.0):
            raise JetDomainError("division by a jet with zero constant term")
        derivatives = [(-1.0) ** k * factorial(k) / a0 ** (k + 1) for k in range(self.order + 1)]
        return self.compose(a, derivatives)

    def divide(self, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        return self.multiply(a, self.reciprocal(b))

    def power_int(self, a: np.ndarray, n: int) -> np.ndarray:
        if n < 0:
            return self.power_int(self.reciprocal(a), -n)
        result = np.broadcast_to(self.constant(1.0), a.shape).copy()
        base = a
        while n:
            if n & 1:
                result = self.multiply(result, base)
            n >>= 1
            if n:
                base = self.multiply(base, base)
        return result

    def apply(self, fn: str, a: np.ndarray, exponent: float | None = None) -> np.ndarray:
        a0 = self.value(a)
        k_range = range(self.order + 1)
        if fn == "exp":
            e = np.exp(a0)
            return self.compose(a, [e] * (self.order + 1))
        if fn == "ln":
            if np.any(a0 <= 0.0):
                raise JetDomainError(f"ln of non-positive value {_first(a0, a0 <= 0.0)}")
            derivatives = [np.log(a0)] + [
                (-1.0) ** (k - 1) * factorial(k - 1) / a0 ** k for k in k_range if k >= 1
            ]
            return self.compose(a, derivatives)
        if fn in ("sin", "cos"):
            s, c = np.sin(a0), np.cos(a0)
            cycle = [s, c, -s, -c] if fn == "sin" else [c, -s, -c, s]
            return self.compose(a, [cycle[k % 4] for k in k_range])
        if fn in ("sinh", "cosh"):
            sh, ch = np.sinh(a0), np.cosh(a0)
            cycle = [sh, ch] if fn == "sinh" else [ch, sh]
            return self.compose(a, [cycle[k % 2] for k in k_range])
        if fn == "tanh":
            return self.divide(self.apply("sinh", a), self.apply("cosh", a))
        if fn == "sqrt":
            if np.any(a0 <= 0.0):
                raise JetDomainError(f"sqrt of non-positive value {_first(a0, a0 <= 0.0)}")
            return self.apply("pow", a, 0.5)
        if fn == "pow":
            if exponent is None:
                raise ValueError("pow needs a constant exponent")
            if float(exponent).is_integer():
                return self.power_int(a, int(exponent))
            if np.any(a0 <= 0.0):
                raise JetDomainError(
                    f"non-integer power {exponent} of non-positive value {_first(a0, a0 <= 0.0)}"
                )
            derivatives = []
            falling = 1.0
            for k in k_range:
                derivatives.append(falling * a0 ** (exponent - k))
                falling *= exponent - k
            return self.compose(a, derivatives)
        raise ValueError(f"unknown jet function {fn!r}")

    def inverse_matrix(self, m: np.ndarray) -> np.ndarray:
        """Inverse of a jet-valued square matrix ``m[i, j, :]``.

        With ``m = m0 + h`` (``h`` without constant term) the Neumann series
        ``sum_k (-m0^-1 h)^k m0^-1`` terminates after ``order`` terms.
        """
        m0 = self.value(m)
        inv0 = np.linalg.inv(m0)
        h = np.array(m, dtype=float, copy=True)
        h[..., 0] = 0.0
        step = -np.einsum("ij,jkp->ikp", inv0, h)
        term = self.constant(inv0)
        result = term.copy()
        for _ in range(self.order):
            term = self.contract("ij,jk->ik", step, term)
            result = result + term
        return result


def _first(values: np.ndarray, mask: np.ndarray) -> float:
    return float(np.asarray(values)[np.asarray(mask)].flat[0]) if np.ndim(values) else float(values)
