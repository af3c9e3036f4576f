from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from app.jet.algebra import JetAlgebra


@dataclass(frozen=True, eq=False)
class TensorAtPoint:
    """Jet-valued tensor components at one chart point.

    ``components`` has shape ``(dim,) * (up + down) + (size,)``; contravariant
    indices come first. Coefficients above ``valid_order`` are zero.
    """

    up: int
    down: int
    components: np.ndarray
    valid_order: int

    @property
    def rank(self) -> int:
        return self.up + self.down

    @property
    def value(self) -> np.ndarray:
        return self.components[..., 0]

    def max_abs(self) -> float:
        v = self.value
        return float(np.max(np.abs(v))) if v.size else 0.0


@dataclass(frozen=True, eq=False)
class PointGeometry:
    """Metric data and curvature at one point.

    Index conventions: ``christoffel[k, i, j]`` is Gamma^k_ij,
    ``riemann[l, i, j, k]`` the l-th component of R(d_i, d_j) d_k,
    ``riemann_down[i, j, k, l]`` is g(R(d_i, d_j) d_k, d_l) and
    ``ricci[j, k]`` sums ``riemann[i, i, j, k]``.
    """

    point: np.ndarray
    algebra: JetAlgebra
    metric: TensorAtPoint
    inverse_metric: TensorAtPoint
    metric_derivative: TensorAtPoint
    christoffel: TensorAtPoint
    christoffel_derivative: TensorAtPoint
    riemann: TensorAtPoint
    riemann_down: TensorAtPoint
    ricci: TensorAtPoint
    ricci_operator: TensorAtPoint
    scalar: TensorAtPoint
    cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.algebra.dim

    @property
    def order(self) -> int:
        return self.algebra.order

    def memo(self, name: str, anchor: Any, compute: Callable[[], Any]) -> Any:
        """``compute()`` cached under ``name`` for as long as ``anchor`` is the same object."""
        key = (name, id(anchor))
        hit = self.cache.get(key)
        if hit is not None and hit[0] is anchor:
            return hit[1]
        value = compute()
        self.cache[key] = (anchor, value)
        return value
