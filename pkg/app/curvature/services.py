import logging
from typing import Sequence

import numpy as np

from app.config import Config
from app.curvature.schema import PointGeometry, TensorAtPoint
from app.error import DegeneratePlane, InsufficientJetOrder
from app.jet.algebra import JetAlgebra
from app.manifold.schema import ManifoldSpec
from app.manifold.services import ManifoldService

logger = logging.getLogger(__name__)

_SLOT_LETTERS = "abcdefgh"


class CurvatureService:
    def __init__(self, manifold_services: ManifoldService | None = None):
        self.manifold_services = manifold_services or ManifoldService()

    def point_geometry(self, spec: ManifoldSpec, point: Sequence[float], order: int | None = None) -> PointGeometry:
        order = Config.DEFAULT_ORDER if order is None else order
        if order < 2:
            raise InsufficientJetOrder(f"curvature needs jets of order >= 2, got {order}")
        point = np.asarray(point, dtype=float)
        algebra = JetAlgebra.get(spec.dim, order)

        g = self.manifold_services.metric_at(spec, point, order)
        ginv = self.manifold_services.inverse_metric_at(g, algebra, point)
        dg = algebra.truncate(algebra.gradient(g), order - 1)

        # dg[a, b, c] = d_c g_ab
        combined = (
            np.einsum("jlip->lijp", dg)
            + np.einsum("iljp->lijp", dg)
            - np.einsum("ijlp->lijp", dg)
        )
        gamma = algebra.truncate(0.5 * algebra.contract("kl,lij->kij", ginv, combined), order - 1)
        dgamma = algebra.truncate(algebra.gradient(gamma), order - 2)

        derivative_part = np.einsum("ljkip->lijkp", dgamma)
        quadratic_part = algebra.contract("lim,mjk->lijk", gamma, gamma)
        rm = derivative_part - derivative_part.swapaxes(1, 2) + quadratic_part - quadratic_part.swapaxes(1, 2)
        rm = algebra.truncate(rm, order - 2)
        down = algebra.truncate(algebra.contract("lm,mijk->ijkl", g, rm), order - 2)
        ricci = np.einsum("iijkp->jkp", rm)
        ricci_operator = algebra.truncate(algebra.contract("ac,cb->ab", ginv, ricci), order - 2)
        scalar = np.einsum("aap->p", ricci_operator)

        return PointGeometry(
            point=point,
            algebra=algebra,
            metric=TensorAtPoint(0, 2, g, order),
            inverse_metric=TensorAtPoint(2, 0, ginv, order),
            metric_derivative=TensorAtPoint(0, 3, dg, order - 1),
            christoffel=TensorAtPoint(1, 2, gamma, order - 1),
            christoffel_derivative=TensorAtPoint(1, 3, dgamma, order - 2),
            riemann=TensorAtPoint(1, 3, rm, order - 2),
            riemann_down=TensorAtPoint(0, 4, down, order - 2),
            ricci=TensorAtPoint(0, 2, ricci, order - 2),
            ricci_operator=TensorAtPoint(1, 1, ricci_operator, order - 2),
            scalar=TensorAtPoint(0, 0, scalar, order - 2),
        )

    def christoffel(self, spec: ManifoldSpec, point, order: int | None = None) -> TensorAtPoint:
        return self.point_geometry(spec, point, order).christoffel

    def riemann(self, spec: ManifoldSpec, point, order: int | None = None) -> tuple[TensorAtPoint, TensorAtPoint]:
        geometry = self.point_geometry(spec, point, order)
        return geometry.riemann, geometry.riemann_down

    def ricci(self, spec: ManifoldSpec, point, order: int | None = None):
        geometry = self.point_geometry(spec, point, order)
        return geometry.ricci, geometry.ricci_operator, geometry.scalar

    # tensors along the geometry

    def field(self, geometry: PointGeometry, components: np.ndarray, up: int, down: int) -> TensorAtPoint:
        """Wrap evaluated field components; they are exact to the full jet order."""
        return TensorAtPoint(up, down, np.asarray(components, dtype=float), geometry.order)

    def covariant_derivative(self, geometry: PointGeometry, tensor: TensorAtPoint) -> TensorAtPoint:
        """nabla T with the derivative direction appended as the last covariant slot."""
        return geometry.memo("nabla", tensor, lambda: self._covariant_derivative(geometry, tensor))

    def _covariant_derivative(self, geometry: PointGeometry, tensor: TensorAtPoint) -> TensorAtPoint:
        algebra = geometry.algebra
        gamma = geometry.christoffel.components
        letters = _SLOT_LETTERS[: tensor.rank]
        valid = min(tensor.valid_order - 1, geometry.christoffel.valid_order)
        if valid < 0:
            raise InsufficientJetOrder(
                f"covariant derivative of a tensor exact only to order {tensor.valid_order}"
            )
        out = algebra.gradient(tensor.components)
        for slot in range(tensor.rank):
            replaced = letters[:slot] + "z" + letters[slot + 1:]
            if slot < tensor.up:
                out = out + algebra.contract(f"{letters[slot]}mz,{replaced}->{letters}m", gamma, tensor.components)
            else:
                out = out - algebra.contract(f"zm{letters[slot]},{replaced}->{letters}m", gamma, tensor.components)
        return TensorAtPoint(tensor.up, tensor.down + 1, algebra.truncate(out, valid), valid)

    def lie_derivative_metric(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        """(Lie_V g)(X, Y) = g(nabla_X V, Y) + g(X, nabla_Y V)."""
        algebra = geometry.algebra
        nabla_v = self.covariant_derivative(geometry, V)
        half = algebra.contract("ja,ai->ij", geometry.metric.components, nabla_v.components)
        return TensorAtPoint(0, 2, half + half.swapaxes(0, 1), nabla_v.valid_order)

    def lie_derivative_metric_coordinate(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        algebra = geometry.algebra
        g = geometry.metric.components
        valid = min(V.valid_order, geometry.metric_derivative.valid_order + 1) - 1
        dv = algebra.gradient(V.components)
        out = (
            algebra.contract("k,ijk->ij", V.components, geometry.metric_derivative.components)
            + algebra.contract("kj,ki->ij", g, dv)
            + algebra.contract("ik,kj->ij", g, dv)
        )
        return TensorAtPoint(0, 2, algebra.truncate(out, valid), valid)

    def lie_derivative_bilinear(self, geometry: PointGeometry, V: TensorAtPoint, T: TensorAtPoint) -> TensorAtPoint:
        """(Lie_V T)_ij = V^k d_k T_ij + T_kj d_i V^k + T_ik d_j V^k for a (0, 2) tensor T."""
        if T.up != 0 or T.down != 2:
            raise ValueError(f"expected a (0, 2) tensor, got ({T.up}, {T.down})")
        valid = min(V.valid_order, T.valid_order) - 1
        if valid < 0:
            raise InsufficientJetOrder("Lie derivative of a (0, 2) tensor needs it valid to order >= 1")
        algebra = geometry.algebra
        dv = algebra.gradient(V.components)
        out = (
            algebra.contract("k,ijk->ij", V.components, algebra.gradient(T.components))
            + algebra.contract("kj,ki->ij", T.components, dv)
            + algebra.contract("ik,kj->ij", T.components, dv)
        )
        return TensorAtPoint(0, 2, algebra.truncate(out, valid), valid)

    def lie_derivative_connection(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        """(Lie_V nabla)(d_i, d_j)^a = (nabla^2 V)(d_i, d_j)^a + R(V, d_i) d_j."""
        return geometry.memo("lie_connection", V, lambda: self._lie_derivative_connection(geometry, V))

    def _lie_derivative_connection(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        algebra = geometry.algebra
        second = self.covariant_derivative(geometry, self.covariant_derivative(geometry, V))
        valid = min(second.valid_order, geometry.riemann.valid_order)
        out = np.einsum("ajip->aijp", second.components) + algebra.contract(
            "aeij,e->aij", geometry.riemann.components, V.components
        )
        return TensorAtPoint(1, 2, algebra.truncate(out, valid), valid)

    def lie_derivative_curvature(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        """(Lie_V R)(X, Y)Z = (nabla_X Lie_V nabla)(Y, Z) - (nabla_Y Lie_V nabla)(X, Z)."""
        return geometry.memo("lie_curvature", V, lambda: self._lie_derivative_curvature(geometry, V))

    def _lie_derivative_curvature(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        derivative = self.covariant_derivative(geometry, self.lie_derivative_connection(geometry, V))
        first = np.einsum("ajkip->aijkp", derivative.components)
        return TensorAtPoint(1, 3, first - first.swapaxes(1, 2), derivative.valid_order)

    def lie_derivative_curvature_coordinate(self, geometry: PointGeometry, V: TensorAtPoint) -> TensorAtPoint:
        """Coordinate Lie derivative of R^l_ijk, independent of the connection route."""
        algebra = geometry.algebra
        rm = geometry.riemann.components
        valid = geometry.riemann.valid_order - 1
        if valid < 0:
            raise InsufficientJetOrder("Lie derivative of curvature needs jets of order >= 3")
        d_rm = algebra.gradient(rm)
        dv = algebra.gradient(V.components)
        out = (
            algebra.contract("m,lijkm->lijk", V.components, d_rm)
            - algebra.contract("mijk,lm->lijk", rm, dv)
            + algebra.contract("lmjk,mi->lijk", rm, dv)
            + algebra.contract("limk,mj->lijk", rm, dv)
            + algebra.contract("lijm,mk->lijk", rm, dv)
        )
        return TensorAtPoint(1, 3, algebra.truncate(out, valid), valid)

    def lie_derivative_vector(self, geometry: PointGeometry, V: TensorAtPoint, W: TensorAtPoint) -> TensorAtPoint:
        """Lie bracket [V, W]^a = V^b d_b W^a - W^b d_b V^a."""
        algebra = geometry.algebra
        valid = min(V.valid_order, W.valid_order) - 1
        out = algebra.contract("b,ab->a", V.components, algebra.gradient(W.components)) - algebra.contract(
            "b,ab->a", W.components, algebra.gradient(V.components)
        )
        return TensorAtPoint(1, 0, algebra.truncate(out, valid), valid)

    def gradient_hessian(self, geometry: PointGeometry, f: TensorAtPoint) -> tuple[TensorAtPoint, TensorAtPoint]:
        """Df^i = g^ij d_j f and Hess f_ij = d_i d_j f - Gamma^k_ij d_k f."""
        algebra = geometry.algebra
        df = algebra.truncate(algebra.gradient(f.components), f.valid_order - 1)
        grad = algebra.contract("ij,j->i", geometry.inverse_metric.components, df)
        valid = min(f.valid_order - 2, geometry.christoffel.valid_order)
        ddf = algebra.gradient(df)
        hess = ddf - algebra.contract("kij,k->ij", geometry.christoffel.components, df)
        return (
            TensorAtPoint(1, 0, algebra.truncate(grad, f.valid_order - 1), f.valid_order - 1),
            TensorAtPoint(0, 2, algebra.truncate(hess, valid), valid),
        )

    def differential(self, geometry: PointGeometry, f: TensorAtPoint) -> TensorAtPoint:
        algebra = geometry.algebra
        valid = f.valid_order - 1
        return TensorAtPoint(0, 1, algebra.truncate(algebra.gradient(f.components), valid), valid)

    # pointwise numbers

    def sectional(self, geometry: PointGeometry, X: Sequence[float], Y: Sequence[float]) -> float:
        """K(X, Y) = g(R(X, Y)Y, X) / (g(X, X) g(Y, Y) - g(X, Y)^2)."""
        X = np.asarray(X, dtype=float)
        Y = np.asarray(Y, dtype=float)
        g = geometry.metric.value
        denominator = (X @ g @ X) * (Y @ g @ Y) - (X @ g @ Y) ** 2
        if denominator < Config.DETERMINANT_EPS:
            raise DegeneratePlane(
                f"plane spanned by {X.tolist()} and {Y.tolist()} is degenerate "
                f"at point {tuple(float(v) for v in geometry.point)}"
            )
        numerator = np.einsum("ijkl,i,j,k,l->", geometry.riemann_down.value, X, Y, Y, X)
        return float(numerator / denominator)

    def sample_sectional(self, geometry: PointGeometry, rng: np.random.Generator, planes: int) -> list[float]:
        """Sectional curvature of up to ``planes`` random planes, gives up after SECTIONAL_ATTEMPTS per plane."""
        if geometry.dim < 2:
            return []
        values = []
        for _ in range(planes * Config.SECTIONAL_ATTEMPTS):
            if len(values) == planes:
                break
            X, Y = rng.normal(size=(2, geometry.dim))
            try:
                values.append(self.sectional(geometry, X, Y))
            except DegeneratePlane:
                logger.debug("Skipped a degenerate random plane")
        if len(values) < planes:
            logger.warning(
                f"Only {len(values)} of {planes} random planes were non-degenerate "
                f"at point {tuple(float(v) for v in geometry.point)}"
            )
        return values

    def div_Q_check(self, geometry: PointGeometry) -> float:
        """max_j |(div Q)_j - 1/2 d_j r|, the contracted second Bianchi identity."""
        algebra = geometry.algebra
        nabla_q = self.covariant_derivative(geometry, geometry.ricci_operator)
        div_q = np.einsum("ajap->jp", nabla_q.components)
        dr = algebra.gradient(geometry.scalar.components)
        return float(np.max(np.abs(algebra.value(div_q) - 0.5 * algebra.value(dr))))

    def metric_compatibility(self, geometry: PointGeometry) -> float:
        return self.covariant_derivative(geometry, geometry.metric).max_abs()

    def bianchi_residual(self, geometry: PointGeometry) -> float:
        rm = geometry.riemann.value
        cyclic = rm + np.einsum("ljki->lijk", rm) + np.einsum("lkij->lijk", rm)
        return float(np.max(np.abs(cyclic)))

    def riemann_symmetry_residual(self, geometry: PointGeometry) -> float:
        down = geometry.riemann_down.value
        return float(
            max(
                np.max(np.abs(down + down.swapaxes(0, 1))),
                np.max(np.abs(down + down.swapaxes(2, 3))),
                np.max(np.abs(down - np.einsum("klij->ijkl", down))),
            )
        )
