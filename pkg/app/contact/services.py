import logging
from typing import Literal

import numpy as np

from app.config import Config
from app.contact.schema import AlmostContactResiduals, EtaEinsteinFit, StructureEval
from app.curvature.schema import PointGeometry, TensorAtPoint
from app.curvature.services import CurvatureService
from app.error import NotKenmotsu, StructureAbsent
from app.manifold.schema import ManifoldSpec
from app.manifold.services import ManifoldService

logger = logging.getLogger(__name__)

StarRicciMethod = Literal["trace", "closed_form"]


def _sup(array) -> float:
    array = np.asarray(array)
    return float(np.max(np.abs(array))) if array.size else 0.0


class ContactService:
    def __init__(
        self,
        manifold_services: ManifoldService | None = None,
        curvature_services: CurvatureService | None = None,
    ):
        self.manifold_services = manifold_services or ManifoldService()
        self.curvature_services = curvature_services or CurvatureService(self.manifold_services)

    def structure_at(self, spec: ManifoldSpec, geometry: PointGeometry) -> StructureEval:
        if spec.structure is None:
            raise StructureAbsent("manifold spec has no [structure] block")
        return geometry.memo("structure", spec, lambda: self._structure_at(spec, geometry))

    def _structure_at(self, spec: ManifoldSpec, geometry: PointGeometry) -> StructureEval:
        order = geometry.order
        point = geometry.point
        structure = spec.structure
        field = self.curvature_services.field
        return StructureEval(
            phi=field(geometry, self.manifold_services.endomorphism_at(spec, structure.phi, point, order), 1, 1),
            xi=field(geometry, self.manifold_services.vector_field_at(spec, structure.xi, point, order), 1, 0),
            eta=field(geometry, self.manifold_services.covector_field_at(spec, structure.eta, point, order), 0, 1),
            n=spec.n,
        )

    def check_almost_contact(self, geometry: PointGeometry, structure: StructureEval) -> AlmostContactResiduals:
        P, xi, eta = structure.phi.value, structure.xi.value, structure.eta.value
        g = geometry.metric.value
        identity = np.eye(geometry.dim)
        return AlmostContactResiduals(
            phi_squared=_sup(P @ P + identity - np.outer(xi, eta)),
            eta_xi=abs(float(eta @ xi) - 1.0),
            phi_xi=_sup(P @ xi),
            eta_phi=_sup(eta @ P),
            compatibility=_sup(P.T @ g @ P - g + np.outer(eta, eta)),
            eta_metric_dual=_sup(eta - g @ xi),
        )

    def kenmotsu_residual_tensor(self, geometry: PointGeometry, structure: StructureEval) -> np.ndarray:
        """[a, i, j] = ((nabla_i phi) d_j - g(phi d_i, d_j) xi + eta_j phi d_i)^a."""
        nabla_phi = self.curvature_services.covariant_derivative(geometry, structure.phi).value
        P, xi, eta = structure.phi.value, structure.xi.value, structure.eta.value
        gP = geometry.metric.value @ P
        return (
            np.einsum("aji->aij", nabla_phi)
            - np.einsum("ji,a->aij", gP, xi)
            + np.einsum("j,ai->aij", eta, P)
        )

    def check_kenmotsu(self, geometry: PointGeometry, structure: StructureEval) -> float:
        return _sup(self.kenmotsu_residual_tensor(geometry, structure))

    def kenmotsu_identity_suite(self, geometry: PointGeometry, structure: StructureEval) -> dict[str, float]:
        """Residual of each pointwise Kenmotsu identity, keyed by identity name."""
        curvature = self.curvature_services
        n = structure.n
        delta = np.eye(geometry.dim)
        g = geometry.metric.value
        P, xi, eta = structure.phi.value, structure.xi.value, structure.eta.value
        gP = g @ P
        rm = geometry.riemann.value
        S = geometry.ricci.value
        Q = geometry.ricci_operator.value
        nabla_xi = curvature.covariant_derivative(geometry, structure.xi).value
        nabla_Q = curvature.covariant_derivative(geometry, geometry.ricci_operator).value
        lie_xi_g = curvature.lie_derivative_metric(geometry, structure.xi).value

        rotate_then_curve = np.einsum("aijb,bk->aijk", rm, P) - np.einsum("ab,bijk->aijk", P, rm)
        rotate_rhs = (
            np.einsum("jk,ai->aijk", g, P)
            - np.einsum("ik,aj->aijk", g, P)
            + np.einsum("ik,aj->aijk", gP, delta)
            - np.einsum("jk,ai->aijk", gP, delta)
        )
        rotated_planes = np.einsum("abck,bi,cj->aijk", rm, P, P)
        rotated_rhs = (
            rm
            + np.einsum("jk,ai->aijk", g, delta)
            - np.einsum("ik,aj->aijk", g, delta)
            + np.einsum("jk,ai->aijk", gP, P)
            - np.einsum("ik,aj->aijk", gP, P)
        )
        return {
            "nabla_xi": _sup(nabla_xi - (delta - np.outer(xi, eta))),
            "curvature_xi": _sup(
                np.einsum("aijk,k->aij", rm, xi)
                - (np.einsum("i,aj->aij", eta, delta) - np.einsum("j,ai->aij", eta, delta))
            ),
            "ricci_xi": _sup(S @ xi + 2 * n * eta),
            "lie_xi_metric": _sup(lie_xi_g - 2 * (g - np.outer(eta, eta))),
            "nabla_Q_xi": _sup(np.einsum("abm,b->am", nabla_Q, xi) + Q + 2 * n * delta),
            "nabla_xi_Q": _sup(np.einsum("abm,m->ab", nabla_Q, xi) + 2 * Q + 4 * n * delta),
            "curvature_phi_commutator": _sup(rotate_then_curve - rotate_rhs),
            "curvature_phi_planes": _sup(rotated_planes - rotated_rhs),
        }

    def star_ricci(
        self,
        geometry: PointGeometry,
        structure: StructureEval,
        method: StarRicciMethod = "trace",
        tol: float | None = None,
    ) -> TensorAtPoint:
        """S*(X, Y) = 1/2 trace(Z -> R(X, phi Y) phi Z), or S + (2n - 1) g + eta x eta on Kenmotsu input."""
        algebra = geometry.algebra
        valid = geometry.riemann.valid_order
        if method == "trace":
            P = structure.phi.components
            star = 0.5 * algebra.contract("kibc,bj,ck->ij", geometry.riemann.components, P, P)
            return TensorAtPoint(0, 2, algebra.truncate(star, valid), valid)
        if method != "closed_form":
            raise ValueError(f"unknown *-Ricci method {method!r}")

        tol = Config.DEFAULT_TOL if tol is None else tol
        residual = self.check_kenmotsu(geometry, structure)
        if residual > tol:
            raise NotKenmotsu(
                f"closed-form *-Ricci tensor needs a Kenmotsu structure; Kenmotsu residual "
                f"{residual:.3e} exceeds {tol:.1e} at point {tuple(float(v) for v in geometry.point)}"
            )
        eta = structure.eta.components
        star = (
            geometry.ricci.components
            + (2 * structure.n - 1) * geometry.metric.components
            + algebra.contract("i,j->ij", eta, eta)
        )
        return TensorAtPoint(0, 2, algebra.truncate(star, valid), valid)

    def eta_einstein_fit(self, geometry: PointGeometry, structure: StructureEval) -> EtaEinsteinFit:
        """Least-squares fit S = alpha g + beta eta x eta over the independent entries of S."""
        n = structure.n
        g = geometry.metric.value
        S = geometry.ricci.value
        eta = structure.eta.value
        etaeta = np.outer(eta, eta)
        upper = np.triu_indices(geometry.dim)
        basis = np.column_stack([g[upper], etaeta[upper]])
        if np.linalg.matrix_rank(basis) < 2:
            logger.warning("eta x eta is proportional to g; fitting with a minimum-norm solution")
        (alpha, beta), *_ = np.linalg.lstsq(basis, S[upper], rcond=None)
        alpha, beta = float(alpha), float(beta)
        r = float(geometry.scalar.value)
        return EtaEinsteinFit(
            alpha=alpha,
            beta=beta,
            residual=_sup(S - alpha * g - beta * etaeta),
            sum_defect=abs(alpha + beta + 2 * n),
            alpha_defect=abs(alpha - (r / (2 * n) + 1)),
            beta_defect=abs(beta + (r / (2 * n) + 2 * n + 1)),
        )
