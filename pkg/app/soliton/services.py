import logging
from typing import Sequence

import numpy as np

from app.config import Config
from app.contact.schema import StructureEval
from app.contact.services import ContactService
from app.curvature.schema import PointGeometry, TensorAtPoint
from app.curvature.services import CurvatureService
from app.error import InsufficientJetOrder, StructureAbsent
from app.manifold.schema import ManifoldSpec
from app.manifold.services import ManifoldService
from app.soliton.schema import ClassificationReport, LambdaRecovery, SolitonAtPoint

logger = logging.getLogger(__name__)


def _sup(array) -> float:
    array = np.asarray(array)
    return float(np.max(np.abs(array))) if array.size else 0.0


def g_trace(geometry: PointGeometry, matrix: np.ndarray) -> float:
    return float(np.einsum("ij,ij->", geometry.inverse_metric.value, matrix))


class SolitonService:
    def __init__(
        self,
        manifold_services: ManifoldService | None = None,
        curvature_services: CurvatureService | None = None,
        contact_services: ContactService | None = None,
    ):
        self.manifold_services = manifold_services or ManifoldService()
        self.curvature_services = curvature_services or CurvatureService(self.manifold_services)
        self.contact_services = contact_services or ContactService(
            self.manifold_services, self.curvature_services
        )

    def soliton_at(self, spec: ManifoldSpec, geometry: PointGeometry) -> SolitonAtPoint:
        if spec.soliton is None:
            raise StructureAbsent("manifold spec has no [soliton] block")
        return geometry.memo("soliton", spec, lambda: self._soliton_at(spec, geometry))

    def _soliton_at(self, spec: ManifoldSpec, geometry: PointGeometry) -> SolitonAtPoint:
        soliton = spec.soliton
        field = self.curvature_services.field
        point, order = geometry.point, geometry.order
        lam = None
        if soliton.lam is not None:
            lam = field(geometry, self.manifold_services.scalar_field_at(spec, soliton.lam, point, order), 0, 0)
        if soliton.kind == "vector_field":
            V = field(geometry, self.manifold_services.vector_field_at(spec, soliton.V, point, order), 1, 0)
            return SolitonAtPoint(kind="vector_field", V=V, lam=lam)
        f = field(geometry, self.manifold_services.scalar_field_at(spec, soliton.f, point, order), 0, 0)
        grad, hessian = self.curvature_services.gradient_hessian(geometry, f)
        return SolitonAtPoint(kind="gradient", V=grad, f=f, hessian=hessian, lam=lam)

    def star_ricci_for_soliton(
        self, geometry: PointGeometry, structure: StructureEval, tol: float | None = None
    ) -> np.ndarray:
        """Closed-form S* where the structure is Kenmotsu, the trace definition elsewhere."""
        tol = Config.DEFAULT_TOL if tol is None else tol
        if self.contact_services.check_kenmotsu(geometry, structure) <= tol:
            return self.contact_services.star_ricci(geometry, structure, "closed_form", tol).value
        return self.contact_services.star_ricci(geometry, structure, "trace").value

    def _soliton_operator(self, geometry, structure, soliton, tol) -> np.ndarray:
        """The lambda-free part: Lie_V g + 2 S* or Hess f + S*."""
        star = self.star_ricci_for_soliton(geometry, structure, tol)
        if soliton.kind == "vector_field":
            return self.curvature_services.lie_derivative_metric(geometry, soliton.V).value + 2 * star
        return soliton.hessian.value + star

    @staticmethod
    def _lambda_weight(soliton: SolitonAtPoint) -> float:
        return 2.0 if soliton.kind == "vector_field" else 1.0

    def recover_lambda_at(
        self,
        geometry: PointGeometry,
        structure: StructureEval,
        soliton: SolitonAtPoint,
        tol: float | None = None,
    ) -> float:
        """lambda minimising the residual in the metric norm: -tr_g(A) / (w * dim)."""
        operator = self._soliton_operator(geometry, structure, soliton, tol)
        return -g_trace(geometry, operator) / (self._lambda_weight(soliton) * geometry.dim)

    def _residual(self, geometry, structure, soliton, lam, tol) -> np.ndarray:
        if lam is None:
            if soliton.lam is not None:
                lam = float(soliton.lam.value)
            else:
                lam = self.recover_lambda_at(geometry, structure, soliton, tol)
        operator = self._soliton_operator(geometry, structure, soliton, tol)
        return operator + self._lambda_weight(soliton) * lam * geometry.metric.value

    def star_soliton_residual(
        self,
        geometry: PointGeometry,
        structure: StructureEval,
        soliton: SolitonAtPoint,
        lam: float | None = None,
        tol: float | None = None,
    ) -> np.ndarray:
        """Lie_V g + 2 S* + 2 lambda g; lambda defaults to the declared one, else the recovered one."""
        if soliton.kind != "vector_field":
            raise ValueError("star_soliton_residual needs the vector-field kind")
        return self._residual(geometry, structure, soliton, lam, tol)

    def gradient_star_soliton_residual(
        self,
        geometry: PointGeometry,
        structure: StructureEval,
        soliton: SolitonAtPoint,
        lam: float | None = None,
        tol: float | None = None,
    ) -> np.ndarray:
        """Hess f + S* + lambda g."""
        if soliton.kind != "gradient":
            raise ValueError("gradient_star_soliton_residual needs the gradient kind")
        return self._residual(geometry, structure, soliton, lam, tol)

    def soliton_residual(self, geometry, structure, soliton, lam=None, tol=None) -> np.ndarray:
        return self._residual(geometry, structure, soliton, lam, tol)

    def recover_lambda(
        self,
        spec: ManifoldSpec,
        geometries: Sequence[PointGeometry],
        tol: float | None = None,
    ) -> LambdaRecovery:
        if not geometries:
            raise ValueError("lambda recovery needs at least one point")
        values = []
        for geometry in geometries:
            structure = self.contact_services.structure_at(spec, geometry)
            soliton = self.soliton_at(spec, geometry)
            values.append(self.recover_lambda_at(geometry, structure, soliton, tol))
        return LambdaRecovery(
            values=values,
            spread=float(max(values) - min(values)),
            mean=float(np.mean(values)),
        )

    # scalar and vector relations forced by the soliton equation

    def scalar_relation_checks(
        self,
        geometry: PointGeometry,
        structure: StructureEval,
        soliton: SolitonAtPoint | None = None,
        tol: float | None = None,
    ) -> dict[str, float]:
        """Residual of each pointwise relation; which ones are asserted is decided by the caller."""
        if geometry.scalar.valid_order < 1:
            raise InsufficientJetOrder("scalar curvature relations need jets of order >= 3")
        algebra = geometry.algebra
        n = structure.n
        xi, eta = structure.xi.value, structure.eta.value
        r = float(geometry.scalar.value)
        dr = algebra.value(algebra.gradient(geometry.scalar.components))
        grad_r = geometry.inverse_metric.value @ dr
        xi_r = float(dr @ xi)
        critical = r + 2 * n * (2 * n + 1)

        relations = {
            "xi_r": abs(xi_r + 2 * critical),
            "grad_r_parallel_xi": _sup(grad_r - xi_r * xi),
            "dr_wedge_eta": _sup(np.outer(dr, eta) - np.outer(eta, dr)),
            "grad_r_formula": _sup(grad_r + 2 * critical * xi),
        }
        if soliton is None:
            return relations

        if soliton.kind == "vector_field":
            lam = self._declared_or_recovered(geometry, structure, soliton, tol)
            V = soliton.V
            lie_g = self.curvature_services.lie_derivative_metric(geometry, V).value
            lie_xi = self.curvature_services.lie_derivative_vector(geometry, V, structure.xi).value
            lie_connection = self.curvature_services.lie_derivative_connection(geometry, V).value
            Q = geometry.ricci_operator.value
            relations["lie_metric_xi"] = _sup(lie_g @ xi + 2 * lam * eta)
            relations["eta_lie_xi"] = abs(float(eta @ lie_xi) - lam)
            relations["lie_connection_xi"] = _sup(
                np.einsum("aik,k->ai", lie_connection, xi) - 2 * Q - 4 * n * np.eye(geometry.dim)
            )
            if geometry.riemann.valid_order >= 1:
                lie_curvature = self.curvature_services.lie_derivative_curvature(geometry, V).value
                relations["lie_curvature_xi_xi"] = _sup(np.einsum("aijk,j,k->ai", lie_curvature, xi, xi))
                lie_ricci = self.curvature_services.lie_derivative_bilinear(geometry, V, geometry.ricci).value
                relations["lie_ricci_xi"] = _sup(lie_ricci @ xi + dr - xi_r * eta)
            return relations

        if soliton.lam is None:
            return relations
        d_lam = algebra.value(algebra.gradient(soliton.lam.components))
        df = algebra.value(algebra.gradient(soliton.f.components))
        d_sum = df + d_lam
        xi_sum = float(d_sum @ xi)
        g = geometry.metric.value
        delta = np.eye(geometry.dim)
        relations["d_f_lambda"] = _sup(d_sum - xi_sum * eta)
        relations["eta_einstein_form"] = _sup(
            geometry.ricci.value - ((xi_sum - 2 * n - 1) * g + (1 - xi_sum) * np.outer(eta, eta))
        )
        relations["xi_f_lambda"] = abs(xi_sum - (r / (2 * n) + 2 * n + 2))
        if geometry.riemann.valid_order >= 1:
            nabla_q = self.curvature_services.covariant_derivative(geometry, geometry.ricci_operator).value
            lhs = np.einsum("aijk,k->aij", geometry.riemann.value, soliton.V.value)
            rhs = (
                nabla_q
                - np.einsum("aji->aij", nabla_q)
                + np.einsum("j,ai->aij", d_lam, delta)
                - np.einsum("i,aj->aij", d_lam, delta)
                + np.einsum("i,aj->aij", eta, delta)
                - np.einsum("j,ai->aij", eta, delta)
            )
            relations["curvature_gradient"] = _sup(lhs - rhs)
        return relations

    def _declared_or_recovered(self, geometry, structure, soliton, tol) -> float:
        if soliton.lam is not None:
            return float(soliton.lam.value)
        return self.recover_lambda_at(geometry, structure, soliton, tol)

    def collinearity_defect(self, structure: StructureEval, V: TensorAtPoint) -> tuple[float, float]:
        """(|V - eta(V) xi|, |V|) in component sup norm."""
        v = V.value
        return _sup(v - float(structure.eta.value @ v) * structure.xi.value), _sup(v)

    def potential_function_residual(self, geometry: PointGeometry, structure: StructureEval, V: TensorAtPoint) -> tuple[float, float]:
        """For V = a xi with a = eta(V): (|da + da(xi) eta|, |a - 1|)."""
        algebra = geometry.algebra
        a = algebra.contract("i,i->", structure.eta.components, V.components)
        da = algebra.value(algebra.gradient(a))
        eta, xi = structure.eta.value, structure.xi.value
        return _sup(da + float(da @ xi) * eta), abs(float(algebra.value(a)) - 1.0)

    def einstein_residual(self, geometry: PointGeometry) -> float:
        S, g = geometry.ricci.value, geometry.metric.value
        return _sup(S - float(geometry.scalar.value) / geometry.dim * g)

    # classification

    def classify(
        self,
        spec: ManifoldSpec,
        geometries: Sequence[PointGeometry],
        tol: float | None = None,
        seed: int | None = None,
    ) -> ClassificationReport:
        tol = Config.DEFAULT_TOL if tol is None else tol
        seed = Config.DEFAULT_SEED if seed is None else seed
        if not geometries:
            raise ValueError("classification needs at least one point")

        einstein = max(self.einstein_residual(geo) for geo in geometries)
        ricci_flat = max(geo.ricci.max_abs() for geo in geometries)

        rng = np.random.default_rng(seed)
        per_point = max(1, -(-Config.SECTIONAL_PLANES // len(geometries)))
        curvatures = []
        for geo in geometries:
            curvatures.extend(self.curvature_services.sample_sectional(geo, rng, per_point))
        if curvatures:
            spread, kappa = float(max(curvatures) - min(curvatures)), float(np.mean(curvatures))
        else:
            logger.warning("No non-degenerate plane was sampled, sectional curvature is undefined")
            spread, kappa = None, None

        report = dict(
            einstein_residual=einstein,
            einstein=einstein <= tol,
            ricci_flat=ricci_flat <= tol,
            planes=len(curvatures),
            kappa=kappa,
            curvature_spread=spread,
            constant_curvature=spread is not None and spread <= Config.CURVATURE_SPREAD_TOL,
        )

        if spec.structure is not None:
            structures = [self.contact_services.structure_at(spec, geo) for geo in geometries]
            kenmotsu = max(self.contact_services.check_kenmotsu(geo, st) for geo, st in zip(geometries, structures))
            fits = [self.contact_services.eta_einstein_fit(geo, st) for geo, st in zip(geometries, structures)]
            eta_residual = max(fit.residual for fit in fits)
            report.update(
                kenmotsu_residual=kenmotsu,
                kenmotsu=kenmotsu <= tol,
                kenmotsu_einstein_residual=max(
                    _sup(geo.ricci.value + 2 * spec.n * geo.metric.value) for geo in geometries
                ),
                eta_einstein_residual=eta_residual,
                eta_einstein=eta_residual <= tol,
                alpha=[fit.alpha for fit in fits],
                beta=[fit.beta for fit in fits],
            )
            if spec.soliton is not None:
                report.update(self._classify_soliton(spec, geometries, structures, tol))

        report["label"] = self._label(report)
        classification = ClassificationReport(**report)
        logger.info(f"Classification: {classification.label}")
        return classification

    def _classify_soliton(self, spec, geometries, structures, tol) -> dict:
        residuals, lambdas, defects, da_residuals = [], [], [], []
        collinear = True
        for geo, structure in zip(geometries, structures):
            soliton = self.soliton_at(spec, geo)
            residuals.append(_sup(self.soliton_residual(geo, structure, soliton, tol=tol)))
            lambdas.append(self.recover_lambda_at(geo, structure, soliton, tol))
            defect, norm = self.collinearity_defect(structure, soliton.V)
            defects.append(defect)
            if defect > Config.COLLINEAR_RTOL * norm or norm == 0.0:
                collinear = False
        if collinear:
            da_residuals = [
                self.potential_function_residual(geo, st, self.soliton_at(spec, geo).V)[0]
                for geo, st in zip(geometries, structures)
            ]
        spread = float(max(lambdas) - min(lambdas))
        mean = float(np.mean(lambdas))
        if spread > tol:
            soliton_type = "non-constant"
        elif abs(mean) <= tol:
            soliton_type = "steady"
        else:
            soliton_type = "shrinking" if mean < 0 else "expanding"
        return dict(
            soliton_residual=max(residuals),
            lambda_hat=lambdas,
            lambda_spread=spread,
            soliton_type=soliton_type,
            collinearity_defect=max(defects),
            collinear=collinear,
            da_residual=max(da_residuals) if da_residuals else None,
        )

    @staticmethod
    def _label(report: dict) -> str:
        if report["ricci_flat"]:
            parts = ["ricci-flat"]
        elif report["einstein"]:
            parts = ["einstein"]
        elif report.get("eta_einstein"):
            parts = ["eta-einstein"]
        else:
            parts = ["generic"]
        if report["constant_curvature"]:
            parts.append(f"constant curvature {report['kappa']:.6g}")
        if report.get("soliton_type") is not None:
            parts.append(f"{report['soliton_type']} soliton")
        return ", ".join(parts)
