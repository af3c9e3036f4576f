"""Check catalog.

Each check evaluates a residual either per sample point or once per run.
Checks whose statement is an implication carry a hypothesis; when the
hypothesis fails the residual is still reported but the check is not
asserted and cannot fail the run.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Literal, Optional

import numpy as np

from app.config import Config
from app.contact.schema import StructureEval
from app.curvature.schema import PointGeometry, TensorAtPoint
from app.manifold.schema import ManifoldSpec
from app.soliton.schema import SolitonAtPoint
from app.soliton.services import SolitonService

logger = logging.getLogger(__name__)

Need = Literal["structure", "soliton", "vector_field", "gradient", "lambda", "order3", "crosscheck_field", "dim>3", "dim=3"]
ToleranceKind = Literal["tol", "oracle", "curvature_spread"]


def _sup(array) -> float:
    array = np.asarray(array)
    return float(np.max(np.abs(array))) if array.size else 0.0


class PointAnalysis:
    """Lazily computed data at one sample point, shared by every check."""

    def __init__(self, services: SolitonService, spec: ManifoldSpec, geometry: PointGeometry, tol: float):
        self.services = services
        self.spec = spec
        self.geometry = geometry
        self.tol = tol

    @property
    def curvature(self):
        return self.services.curvature_services

    @property
    def contact(self):
        return self.services.contact_services

    @cached_property
    def structure(self) -> StructureEval:
        return self.contact.structure_at(self.spec, self.geometry)

    @cached_property
    def soliton(self) -> SolitonAtPoint:
        return self.services.soliton_at(self.spec, self.geometry)

    @cached_property
    def crosscheck_field(self) -> TensorAtPoint:
        """Vector field for the Lie-derivative cross-checks: V of the soliton, else xi."""
        if self.spec.soliton is not None and self.spec.soliton.kind == "vector_field":
            return self.soliton.V
        return self.structure.xi

    @cached_property
    def kenmotsu_residual(self) -> float:
        return self.contact.check_kenmotsu(self.geometry, self.structure)

    @property
    def is_kenmotsu(self) -> bool:
        return self.kenmotsu_residual <= self.tol

    @cached_property
    def identities(self) -> dict[str, float]:
        return self.contact.kenmotsu_identity_suite(self.geometry, self.structure)

    @cached_property
    def eta_einstein(self):
        return self.contact.eta_einstein_fit(self.geometry, self.structure)

    @cached_property
    def soliton_residual(self) -> float:
        return _sup(self.services.soliton_residual(self.geometry, self.structure, self.soliton, tol=self.tol))

    @property
    def soliton_holds(self) -> bool:
        return self.is_kenmotsu and self.soliton_residual <= self.tol

    @cached_property
    def lambda_hat(self) -> float:
        return self.services.recover_lambda_at(self.geometry, self.structure, self.soliton, self.tol)

    @cached_property
    def relations(self) -> dict[str, float]:
        soliton = self.soliton if self.spec.soliton is not None else None
        return self.services.scalar_relation_checks(self.geometry, self.structure, soliton, self.tol)

    @cached_property
    def kenmotsu_einstein_residual(self) -> float:
        return _sup(self.geometry.ricci.value + 2 * self.spec.n * self.geometry.metric.value)

    @cached_property
    def collinearity_excess(self) -> float:
        """How far V is from the collinearity threshold; 0 when V is declared parallel to xi."""
        defect, norm = self.services.collinearity_defect(self.structure, self.soliton.V)
        if norm == 0.0:
            return float("inf")
        return max(0.0, defect - Config.COLLINEAR_RTOL * norm)

    def metric_oracle_error(self) -> float:
        """Largest relative gap between jet partials of g and central differences."""
        manifold = self.services.manifold_services
        geometry = self.geometry
        algebra = geometry.algebra
        g = geometry.metric.components
        h = Config.ORACLE_STEP
        p = geometry.point

        def at(*shifts: tuple[int, float]) -> np.ndarray:
            q = p.copy()
            for axis, step in shifts:
                q[axis] += step
            return manifold.metric_value(self.spec, q)

        def gap(jet: np.ndarray, reference: np.ndarray) -> float:
            return float(np.max(np.abs(jet - reference) / np.maximum(1.0, np.abs(reference))))

        worst = 0.0
        centre = at()
        for i in range(geometry.dim):
            unit_i = np.array(algebra.unit(i))
            forward, backward = at((i, h)), at((i, -h))
            worst = max(worst, gap(algebra.partial(g, tuple(unit_i)), (forward - backward) / (2 * h)))
            for j in range(i, geometry.dim):
                alpha = tuple(int(v) for v in unit_i + np.array(algebra.unit(j)))
                if i == j:
                    second = (forward - 2 * centre + backward) / h**2
                else:
                    second = (at((i, h), (j, h)) - at((i, h), (j, -h)) - at((i, -h), (j, h)) + at((i, -h), (j, -h))) / (
                        4 * h**2
                    )
                worst = max(worst, gap(algebra.partial(g, alpha), second))
        return worst


class RunAnalysis:
    """Per-run aggregates over every sample point."""

    def __init__(self, services: SolitonService, spec: ManifoldSpec, points: list[PointAnalysis], seed: int, tol: float):
        self.services = services
        self.spec = spec
        self.points = points
        self.seed = seed
        self.tol = tol

    @cached_property
    def sectional(self) -> list[float]:
        rng = np.random.default_rng(self.seed)
        per_point = max(1, -(-Config.SECTIONAL_PLANES // len(self.points)))
        values = []
        for analysis in self.points:
            values.extend(self.services.curvature_services.sample_sectional(analysis.geometry, rng, per_point))
        return values

    @property
    def soliton_holds(self) -> bool:
        return all(p.soliton_holds for p in self.points)

    def worst(self, fn: Callable[[PointAnalysis], float]) -> float:
        return max(fn(p) for p in self.points)

    def minus_one_curvature(self) -> float:
        # inf when no plane could be sampled: curvature -1 cannot be confirmed
        return max((abs(k + 1.0) for k in self.sectional), default=math.inf)


@dataclass(frozen=True)
class Check:
    name: str
    tag: str
    title: str
    needs: tuple[Need, ...] = ()
    # exactly one of point / run is set
    point: Optional[Callable[[PointAnalysis], float]] = None
    run: Optional[Callable[[RunAnalysis], tuple[float, Optional[float]]]] = None
    point_hypothesis: Optional[Callable[[PointAnalysis], bool]] = None
    run_hypothesis: Optional[Callable[[RunAnalysis], bool]] = None
    tolerance: ToleranceKind = "tol"
    informational: bool = False
    hypothesis_text: str = field(default="", compare=False)

    def tolerance_value(self, tol: float) -> float:
        if self.tolerance == "oracle":
            return Config.ORACLE_TOL
        if self.tolerance == "curvature_spread":
            return Config.CURVATURE_SPREAD_TOL
        return tol


def _kenmotsu(p: PointAnalysis) -> bool:
    return p.is_kenmotsu


def _eta_einstein_kenmotsu(p: PointAnalysis) -> bool:
    return p.is_kenmotsu and p.eta_einstein.residual <= p.tol


def _soliton(p: PointAnalysis) -> bool:
    return p.soliton_holds


def _identity(key: str) -> Callable[[PointAnalysis], float]:
    return lambda p: p.identities[key]


def _relation(key: str) -> Callable[[PointAnalysis], float]:
    return lambda p: p.relations[key]


def _lambda_spread(run: RunAnalysis) -> tuple[float, Optional[float]]:
    values = [p.lambda_hat for p in run.points]
    return float(max(values) - min(values)), float(np.mean(values))


def _einstein(run: RunAnalysis) -> tuple[float, Optional[float]]:
    residual = run.worst(lambda p: run.services.einstein_residual(p.geometry))
    return residual, float(np.mean([float(p.geometry.scalar.value) for p in run.points]))


def _sectional(run: RunAnalysis) -> tuple[float, Optional[float]]:
    if not run.sectional:
        return math.nan, None
    return float(max(run.sectional) - min(run.sectional)), float(np.mean(run.sectional))


def _collinear_branch(run: RunAnalysis) -> float:
    return run.worst(lambda p: p.collinearity_excess)


def _theorem_collinear(run: RunAnalysis) -> tuple[float, Optional[float]]:
    worst_da, worst_a = 0.0, 0.0
    for p in run.points:
        da, a = run.services.potential_function_residual(p.geometry, p.structure, p.soliton.V)
        worst_da, worst_a = max(worst_da, da), max(worst_a, a)
    return max(worst_da, worst_a, run.worst(lambda p: p.kenmotsu_einstein_residual)), None


def _theorem_gradient(run: RunAnalysis) -> tuple[float, Optional[float]]:
    return min(run.worst(lambda p: p.kenmotsu_einstein_residual), _collinear_branch(run)), None


def _corollary_gradient(run: RunAnalysis) -> tuple[float, Optional[float]]:
    return min(run.minus_one_curvature(), _collinear_branch(run)), None


CHECKS: tuple[Check, ...] = (
    # metric and curvature, any chart
    Check("metric_jet_oracle", "Oracle", "jet partials vs central differences",
          point=PointAnalysis.metric_oracle_error, tolerance="oracle"),
    Check("metric_compatibility", "Levi-Civita", "nabla g = 0",
          point=lambda p: p.curvature.metric_compatibility(p.geometry)),
    Check("riemann_symmetries", "Curvature", "Riemann symmetries",
          point=lambda p: p.curvature.riemann_symmetry_residual(p.geometry)),
    Check("first_bianchi", "Bianchi", "first Bianchi identity",
          point=lambda p: p.curvature.bianchi_residual(p.geometry)),
    Check("contracted_bianchi", "Bianchi", "div Q = dr/2", needs=("order3",),
          point=lambda p: p.curvature.div_Q_check(p.geometry)),
    Check("lie_metric_crosscheck", "Lie", "Lie_V g connection vs coordinates", needs=("crosscheck_field",),
          point=lambda p: _sup(
              p.curvature.lie_derivative_metric(p.geometry, p.crosscheck_field).value
              - p.curvature.lie_derivative_metric_coordinate(p.geometry, p.crosscheck_field).value
          )),
    Check("lie_curvature_crosscheck", "Eq 3.14", "Lie_V R Yano formula vs coordinates", needs=("crosscheck_field", "order3"),
          point=lambda p: _sup(
              p.curvature.lie_derivative_curvature(p.geometry, p.crosscheck_field).value
              - p.curvature.lie_derivative_curvature_coordinate(p.geometry, p.crosscheck_field).value
          )),
    Check("hessian_crosscheck", "Hess f", "Lie_Df g = 2 Hess f", needs=("gradient",),
          point=lambda p: _sup(
              p.curvature.lie_derivative_metric(p.geometry, p.soliton.V).value - 2 * p.soliton.hessian.value
          )),
    # contact structure
    Check("almost_contact", "Eq 2.1", "almost contact metric", needs=("structure",),
          point=lambda p: p.contact.check_almost_contact(p.geometry, p.structure).worst()),
    Check("kenmotsu", "Eq 2.3", "Kenmotsu", needs=("structure",),
          point=lambda p: p.kenmotsu_residual),
    Check("nabla_xi", "Eq 2.4", "nabla xi", needs=("structure", "order3"),
          point=_identity("nabla_xi"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("curvature_xi", "Eq 2.5", "R(X,Y)xi", needs=("structure", "order3"),
          point=_identity("curvature_xi"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("ricci_xi", "Eq 2.6", "S(X,xi)", needs=("structure", "order3"),
          point=_identity("ricci_xi"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("lie_xi_metric", "Eq 2.7", "Lie_xi g", needs=("structure", "order3"),
          point=_identity("lie_xi_metric"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("nabla_Q_xi", "Eq 3.1", "(nabla_X Q) xi", needs=("structure", "order3"),
          point=_identity("nabla_Q_xi"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("nabla_xi_Q", "Eq 3.2", "nabla_xi Q", needs=("structure", "order3"),
          point=_identity("nabla_xi_Q"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("curvature_phi_commutator", "Eq 3.6", "R(X,Y) phi - phi R(X,Y)", needs=("structure", "order3"),
          point=_identity("curvature_phi_commutator"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("curvature_phi_planes", "Eq 3.7", "R(phi X, phi Y)", needs=("structure", "order3"),
          point=_identity("curvature_phi_planes"), point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("star_ricci_crosscheck", "Eq 3.5", "*-Ricci trace vs closed form", needs=("structure",),
          point=lambda p: _sup(
              p.contact.star_ricci(p.geometry, p.structure, "trace").value
              - p.contact.star_ricci(p.geometry, p.structure, "closed_form", tol=float("inf")).value
          ),
          point_hypothesis=_kenmotsu, hypothesis_text="Kenmotsu"),
    Check("eta_einstein_coefficients", "Eq 2.9", "alpha + beta = -2n, alpha and beta from r", needs=("structure",),
          point=lambda p: max(p.eta_einstein.sum_defect, p.eta_einstein.alpha_defect, p.eta_einstein.beta_defect),
          point_hypothesis=_eta_einstein_kenmotsu, hypothesis_text="eta-Einstein Kenmotsu"),
    Check("grad_r_parallel_xi", "Eq 3.17", "Dr = xi(r) xi", needs=("structure", "order3", "dim>3"),
          point=_relation("grad_r_parallel_xi"), point_hypothesis=_eta_einstein_kenmotsu,
          hypothesis_text="eta-Einstein Kenmotsu"),
    # soliton equation
    Check("star_soliton", "Eq 1.3", "Lie_V g + 2S* + 2 lambda g", needs=("structure", "vector_field"),
          point=lambda p: p.soliton_residual),
    Check("gradient_star_soliton", "Eq 1.4", "Hess f + S* + lambda g", needs=("structure", "gradient"),
          point=lambda p: p.soliton_residual),
    Check("lambda_recovery", "Eq 1.3", "recovered lambda vs declared", needs=("structure", "soliton", "lambda"),
          point=lambda p: abs(p.lambda_hat - float(p.soliton.lam.value)),
          point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lambda_vanishes", "Theorem 3.1", "lambda = 0", needs=("structure", "vector_field"),
          point=lambda p: abs(p.lambda_hat), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lambda_constancy", "Theorem 3.1", "lambda spread over points", needs=("structure", "vector_field"),
          run=_lambda_spread, run_hypothesis=RunAnalysis.soliton_holds.fget, hypothesis_text="Kenmotsu soliton"),
    Check("xi_scalar_curvature", "Eq 3.21", "xi(r) = -2(r + 2n(2n+1))", needs=("structure", "soliton", "order3"),
          point=_relation("xi_r"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lie_metric_xi", "Sec 3", "(Lie_V g)(X, xi) = -2 lambda eta(X)", needs=("structure", "vector_field", "order3"),
          point=_relation("lie_metric_xi"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("eta_lie_xi", "Sec 3", "eta(Lie_V xi) = lambda", needs=("structure", "vector_field", "order3"),
          point=_relation("eta_lie_xi"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lie_connection_xi", "Sec 3", "(Lie_V nabla)(X, xi) = 2QX + 4nX", needs=("structure", "vector_field", "order3"),
          point=_relation("lie_connection_xi"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lie_curvature_xi_xi", "Eq 3.16", "(Lie_V R)(X, xi) xi = 0", needs=("structure", "vector_field", "order3"),
          point=_relation("lie_curvature_xi_xi"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("lie_ricci_xi", "Lemma 3.3", "(Lie_V S)(X, xi) = -X(r) + xi(r) eta(X)", needs=("structure", "vector_field", "order3"),
          point=_relation("lie_ricci_xi"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("curvature_gradient", "Eq 4.1", "R(X,Y)Df in terms of nabla Q and d lambda",
          needs=("structure", "gradient", "lambda", "order3"),
          point=_relation("curvature_gradient"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("d_f_lambda", "Eq 4.3", "d(f + lambda) = xi(f + lambda) eta", needs=("structure", "gradient", "lambda", "order3"),
          point=_relation("d_f_lambda"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("eta_einstein_form", "Sec 4", "S from xi(f + lambda)", needs=("structure", "gradient", "lambda", "order3"),
          point=_relation("eta_einstein_form"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("xi_f_lambda", "Eq 4.6", "xi(f + lambda) = r/2n + 2n + 2", needs=("structure", "gradient", "lambda", "order3"),
          point=_relation("xi_f_lambda"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("dr_wedge_eta", "Sec 4", "dr ^ eta = 0", needs=("structure", "gradient", "order3"),
          point=_relation("dr_wedge_eta"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    Check("grad_r_formula", "Eq 4.10", "Dr = -2(r + 2n(2n+1)) xi", needs=("structure", "gradient", "order3"),
          point=_relation("grad_r_formula"), point_hypothesis=_soliton, hypothesis_text="Kenmotsu soliton"),
    # run-level classification
    Check("einstein", "Einstein", "S - (r/dim) g", run=_einstein, informational=True),
    Check("sectional_curvature", "Sectional", "sectional curvature spread", run=_sectional,
          tolerance="curvature_spread", informational=True),
    Check("theorem_einstein", "Theorem 3.2", "eta-Einstein soliton is Einstein", needs=("structure", "vector_field", "dim>3"),
          run=lambda run: (run.worst(lambda p: p.kenmotsu_einstein_residual), None),
          run_hypothesis=lambda run: run.soliton_holds and all(_eta_einstein_kenmotsu(p) for p in run.points),
          hypothesis_text="eta-Einstein Kenmotsu soliton"),
    Check("theorem_curvature_minus_one", "Theorem 3.3", "constant curvature -1", needs=("structure", "vector_field", "dim=3"),
          run=lambda run: (run.minus_one_curvature(), None),
          run_hypothesis=RunAnalysis.soliton_holds.fget, hypothesis_text="Kenmotsu soliton"),
    Check("theorem_collinear", "Theorem 3.4", "V = a xi forces a = 1 and Einstein", needs=("structure", "vector_field"),
          run=_theorem_collinear,
          run_hypothesis=lambda run: run.soliton_holds and _collinear_branch(run) == 0.0,
          hypothesis_text="Kenmotsu soliton with V parallel to xi"),
    Check("theorem_gradient", "Theorem 4.1", "Einstein or Df parallel to xi", needs=("structure", "gradient"),
          run=_theorem_gradient, run_hypothesis=RunAnalysis.soliton_holds.fget, hypothesis_text="Kenmotsu soliton"),
    Check("corollary_gradient", "Corollary 4.1", "curvature -1 or Df parallel to xi",
          needs=("structure", "gradient", "dim=3"),
          run=_corollary_gradient, run_hypothesis=RunAnalysis.soliton_holds.fget, hypothesis_text="Kenmotsu soliton"),
)

CHECKS_BY_NAME: dict[str, Check] = {check.name: check for check in CHECKS}


def missing_need(check: Check, spec: ManifoldSpec, order: int) -> Optional[str]:
    """Reason the check cannot run on this spec, or None."""
    soliton = spec.soliton
    for need in check.needs:
        if need == "structure" and spec.structure is None:
            return "no [structure] block"
        if need == "soliton" and soliton is None:
            return "no [soliton] block"
        if need in ("vector_field", "gradient") and (soliton is None or soliton.kind != need):
            return f"needs a {need.replace('_', ' ')} soliton"
        if need == "lambda" and (soliton is None or soliton.lam is None):
            return "lambda is not declared"
        if need == "order3" and order < 3:
            return f"needs jet order >= 3, got {order}"
        if need == "crosscheck_field" and spec.structure is None and (soliton is None or soliton.kind != "vector_field"):
            return "no vector field to differentiate along"
        if need == "dim>3" and spec.dim <= 3:
            return "needs dim > 3"
        if need == "dim=3" and spec.dim != 3:
            return "needs dim = 3"
    return None
