import numpy as np
import pytest

from app.error import StructureAbsent
from app.tests.conftest import kenmotsu3_text
from app.verify.fixtures import fixture_text

FLAT_WITH_ZERO_FIELD = fixture_text("flat-control") + "\n[soliton]\nV = 0, 0, 0\nlambda = unknown\n"


def evaluated(soliton_services, spec, geometries, count=5, seed=7):
    for geometry in geometries(spec, count=count, seed=seed):
        structure = soliton_services.contact_services.structure_at(spec, geometry)
        yield geometry, structure, soliton_services.soliton_at(spec, geometry)


class TestStarSolitonResidual:
    def test_kenmotsu3_is_a_soliton(self, soliton_services, geometries, kenmotsu3):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3, geometries, count=20, seed=42):
            residual = soliton_services.star_soliton_residual(geometry, structure, soliton)
            assert np.max(np.abs(residual)) <= 1e-10

    @pytest.mark.parametrize("a", [-1.0, 0.0, 0.5, 2.0])
    def test_invariant_under_field_parameter(self, soliton_services, geometries, load, a):
        spec = load(kenmotsu3_text(a))
        for geometry, structure, soliton in evaluated(soliton_services, spec, geometries):
            residual = soliton_services.star_soliton_residual(geometry, structure, soliton, lam=0.0)
            assert np.max(np.abs(residual)) <= 1e-9
        recovery = soliton_services.recover_lambda(spec, geometries(spec, count=5))
        assert max(abs(v) for v in recovery.values) <= 1e-9
        assert recovery.spread <= 1e-9

    def test_zero_field_leaves_twice_star_ricci(self, soliton_services, geometries, load):
        spec = load(kenmotsu3_text(lam="0").replace("V = (1-a)*x, (1-a)*y, a", "V = 0, 0, 0"))
        eta = np.array([0.0, 0.0, 1.0])
        for geometry, structure, soliton in evaluated(soliton_services, spec, geometries):
            residual = soliton_services.star_soliton_residual(geometry, structure, soliton)
            np.testing.assert_allclose(residual, 2 * (-geometry.metric.value + np.outer(eta, eta)), atol=1e-10)
            assert np.max(np.abs(residual)) == pytest.approx(2 * np.exp(2 * geometry.point[2]), rel=1e-10)

    def test_zero_field_recovers_constant_lambda(self, soliton_services, geometries, load):
        # -tr_g(2(-g + eta x eta)) / 6 = 2/3; the residual itself stays non-zero
        spec = load(kenmotsu3_text(lam="unknown").replace("V = (1-a)*x, (1-a)*y, a", "V = 0, 0, 0"))
        for geometry, structure, soliton in evaluated(soliton_services, spec, geometries):
            assert soliton_services.recover_lambda_at(geometry, structure, soliton) == pytest.approx(2 / 3, abs=1e-10)
            assert np.max(np.abs(soliton_services.star_soliton_residual(geometry, structure, soliton))) > 0.1

    def test_linear_in_lambda(self, soliton_services, geometries, kenmotsu3):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3, geometries):
            first = soliton_services.star_soliton_residual(geometry, structure, soliton, lam=0.7)
            second = soliton_services.star_soliton_residual(geometry, structure, soliton, lam=-1.3)
            np.testing.assert_allclose(first - second, 2 * 2.0 * geometry.metric.value, atol=1e-13)

    def test_rejects_gradient_kind(self, soliton_services, geometries, kenmotsu3_gradient):
        geometry, structure, soliton = next(evaluated(soliton_services, kenmotsu3_gradient, geometries, count=1))
        with pytest.raises(ValueError, match="vector-field kind"):
            soliton_services.star_soliton_residual(geometry, structure, soliton)

    def test_needs_soliton_block(self, soliton_services, geometries, flat_control):
        geometry = geometries(flat_control, count=1)[0]
        with pytest.raises(StructureAbsent, match=r"\[soliton\]"):
            soliton_services.soliton_at(flat_control, geometry)


class TestGradientResidual:
    def test_example_gradient_soliton(self, soliton_services, geometries, kenmotsu3_gradient):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3_gradient, geometries, count=20, seed=42):
            residual = soliton_services.gradient_star_soliton_residual(geometry, structure, soliton)
            assert np.max(np.abs(residual)) <= 1e-9

    def test_wrong_lambda_leaves_lambda_times_metric(self, soliton_services, geometries, kenmotsu3_gradient):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3_gradient, geometries):
            x, _, z = geometry.point
            residual = soliton_services.gradient_star_soliton_residual(geometry, structure, soliton, lam=0.0)
            np.testing.assert_allclose(residual, -x * np.exp(z) * geometry.metric.value, atol=1e-9)

    def test_linear_in_lambda(self, soliton_services, geometries, kenmotsu3_gradient):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3_gradient, geometries):
            first = soliton_services.gradient_star_soliton_residual(geometry, structure, soliton, lam=0.25)
            second = soliton_services.gradient_star_soliton_residual(geometry, structure, soliton, lam=-0.5)
            np.testing.assert_allclose(first - second, 0.75 * geometry.metric.value, atol=1e-13)

    def test_rejects_vector_kind(self, soliton_services, geometries, kenmotsu3):
        geometry, structure, soliton = next(evaluated(soliton_services, kenmotsu3, geometries, count=1))
        with pytest.raises(ValueError, match="gradient kind"):
            soliton_services.gradient_star_soliton_residual(geometry, structure, soliton)


class TestRecoverLambda:
    def test_kenmotsu3_lambda_vanishes(self, soliton_services, geometries, kenmotsu3):
        recovery = soliton_services.recover_lambda(kenmotsu3, geometries(kenmotsu3, count=20, seed=42))
        assert len(recovery.values) == 20
        assert max(abs(v) for v in recovery.values) <= 1e-10
        assert recovery.spread <= 1e-10

    def test_gradient_lambda_is_x_exp_z(self, soliton_services, geometries, kenmotsu3_gradient):
        points = geometries(kenmotsu3_gradient, count=20, seed=42)
        recovery = soliton_services.recover_lambda(kenmotsu3_gradient, points)
        expected = [g.point[0] * np.exp(g.point[2]) for g in points]
        np.testing.assert_allclose(recovery.values, expected, atol=1e-8)
        assert recovery.spread > 0.5

    def test_flat_zero_field(self, soliton_services, geometries, load):
        spec = load(FLAT_WITH_ZERO_FIELD)
        recovery = soliton_services.recover_lambda(spec, geometries(spec, count=3))
        assert recovery.values == [0.0, 0.0, 0.0]

    def test_no_points(self, soliton_services, kenmotsu3):
        with pytest.raises(ValueError, match="at least one point"):
            soliton_services.recover_lambda(kenmotsu3, [])


class TestScalarRelations:
    def test_kenmotsu3(self, soliton_services, geometries, kenmotsu3):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3, geometries):
            relations = soliton_services.scalar_relation_checks(geometry, structure, soliton)
            assert {"xi_r", "lie_metric_xi", "eta_lie_xi", "lie_connection_xi", "lie_curvature_xi_xi", "lie_ricci_xi"} <= set(relations)
            for name, residual in relations.items():
                assert residual <= 1e-9, name

    def test_kenmotsu5_with_xi_as_field(self, soliton_services, geometries, kenmotsu5):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu5, geometries):
            for name, residual in soliton_services.scalar_relation_checks(geometry, structure, soliton).items():
                assert residual <= 1e-9, name

    def test_lie_ricci_along_xi_fails_off_soliton(self, soliton_services, geometries, load):
        # S = -2g, so the residual is 2|d(1 + e^x)| = 2e^x
        spec = load(kenmotsu3_text().replace("V = (1-a)*x, (1-a)*y, a", "V = 0, 0, 1 + exp(x)"))
        for geometry, structure, soliton in evaluated(soliton_services, spec, geometries, count=3):
            relations = soliton_services.scalar_relation_checks(geometry, structure, soliton)
            assert relations["lie_ricci_xi"] == pytest.approx(2 * np.exp(geometry.point[0]), rel=1e-9)

    def test_gradient_example(self, soliton_services, geometries, kenmotsu3_gradient):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3_gradient, geometries):
            relations = soliton_services.scalar_relation_checks(geometry, structure, soliton)
            assert {"d_f_lambda", "eta_einstein_form", "xi_f_lambda", "curvature_gradient"} <= set(relations)
            for name, residual in relations.items():
                assert residual <= 1e-9, name

    def test_flat_control_reports_non_zero(self, soliton_services, geometries, flat_control):
        geometry = geometries(flat_control, count=1)[0]
        structure = soliton_services.contact_services.structure_at(flat_control, geometry)
        relations = soliton_services.scalar_relation_checks(geometry, structure)
        assert relations["xi_r"] == pytest.approx(12.0)
        assert relations["grad_r_formula"] == pytest.approx(12.0)
        assert relations["dr_wedge_eta"] == 0.0

    def test_eta_einstein_gradient_of_r(self, soliton_services, geometries, eta_einstein5):
        for geometry in geometries(eta_einstein5, count=5):
            structure = soliton_services.contact_services.structure_at(eta_einstein5, geometry)
            relations = soliton_services.scalar_relation_checks(geometry, structure)
            t = geometry.point[4]
            assert relations["grad_r_parallel_xi"] <= 1e-9
            assert relations["dr_wedge_eta"] <= 1e-9
            # xi(r) = -8 e^{-2t} = -2(r + 20)
            assert relations["xi_r"] <= 1e-8 * max(1.0, np.exp(-2 * t))


class TestPotentialFunction:
    def test_xi_as_field(self, soliton_services, geometries, kenmotsu5):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu5, geometries):
            defect, norm = soliton_services.collinearity_defect(structure, soliton.V)
            assert defect == 0.0 and norm == 1.0
            da, a = soliton_services.potential_function_residual(geometry, structure, soliton.V)
            assert da == 0.0 and a == 0.0

    def test_kenmotsu3_field_not_collinear(self, soliton_services, geometries, kenmotsu3):
        for geometry, structure, soliton in evaluated(soliton_services, kenmotsu3, geometries):
            defect, _ = soliton_services.collinearity_defect(structure, soliton.V)
            assert defect > 0.0


class TestClassify:
    def test_kenmotsu3(self, soliton_services, geometries, kenmotsu3):
        report = soliton_services.classify(kenmotsu3, geometries(kenmotsu3, count=20, seed=42))
        assert report.einstein and not report.ricci_flat
        assert report.kenmotsu and report.kenmotsu_residual <= 1e-10
        assert report.kenmotsu_einstein_residual <= 1e-10
        assert report.constant_curvature
        assert report.planes >= 50
        assert report.kappa == pytest.approx(-1.0, abs=1e-9)
        assert report.soliton_residual <= 1e-10
        assert report.soliton_type == "steady"
        assert report.lambda_spread <= 1e-10
        assert report.collinear is False and report.collinearity_defect > 0
        assert report.da_residual is None
        assert report.label == "einstein, constant curvature -1, steady soliton"

    def test_gradient_example(self, soliton_services, geometries, kenmotsu3_gradient):
        report = soliton_services.classify(kenmotsu3_gradient, geometries(kenmotsu3_gradient, count=10))
        assert report.einstein
        assert report.kappa == pytest.approx(-1.0, abs=1e-9)
        assert report.soliton_type == "non-constant"
        assert report.soliton_residual <= 1e-9

    def test_xi_as_field(self, soliton_services, geometries, kenmotsu5):
        report = soliton_services.classify(kenmotsu5, geometries(kenmotsu5, count=5))
        assert report.collinear
        assert report.da_residual == 0.0
        assert report.soliton_type == "steady"

    def test_eta_einstein(self, soliton_services, geometries, eta_einstein5):
        report = soliton_services.classify(eta_einstein5, geometries(eta_einstein5, count=5))
        assert not report.einstein
        assert report.eta_einstein
        assert not report.constant_curvature
        assert report.label == "eta-einstein"

    def test_flat_control(self, soliton_services, geometries, flat_control):
        report = soliton_services.classify(flat_control, geometries(flat_control, count=5))
        assert report.ricci_flat
        assert report.kappa == 0.0 and report.constant_curvature
        assert report.kenmotsu is False and report.kenmotsu_residual == pytest.approx(1.0)
        assert report.soliton_residual is None
        assert report.label.startswith("ricci-flat")

    def test_sphere(self, soliton_services, geometries, sphere2):
        report = soliton_services.classify(sphere2, geometries(sphere2, count=5))
        assert report.kappa == pytest.approx(1.0, abs=1e-8)
        assert report.constant_curvature
        assert report.eta_einstein is None and report.lambda_hat is None
        assert report.kenmotsu_residual is None and report.kenmotsu is None

    def test_no_planes_in_one_dimension(self, soliton_services, geometries, load):
        spec = load("[manifold]\ndim = 1\ncoords = t\n\n[domain]\nt = 0..1\n\n[metric]\ng_1_1 = exp(t)\n")
        report = soliton_services.classify(spec, geometries(spec, count=3))
        assert report.planes == 0
        assert report.kappa is None and report.curvature_spread is None
        assert not report.constant_curvature
        assert report.label == "ricci-flat"

    def test_deterministic(self, soliton_services, geometries, kenmotsu3):
        points = geometries(kenmotsu3, count=5)
        assert soliton_services.classify(kenmotsu3, points, seed=3) == soliton_services.classify(kenmotsu3, points, seed=3)
