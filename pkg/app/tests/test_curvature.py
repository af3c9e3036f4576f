import numpy as np
import pytest

from app.error import DegeneratePlane, InsufficientJetOrder

POLAR = """\
[manifold]
dim = 2
coords = x, y

[domain]
x = 1..3
y = 0..6

[metric]
g_1_1 = 1
g_2_2 = x^2
"""

# Diagonal, not Einstein, not conformally flat in any obvious way.
DIAGONAL = """\
[manifold]
dim = 3
coords = x, y, z

[domain]
x = -1..1
y = -1..1
z = -1..1

[metric]
g_1_1 = 2 + sin(x*y)
g_2_2 = exp(z*x)
g_3_3 = 1 + y^2 + x*z^2/3
"""

# Every plane in two Lorentzian dimensions is degenerate for the Riemannian formula.
LORENTZIAN = """\
[manifold]
dim = 2
coords = x, t

[domain]
x = -1..1
t = -1..1

[metric]
g_1_1 = -1
g_2_2 = exp(2*t)
"""


def vector(curvature_services, geometry, components):
    """Constant or jet-valued vector field wrapped at ``geometry``."""
    components = np.asarray(components, dtype=float)
    if components.ndim == 1:
        components = geometry.algebra.constant(components)
    return curvature_services.field(geometry, components, 1, 0)


def expected_hyperbolic_riemann(geometry):
    g = geometry.metric.value
    delta = np.eye(geometry.dim)
    # R(X, Y)Z = -(g(Y, Z) X - g(X, Z) Y)
    return -(np.einsum("jk,li->lijk", g, delta) - np.einsum("ik,lj->lijk", g, delta))


class TestPointGeometry:
    def test_order_too_low(self, curvature_services, kenmotsu3):
        with pytest.raises(InsufficientJetOrder, match="order >= 2"):
            curvature_services.point_geometry(kenmotsu3, (0.0, 0.0, 0.0), 1)

    def test_valid_orders(self, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        assert geometry.metric.valid_order == 3
        assert geometry.christoffel.valid_order == 2
        assert geometry.riemann.valid_order == 1
        assert geometry.scalar.valid_order == 1

    def test_polar_christoffel(self, curvature_services, load):
        gamma = curvature_services.christoffel(load(POLAR), (2.0, 0.5)).value
        assert gamma[0, 1, 1] == pytest.approx(-2.0, abs=1e-14)
        assert gamma[1, 0, 1] == pytest.approx(0.5, abs=1e-14)
        assert gamma[1, 1, 0] == pytest.approx(0.5, abs=1e-14)
        assert gamma[0, 0, 0] == pytest.approx(0.0, abs=1e-15)

    def test_polar_is_flat(self, curvature_services, load):
        riemann, down = curvature_services.riemann(load(POLAR), (2.0, 0.5))
        assert riemann.max_abs() < 1e-14
        assert down.max_abs() < 1e-14

    def test_sphere_curvature(self, curvature_services, sphere2):
        riemann, down = curvature_services.riemann(sphere2, (np.pi / 3, 1.0))
        assert down.value[0, 1, 1, 0] == pytest.approx(0.75, abs=1e-13)
        ricci, operator, scalar = curvature_services.ricci(sphere2, (np.pi / 3, 1.0))
        assert float(scalar.value) == pytest.approx(2.0, abs=1e-12)
        np.testing.assert_allclose(operator.value, np.eye(2), atol=1e-12)

    def test_kenmotsu3_christoffel(self, geometries, kenmotsu3):
        for geometry in geometries(kenmotsu3, count=20, seed=42):
            e2z = np.exp(2 * geometry.point[2])
            expected = np.zeros((3, 3, 3))
            expected[2, 0, 0] = expected[2, 1, 1] = -e2z
            expected[0, 0, 2] = expected[0, 2, 0] = 1.0
            expected[1, 1, 2] = expected[1, 2, 1] = 1.0
            np.testing.assert_allclose(geometry.christoffel.value, expected, atol=1e-11)

    def test_kenmotsu3_curvature(self, geometries, kenmotsu3):
        for geometry in geometries(kenmotsu3, count=20, seed=42):
            np.testing.assert_allclose(geometry.riemann.value, expected_hyperbolic_riemann(geometry), atol=1e-10)
            np.testing.assert_allclose(geometry.ricci.value, -2 * geometry.metric.value, atol=1e-10)
            assert float(geometry.scalar.value) == pytest.approx(-6.0, abs=1e-9)

    def test_hyperbolic_five_space(self, geometries, kenmotsu5):
        for geometry in geometries(kenmotsu5, count=5):
            np.testing.assert_allclose(geometry.ricci.value, -4 * geometry.metric.value, atol=1e-10)
            assert float(geometry.scalar.value) == pytest.approx(-20.0, abs=1e-9)


class TestIdentities:
    def test_universal_identities_on_generic_metric(self, curvature_services, geometries, load):
        for geometry in geometries(load(DIAGONAL), count=10, seed=3):
            assert curvature_services.metric_compatibility(geometry) < 1e-12
            assert curvature_services.riemann_symmetry_residual(geometry) < 1e-11
            assert curvature_services.bianchi_residual(geometry) < 1e-11
            assert curvature_services.div_Q_check(geometry) < 1e-9

    def test_generic_metric_is_not_einstein(self, geometries, load):
        geometry = geometries(load(DIAGONAL), count=1)[0]
        S, g = geometry.ricci.value, geometry.metric.value
        assert np.max(np.abs(S - float(geometry.scalar.value) / 3 * g)) > 1e-3

    def test_covariant_derivative_of_xi(self, curvature_services, contact_services, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        xi = contact_services.structure_at(kenmotsu3, geometry).xi
        nabla_xi = curvature_services.covariant_derivative(geometry, xi)
        assert nabla_xi.up == 1 and nabla_xi.down == 1
        np.testing.assert_allclose(nabla_xi.value, np.diag([1.0, 1.0, 0.0]), atol=1e-13)


class TestLieDerivatives:
    def test_killing_field_on_sphere(self, curvature_services, geometries, sphere2):
        for geometry in geometries(sphere2, count=5):
            rotation = vector(curvature_services, geometry, [0.0, 1.0])
            assert curvature_services.lie_derivative_metric(geometry, rotation).max_abs() < 1e-13
            assert curvature_services.lie_derivative_connection(geometry, rotation).max_abs() < 1e-12

    def test_metric_connection_vs_coordinates(self, curvature_services, manifold_services, geometries, load):
        spec = load(DIAGONAL)
        for geometry in geometries(spec, count=5):
            algebra, (x, y, z) = manifold_services.chart_seeds(geometry.point, geometry.order)
            V = vector(
                curvature_services,
                geometry,
                np.stack([algebra.multiply(y, z), algebra.apply("sin", x), algebra.multiply(x, algebra.multiply(y, z))]),
            )
            connection = curvature_services.lie_derivative_metric(geometry, V).value
            coordinate = curvature_services.lie_derivative_metric_coordinate(geometry, V).value
            np.testing.assert_allclose(connection, coordinate, atol=1e-12)

    def test_curvature_yano_formula_vs_coordinates(self, curvature_services, manifold_services, geometries, load):
        spec = load(DIAGONAL)
        for geometry in geometries(spec, count=5):
            algebra, (x, y, z) = manifold_services.chart_seeds(geometry.point, geometry.order)
            V = vector(curvature_services, geometry, np.stack([algebra.multiply(x, y), z, algebra.apply("exp", x)]))
            connection = curvature_services.lie_derivative_curvature(geometry, V).value
            coordinate = curvature_services.lie_derivative_curvature_coordinate(geometry, V).value
            np.testing.assert_allclose(connection, coordinate, atol=1e-10)

    def test_lie_curvature_is_computed_once_per_field(self, curvature_services, soliton_services, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        V = soliton_services.soliton_at(kenmotsu3, geometry).V
        assert soliton_services.soliton_at(kenmotsu3, geometry) is soliton_services.soliton_at(kenmotsu3, geometry)
        first = curvature_services.lie_derivative_curvature(geometry, V)
        assert curvature_services.lie_derivative_curvature(geometry, V) is first
        other = vector(curvature_services, geometry, [1.0, 0.0, 0.0])
        assert curvature_services.lie_derivative_curvature(geometry, other) is not first

    def test_bilinear_lie_derivative_of_metric(self, curvature_services, manifold_services, geometries, load):
        spec = load(DIAGONAL)
        for geometry in geometries(spec, count=3):
            algebra, (x, y, z) = manifold_services.chart_seeds(geometry.point, geometry.order)
            V = vector(curvature_services, geometry, np.stack([algebra.apply("cos", z), algebra.multiply(x, x), y]))
            bilinear = curvature_services.lie_derivative_bilinear(geometry, V, geometry.metric)
            np.testing.assert_allclose(
                bilinear.value, curvature_services.lie_derivative_metric(geometry, V).value, atol=1e-12
            )

    def test_lie_metric_against_finite_differences(self, curvature_services, manifold_services, geometries, load):
        # (Lie_V g)_ij = V^k d_k g_ij + g_kj d_i V^k + g_ik d_j V^k with a constant V
        spec = load(DIAGONAL)
        geometry = geometries(spec, count=1)[0]
        direction = np.array([0.3, -0.7, 0.5])
        V = vector(curvature_services, geometry, direction)
        h = 1e-5
        p = geometry.point
        derivative = (
            manifold_services.metric_value(spec, p + h * direction) - manifold_services.metric_value(spec, p - h * direction)
        ) / (2 * h)
        np.testing.assert_allclose(
            curvature_services.lie_derivative_metric(geometry, V).value, derivative, rtol=1e-7, atol=1e-8
        )

    def test_bracket_with_xi(self, curvature_services, contact_services, soliton_services, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        V = soliton_services.soliton_at(kenmotsu3, geometry).V
        xi = contact_services.structure_at(kenmotsu3, geometry).xi
        bracket = curvature_services.lie_derivative_vector(geometry, V, xi)
        assert bracket.max_abs() < 1e-14
        assert bracket.valid_order == geometry.order - 1


class TestGradientHessian:
    def test_hessian_of_z(self, curvature_services, manifold_services, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        algebra, (_, _, z) = manifold_services.chart_seeds(geometry.point, geometry.order)
        f = curvature_services.field(geometry, z, 0, 0)
        grad, hess = curvature_services.gradient_hessian(geometry, f)
        np.testing.assert_allclose(grad.value, [0.0, 0.0, 1.0], atol=1e-14)
        eta = np.array([0.0, 0.0, 1.0])
        np.testing.assert_allclose(hess.value, geometry.metric.value - np.outer(eta, eta), atol=1e-12)

    def test_gradient_of_potential(self, soliton_services, geometries, kenmotsu3_gradient):
        for geometry in geometries(kenmotsu3_gradient, count=5):
            x, _, z = geometry.point
            V = soliton_services.soliton_at(kenmotsu3_gradient, geometry).V
            np.testing.assert_allclose(V.value, [-np.exp(-z), 0.0, 1 - x * np.exp(z)], atol=1e-12)

    def test_differential(self, curvature_services, geometries, kenmotsu3_gradient, soliton_services):
        geometry = geometries(kenmotsu3_gradient, count=1)[0]
        x, _, z = geometry.point
        f = soliton_services.soliton_at(kenmotsu3_gradient, geometry).f
        df = curvature_services.differential(geometry, f)
        np.testing.assert_allclose(df.value, [-np.exp(z), 0.0, 1 - x * np.exp(z)], atol=1e-12)

    def test_hessian_is_covariant_derivative_of_differential(self, curvature_services, manifold_services, geometries, load):
        spec = load(DIAGONAL)
        for geometry in geometries(spec, count=5):
            algebra, (x, y, z) = manifold_services.chart_seeds(geometry.point, geometry.order)
            f = curvature_services.field(geometry, algebra.multiply(algebra.apply("sin", x), algebra.multiply(y, z)), 0, 0)
            _, hess = curvature_services.gradient_hessian(geometry, f)
            nabla_df = curvature_services.covariant_derivative(geometry, curvature_services.differential(geometry, f))
            np.testing.assert_allclose(nabla_df.value, hess.value, atol=1e-11)


class TestSectional:
    def test_constant_minus_one(self, curvature_services, geometries, kenmotsu3, rng):
        for geometry in geometries(kenmotsu3, count=20, seed=42):
            values = curvature_services.sample_sectional(geometry, rng, 3)
            np.testing.assert_allclose(values, -1.0, atol=1e-8)

    def test_sphere_plus_one(self, curvature_services, geometries, sphere2, rng):
        for geometry in geometries(sphere2, count=5):
            assert curvature_services.sectional(geometry, [1.0, 0.0], [0.3, 2.0]) == pytest.approx(1.0, abs=1e-12)

    def test_degenerate_plane(self, curvature_services, geometries, kenmotsu3):
        geometry = geometries(kenmotsu3, count=1)[0]
        with pytest.raises(DegeneratePlane, match="degenerate"):
            curvature_services.sectional(geometry, [1.0, 2.0, 0.0], [2.0, 4.0, 0.0])

    def test_sectional_is_a_property_of_the_plane(self, curvature_services, geometries, load, rng):
        for geometry in geometries(load(DIAGONAL), count=5, seed=5):
            X, Y = rng.normal(size=(2, 3))
            a, b, c, d = 0.7, -1.3, 2.1, 0.4
            expected = curvature_services.sectional(geometry, X, Y)
            rotated = curvature_services.sectional(geometry, a * X + b * Y, c * X + d * Y)
            assert rotated == pytest.approx(expected, abs=1e-10)

    def test_no_planes_in_one_dimension(self, curvature_services, geometries, load, rng):
        spec = load("[manifold]\ndim = 1\ncoords = t\n\n[domain]\nt = 0..1\n\n[metric]\ng_1_1 = exp(t)\n")
        geometry = geometries(spec, count=1)[0]
        assert curvature_services.sample_sectional(geometry, rng, 5) == []

    def test_gives_up_when_every_plane_is_degenerate(self, curvature_services, geometries, load, rng, caplog):
        geometry = geometries(load(LORENTZIAN), count=1)[0]
        assert curvature_services.sample_sectional(geometry, rng, 3) == []
        assert "Only 0 of 3 random planes" in caplog.text
