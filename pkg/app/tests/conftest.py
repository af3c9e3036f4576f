import numpy as np
import pytest

from app.contact.services import ContactService
from app.curvature.services import CurvatureService
from app.manifold.services import ManifoldService
from app.soliton.services import SolitonService
from app.verify.fixtures import fixture_text

# Standard Sasakian structure on R^3 (contact form (dz - y dx)/2): a contact
# metric structure that is not Kenmotsu.
SASAKIAN_CONTROL = """\
[manifold]
dim = 3
coords = x, y, z

[domain]
x = -1..1
y = -1..1
z = -1..1

[metric]
g_1_1 = 1/4 + y^2/4
g_1_3 = -y/4
g_2_2 = 1/4
g_3_3 = 1/4

[structure]
xi = 0, 0, 2
eta = -y/2, 0, 1/2
phi_1_2 = 1
phi_2_1 = -1
phi_3_2 = y
"""

# R x_{e^t} (S^2 x S^2): Kenmotsu, eta-Einstein but not Einstein.
ETA_EINSTEIN5 = """\
[manifold]
dim = 5
coords = th1, ph1, th2, ph2, t

[domain]
th1 = 0.5..2.5
ph1 = 0..6
th2 = 0.5..2.5
ph2 = 0..6
t = -1..1

[metric]
g_1_1 = exp(2*t)
g_2_2 = exp(2*t)*sin(th1)^2
g_3_3 = exp(2*t)
g_4_4 = exp(2*t)*sin(th2)^2
g_5_5 = 1

[structure]
xi = 0, 0, 0, 0, 1
eta = 0, 0, 0, 0, 1
phi_2_1 = 1/sin(th1)
phi_1_2 = -sin(th1)
phi_4_3 = 1/sin(th2)
phi_3_4 = -sin(th2)
"""


def kenmotsu3_text(a: float = 0.5, lam: str = "0") -> str:
    return fixture_text("kenmotsu3").replace("a = 0.5", f"a = {a}").replace("\nlambda = 0", f"\nlambda = {lam}")


@pytest.fixture(scope="session")
def manifold_services():
    return ManifoldService()


@pytest.fixture(scope="session")
def curvature_services(manifold_services):
    return CurvatureService(manifold_services)


@pytest.fixture(scope="session")
def contact_services(manifold_services, curvature_services):
    return ContactService(manifold_services, curvature_services)


@pytest.fixture(scope="session")
def soliton_services(manifold_services, curvature_services, contact_services):
    return SolitonService(manifold_services, curvature_services, contact_services)


@pytest.fixture(scope="session")
def load(manifold_services):
    def _load(text_or_name: str):
        text = text_or_name if "[manifold]" in text_or_name else fixture_text(text_or_name)
        return manifold_services.load_manifold(text)

    return _load


@pytest.fixture(scope="session")
def kenmotsu3(load):
    return load("kenmotsu3")


@pytest.fixture(scope="session")
def kenmotsu3_gradient(load):
    return load("kenmotsu3-gradient")


@pytest.fixture(scope="session")
def kenmotsu5(load):
    return load("kenmotsu5-warped")


@pytest.fixture(scope="session")
def flat_control(load):
    return load("flat-control")


@pytest.fixture(scope="session")
def sphere2(load):
    return load("sphere2-control")


@pytest.fixture(scope="session")
def sasakian(load):
    return load(SASAKIAN_CONTROL)


@pytest.fixture(scope="session")
def eta_einstein5(load):
    return load(ETA_EINSTEIN5)


@pytest.fixture(scope="session")
def sample(manifold_services):
    def _sample(spec, count=5, seed=7):
        return manifold_services.sample_points(spec.domain, count, seed)

    return _sample


@pytest.fixture(scope="session")
def geometries(curvature_services, sample):
    def _geometries(spec, count=5, seed=7, order=3):
        return [curvature_services.point_geometry(spec, p, order) for p in sample(spec, count, seed)]

    return _geometries


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
