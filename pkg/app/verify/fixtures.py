"""Built-in manifold configs, compiled in so that ``examples`` runs without any file on disk."""

from app.error import UnknownFixture

KENMOTSU3 = """\
# N x I with the exp(2z) warping; V solves the *-Ricci soliton equation with lambda = 0
[manifold]
dim = 3
coords = x, y, z

[params]
a = 0.5

[domain]
x = -1..1
y = -1..1
z = -1..1

[metric]
g_1_1 = exp(2*z)
g_2_2 = exp(2*z)
g_3_3 = 1

[structure]
xi = 0, 0, 1
eta = 0, 0, 1
phi_2_1 = 1
phi_1_2 = -1

[soliton]
V = (1-a)*x, (1-a)*y, a
lambda = 0
"""

KENMOTSU3_GRADIENT = """\
# same Kenmotsu structure, gradient almost *-Ricci soliton with non-constant lambda
[manifold]
dim = 3
coords = x, y, z

[domain]
x = -1..1
y = -1..1
z = -1..1

[metric]
g_1_1 = exp(2*z)
g_2_2 = exp(2*z)
g_3_3 = 1

[structure]
xi = 0, 0, 1
eta = 0, 0, 1
phi_2_1 = 1
phi_1_2 = -1

[soliton]
f = -x*exp(z) + z
lambda = x*exp(z)
"""

KENMOTSU5_WARPED = """\
# warped product of the t-line with flat R^4 (Kaehler), warping c*e^t: hyperbolic 5-space
[manifold]
dim = 5
coords = x1, y1, x2, y2, t

[params]
c = 1.5

[domain]
x1 = -1..1
y1 = -1..1
x2 = -1..1
y2 = -1..1
t = -1..1

[metric]
g_1_1 = c^2*exp(2*t)
g_2_2 = c^2*exp(2*t)
g_3_3 = c^2*exp(2*t)
g_4_4 = c^2*exp(2*t)
g_5_5 = 1

[structure]
xi = 0, 0, 0, 0, 1
eta = 0, 0, 0, 0, 1
phi_2_1 = 1
phi_1_2 = -1
phi_4_3 = 1
phi_3_4 = -1

[soliton]
V = 0, 0, 0, 0, 1
lambda = 0
"""

FLAT_CONTROL = """\
# Euclidean R^3 with the Kenmotsu (phi, xi, eta) of the exp(2z) example: not Kenmotsu
[manifold]
dim = 3
coords = x, y, z

[domain]
x = -1..1
y = -1..1
z = -1..1

[metric]
g_1_1 = 1
g_2_2 = 1
g_3_3 = 1

[structure]
xi = 0, 0, 1
eta = 0, 0, 1
phi_2_1 = 1
phi_1_2 = -1
"""

SPHERE2_CONTROL = """\
# round unit 2-sphere, no contact structure
[manifold]
dim = 2
coords = theta, phi

[domain]
theta = 0.3..2.8
phi = 0..6

[metric]
g_1_1 = 1
g_2_2 = sin(theta)^2
"""

BUILTIN_FIXTURES: dict[str, str] = {
    "kenmotsu3": KENMOTSU3,
    "kenmotsu3-gradient": KENMOTSU3_GRADIENT,
    "kenmotsu5-warped": KENMOTSU5_WARPED,
    "flat-control": FLAT_CONTROL,
    "sphere2-control": SPHERE2_CONTROL,
}


def fixture_names() -> list[str]:
    return list(BUILTIN_FIXTURES)


def fixture_text(name: str) -> str:
    if name not in BUILTIN_FIXTURES:
        raise UnknownFixture(f"unknown example {name!r}; available: {', '.join(BUILTIN_FIXTURES)}")
    return BUILTIN_FIXTURES[name]
