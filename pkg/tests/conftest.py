import math

import pytest

from thetabody.polycore import parse_polynomial
from thetabody.quotient import basis_principal, basis_stable_set, cycle_graph

CARDIOID_TEXT = "x1^4 + 2*x1^2*x2^2 + x2^4 + 4*x1^3 + 4*x1*x2^2 - 4*x2^2"


def cardioid_point(theta: float) -> tuple[float, float]:
    return (
        2.0 * math.cos(theta) * (1.0 - math.cos(theta)),
        2.0 * math.sin(theta) * (1.0 - math.cos(theta)),
    )


def cycle_theta_value(n: int) -> float:
    """Independent closed form for the level-1 stable set bound of a cycle."""
    c = math.cos(math.pi / n)
    return n * c / (1.0 + c)


@pytest.fixture(scope="session")
def pentagon():
    return cycle_graph(5)


@pytest.fixture(scope="session")
def pentagon_oracle_k1(pentagon):
    return basis_stable_set(pentagon, 1)


@pytest.fixture(scope="session")
def pentagon_oracle_k2(pentagon):
    return basis_stable_set(pentagon, 2)


@pytest.fixture(scope="session")
def pentagon_vertices(pentagon_oracle_k2):
    labels = pentagon_oracle_k2.basis.labels
    return [tuple(1 if v + 1 in s else 0 for v in range(5)) for s in labels]


@pytest.fixture(scope="session")
def cardioid_poly():
    return parse_polynomial(CARDIOID_TEXT)


@pytest.fixture(scope="session")
def cardioid_oracle_k1(cardioid_poly):
    return basis_principal(cardioid_poly, k=1)


@pytest.fixture(scope="session")
def cardioid_oracle_k2(cardioid_poly):
    return basis_principal(cardioid_poly, k=2)
