import pytest

from modelspace.acceptance import generator, random_theta
from modelspace.inner_function import BlaschkeProduct
from modelspace.model_space import tm_basis


@pytest.fixture
def rng():
    return generator(20240601)


@pytest.fixture
def z2_basis():
    return tm_basis(BlaschkeProduct((0j, 0j)))


@pytest.fixture
def random_basis(rng):
    """A degree-6 model space with zeros inside |z| <= 0.6."""
    return tm_basis(random_theta(rng, 6))
