import pytest

from app.entities.fixtures import build_finset, build_finset_mcat, build_finset_p, build_nojoin_fixture
from app.entities.par import par


# построение фикстур и Par дорогое, поэтому все на уровне сессии
@pytest.fixture(scope="session")
def finset_2():
    return build_finset(2)


@pytest.fixture(scope="session")
def finset_3():
    return build_finset(3)


@pytest.fixture(scope="session")
def finset_p_1():
    return build_finset_p(1)


@pytest.fixture(scope="session")
def finset_p_2():
    return build_finset_p(2)


@pytest.fixture(scope="session")
def inj_2():
    return build_finset_mcat(2, "inj")


@pytest.fixture(scope="session")
def iso_2():
    return build_finset_mcat(2, "iso")


@pytest.fixture(scope="session")
def inj_3():
    return build_finset_mcat(3, "inj")


@pytest.fixture(scope="session")
def nojoin():
    return build_nojoin_fixture()


@pytest.fixture(scope="session")
def par_inj_2(inj_2):
    return par(inj_2)
