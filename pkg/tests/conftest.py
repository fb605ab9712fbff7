import numpy as np
import pytest

from bienayme.families import OffspringFamily, OffspringLaw, load_preset
from bienayme.flatlaw import materialize_flat_law


@pytest.fixture(scope="session")
def binary_family():
    return load_preset("monotype_binary")


@pytest.fixture(scope="session")
def ternary_family():
    return load_preset("monotype_ternary")


@pytest.fixture(scope="session")
def two_type_family():
    return load_preset("two_type_symmetric")


@pytest.fixture(scope="session")
def poisson_family():
    return load_preset("poisson_reducible")


@pytest.fixture(scope="session")
def localized_family():
    return load_preset("localized_deterministic")


@pytest.fixture(scope="session")
def binary_flat_law(binary_family):
    return materialize_flat_law(binary_family)


@pytest.fixture(scope="session")
def two_type_flat_law(two_type_family):
    return materialize_flat_law(two_type_family)


@pytest.fixture(scope="session")
def poisson_flat_law(poisson_family):
    return materialize_flat_law(poisson_family, coverage=1 - 1e-9)


def make_family(K, Kprime, lam, laws):
    """Explicit family from {word: prob} dicts."""
    built = tuple(
        OffspringLaw(tuple(words.keys()), np.array(list(words.values())))
        for words in laws
    )
    return OffspringFamily(K, Kprime, built, np.array(lam))
