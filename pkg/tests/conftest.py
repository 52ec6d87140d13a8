import pytest

from momentlab import random_rational_distributions


@pytest.fixture(scope="session")
def pool10():
    """Ten positive-support rational laws shared by the slower suites."""
    return random_rational_distributions(101, 10)


@pytest.fixture(scope="session")
def pool_small():
    return random_rational_distributions(42, 5)
