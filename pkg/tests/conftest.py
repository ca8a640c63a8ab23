import numpy as np
import pytest

from kickedtops.floquet import floquet_system
from kickedtops.filtering import classify_eigenstates, eigenstate_features

BETA = np.pi / 2


@pytest.fixture(scope="session")
def chaotic_system():
    """Globally chaotic map: alpha = 6, beta = pi/2, J = 150."""
    return floquet_system(150, 6.0, BETA)


@pytest.fixture(scope="session")
def mixed_system():
    """Mixed phase space: alpha = 3/2, beta = pi/2, J = 150."""
    return floquet_system(150, 1.5, BETA)


@pytest.fixture(scope="session")
def mixed_features(mixed_system):
    return classify_eigenstates(eigenstate_features(mixed_system))


@pytest.fixture(scope="session")
def chaotic_features(chaotic_system):
    return classify_eigenstates(eigenstate_features(chaotic_system))
