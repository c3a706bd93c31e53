import warnings

import pytest

from landau_hall.params import PhysicalParams


@pytest.fixture
def natural():
    return PhysicalParams()


@pytest.fixture
def crossed():
    return PhysicalParams(field_E=1.0)


@pytest.fixture(autouse=True)
def _numpy_warnings_are_errors():
    with warnings.catch_warnings():
        warnings.filterwarnings("error", category=RuntimeWarning)
        yield
