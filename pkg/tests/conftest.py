import numpy as np
import pytest

from ncf.gf import field_for


@pytest.fixture
def gf():
    return field_for(7)


@pytest.fixture
def rng():
    return np.random.default_rng(20210101)
