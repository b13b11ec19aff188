import numpy as np
import pytest

from tomostop.homodyne import Scenario, sample_homodyne, scenario_truth
from tomostop.likelihood import qubit_example


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def qubit_data():
    return qubit_example()


@pytest.fixture(scope="session")
def cat_scenario():
    return Scenario()


@pytest.fixture(scope="session")
def cat_data(cat_scenario):
    return sample_homodyne(cat_scenario, scenario_truth(cat_scenario))
