import numpy as np
import pytest

from wipsim import cruise_Q, default_mapping, default_params, synthesize


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def model_and_gains(params):
    return synthesize(params, T_s=1e-3)


@pytest.fixture(scope="session")
def model(model_and_gains):
    return model_and_gains[0]


@pytest.fixture(scope="session")
def gains(model_and_gains):
    return model_and_gains[1]


@pytest.fixture(scope="session")
def cruise_gains(params):
    return synthesize(params, T_s=1e-3, Q=cruise_Q())[1]


@pytest.fixture(scope="session")
def mapping():
    return default_mapping()


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
