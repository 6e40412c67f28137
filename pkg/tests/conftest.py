import numpy as np
import pytest

from zygdist import GridFunction, parse_function_spec, synthesize
from zygdist.wavelet import filter_bank

J_TEST = 12
N_TEST = 2**J_TEST


@pytest.fixture(scope="session")
def cos_12():
    x = np.arange(N_TEST) / N_TEST
    return GridFunction(1, J_TEST, np.cos(2 * np.pi * x), label="cos")


@pytest.fixture(scope="session")
def weier1_12():
    return synthesize(parse_function_spec("weierstrass s=1 levels=9 signs=plus"), 1, J_TEST)


@pytest.fixture(scope="session")
def weier05_12():
    return synthesize(parse_function_spec("weierstrass s=0.5 levels=9 signs=plus"), 1, J_TEST)


@pytest.fixture(scope="session")
def atom_12():
    return synthesize(parse_function_spec("wavelet-atom l=1 j=3 k=2"), 1, J_TEST)


@pytest.fixture(scope="session")
def random_12():
    rng = np.random.default_rng(11)
    return GridFunction(1, J_TEST, rng.standard_normal(N_TEST), label="rand")


@pytest.fixture(scope="session")
def bank8():
    return filter_bank(8)


@pytest.fixture(scope="session")
def bank2():
    return filter_bank(2)
