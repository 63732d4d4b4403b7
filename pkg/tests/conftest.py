import numpy as np
import pytest

from sbsim import compile_layout, default_bank_13, random_chip_layout
from sbsim.permanent import warm_up

CHIP13_SEED = 1  # frozen stand-in for the 13-mode chip


@pytest.fixture(scope="session", autouse=True)
def _jit_warmup():
    warm_up()


@pytest.fixture(scope="session")
def chip13_layout():
    return random_chip_layout(13, seed=CHIP13_SEED)


@pytest.fixture(scope="session")
def chip13(chip13_layout):
    return compile_layout(chip13_layout)


@pytest.fixture(scope="session")
def bank13():
    return default_bank_13()


@pytest.fixture(scope="session")
def chip9():
    return compile_layout(random_chip_layout(9, seed=CHIP13_SEED))


def random_complex(n, rng):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
