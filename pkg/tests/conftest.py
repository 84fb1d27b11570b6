import numpy as np
import pytest

from levyadapt import build_kernel
from levyadapt.kernel import BaseDensity


@pytest.fixture(scope="session")
def k2():
    """Default order-2 gaussian kernel (convolution-power scales)."""
    return build_kernel()


@pytest.fixture(scope="session")
def k1():
    return build_kernel(l=1)


@pytest.fixture(scope="session")
def k2_literal():
    return build_kernel(l=2, rule="literal")


@pytest.fixture(scope="session")
def k2_cauchy():
    return build_kernel(BaseDensity("cauchy"), l=2)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
