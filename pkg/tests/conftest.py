import numpy as np
import pytest

from nqptomo.filters import build_kernel
from nqptomo.pattern_cv import CvPatternEvaluator
from nqptomo.pattern_dv import DvPatternEvaluator


@pytest.fixture(scope="session")
def kernel19():
    return build_kernel(1.9)


@pytest.fixture(scope="session")
def kernel12():
    return build_kernel(1.2)


@pytest.fixture(scope="session")
def cv19(kernel19):
    return CvPatternEvaluator(kernel19)


@pytest.fixture(scope="session")
def cv12(kernel12):
    return CvPatternEvaluator(kernel12)


@pytest.fixture(scope="session")
def dv3():
    return DvPatternEvaluator(d=3)


@pytest.fixture(scope="session")
def phases6():
    return [k * np.pi / 6 for k in range(6)]
