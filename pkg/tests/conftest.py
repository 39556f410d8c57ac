import numpy as np
import pytest

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.brk_models import build_system
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem


@pytest.fixture
def numerics() -> Numerics:
    return DEFAULT_NUMERICS


@pytest.fixture
def burgers() -> HyperbolicSystem:
    return build_system("burgers")


@pytest.fixture
def cubic() -> HyperbolicSystem:
    return build_system("cubic")


@pytest.fixture
def linear2() -> HyperbolicSystem:
    return build_system("linear2")


@pytest.fixture
def p_system() -> HyperbolicSystem:
    return build_system("p-system")


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
