import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_core.spectral import eigen_decompose
from brkpyapi.brk_waves.wave_exception import LeftRegionException


@dataclass(frozen=True, eq=False)
class IntegralCurve:
    """
    Samples of the integral curve dU/ds = r_i(U) through a base state.
    """
    family: int
    base: np.ndarray
    s: np.ndarray
    states: np.ndarray
    speeds: np.ndarray

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]


def rk4_step(sys: HyperbolicSystem, u: np.ndarray, family: int, h: float,
             numerics: Numerics = DEFAULT_NUMERICS) -> np.ndarray:
    def r(w: np.ndarray) -> np.ndarray:
        return eigen_decompose(sys, w, numerics).r(family)

    k1: np.ndarray = r(u)
    k2: np.ndarray = r(u + 0.5 * h * k1)
    k3: np.ndarray = r(u + 0.5 * h * k2)
    k4: np.ndarray = r(u + h * k3)
    return u + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def rarefaction_curve(sys: HyperbolicSystem, u0, family: int, s: float, ds: Optional[float] = None,
                      numerics: Numerics = DEFAULT_NUMERICS) -> IntegralCurve:
    """
    Integrates dU/ds = r_i(U) from U0 over [0, s] with classical RK4.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Base state.
    :param family: 1-based family.
    :type family: int
    :param s: Signed strength.
    :type s: float
    :param ds: Step bound, numerics.rk4_step when None.
    :type ds: Optional[float]
    :raises LeftRegionException: If the curve leaves the region.
    :return: Sampled curve with lambda_i along it.
    :rtype: IntegralCurve
    """
    base: np.ndarray = as_state(u0, sys.n)
    step_bound: float = numerics.rk4_step if ds is None else ds
    steps: int = max(1, math.ceil(abs(s) / step_bound))
    h: float = s / steps
    states: np.ndarray = np.empty((steps + 1, sys.n))
    states[0] = base
    for j in range(steps):
        states[j + 1] = rk4_step(sys, states[j], family, h, numerics)
        if not sys.region.contains(states[j + 1]):
            raise LeftRegionException(
                f"rarefaction curve of family {family} left the region at s={(j + 1) * h:.6g}")
    speeds: np.ndarray = np.array([eigen_decompose(sys, w, numerics).lam(family) for w in states])
    logging.debug(f"rarefaction family {family} from {base.tolist()}: {steps} RK4 steps of {h:.3e}")
    return IntegralCurve(family=family, base=base, s=np.linspace(0.0, s, steps + 1), states=states, speeds=speeds)
