import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_layers.layer_exception import LayerException
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.riemann_exception import RiemannException
from brkpyapi.brk_riemann.validation import ValidationReport, validate_solution
from brkpyapi.brk_riemann.wave_fan import WaveFan
from brkpyapi.brk_waves.wave_exception import WaveException


SOLVER_ERRORS = (RiemannException, LayerException, WaveException)


@dataclass
class TraceContinuity:
    """
    Finite-difference estimate of how the trace moves with the boundary datum.

    :param lipschitz: max |trace(U_D + eta e_j) - trace(U_D)| / eta.
    :type lipschitz: float
    :param eta: Perturbation size.
    :type eta: float
    :param displacements: Trace displacement per coordinate direction.
    :type displacements: List[float]
    """
    lipschitz: float
    eta: float
    displacements: List[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"lipschitz": self.lipschitz, "eta": self.eta, "displacements": self.displacements}


def trace_continuity(sys: HyperbolicSystem, u0, u_d, eta: float = 1e-3,
                     numerics: Numerics = DEFAULT_NUMERICS) -> TraceContinuity:
    """
    Perturbs U_D by eta along every coordinate and reports the Lipschitz
    estimate of the trace.

    :raises ValueError: If eta is outside (0, 1e-3].
    """
    if not 0.0 < eta <= 1e-3:
        raise ValueError(f"eta={eta} outside (0, 1e-3]")
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(u_d, sys.n)
    base: WaveFan = solve_boundary_riemann(sys, state, boundary, numerics)
    displacements: List[float] = []
    for j in range(sys.n):
        e: np.ndarray = np.zeros(sys.n)
        e[j] = eta
        moved: WaveFan = solve_boundary_riemann(sys, state, boundary + e, numerics, initial_guess=base.strengths,
                                                regime=base.regime)
        displacements.append(float(np.linalg.norm(moved.trace - base.trace)))
    result = TraceContinuity(lipschitz=max(displacements) / eta, eta=eta, displacements=displacements)
    logging.info(f"trace continuity at U_D={boundary.tolist()}: L={result.lipschitz:.6g}")
    return result


@dataclass
class HypothesisConstants:
    """
    Empirical existence constants from a sweep of boundary data around U_0.

    :param data_max: Largest swept |U_D - U_0| for which every direction solved and validated.
    :type data_max: float
    :param tv_ratio: Largest TotVar / |U_0 - U_D| seen on the successful solves.
    :type tv_ratio: float
    """
    data_max: float
    tv_ratio: float
    sizes: List[float] = field(default_factory=list)
    successes: List[int] = field(default_factory=list)
    directions: int = 0

    def to_dict(self) -> dict:
        return {"data_max": self.data_max, "tv_ratio": self.tv_ratio, "sizes": self.sizes,
                "successes": self.successes, "directions": self.directions}


def hypothesis_constants(sys: HyperbolicSystem, u0, sizes: Optional[Sequence[float]] = None, directions: int = 4,
                         seed: int = 0, numerics: Numerics = DEFAULT_NUMERICS) -> HypothesisConstants:
    """
    Sweeps U_D = U_0 + size * d over random unit directions d and increasing
    sizes, and records the largest size that always succeeds.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Initial state.
    :param sizes: Increasing data sizes, a doubling ladder up to data_max when None.
    :type sizes: Optional[Sequence[float]]
    :param directions: Random directions per size.
    :type directions: int
    :param seed: Seed of the direction generator.
    :type seed: int
    :return: Estimated constants.
    :rtype: HypothesisConstants
    """
    state: np.ndarray = as_state(u0, sys.n)
    if sizes is None:
        ladder: List[float] = []
        size: float = 0.05
        while size <= numerics.data_max:
            ladder.append(size)
            size *= 2.0
        sizes = ladder
    rng = np.random.default_rng(seed)
    unit: np.ndarray = rng.standard_normal((directions, sys.n))
    unit /= np.linalg.norm(unit, axis=1)[:, None]

    data_max: float = 0.0
    tv_ratio: float = 0.0
    successes: List[int] = []
    for size in sizes:
        count: int = 0
        for d in unit:
            boundary: np.ndarray = state + size * d
            if not sys.region.contains(boundary):
                continue
            try:
                fan: WaveFan = solve_boundary_riemann(sys, state, boundary, numerics)
            except SOLVER_ERRORS as e:
                logging.debug(f"sweep size {size:.4g}: solve failed; Detail: {e}")
                continue
            report: ValidationReport = validate_solution(sys, fan, numerics)
            if report.passed:
                count += 1
                tv_ratio = max(tv_ratio, fan.total_variation / size)
        successes.append(count)
        if count < directions:
            logging.info(f"sweep stopped at size {size:.4g}: {count}/{directions} solved and validated")
            break
        data_max = float(size)
    return HypothesisConstants(data_max=data_max, tv_ratio=tv_ratio, sizes=[float(s) for s in sizes],
                               successes=successes, directions=directions)
