import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_core.spectral import SpectralData, eigen_decompose
from brkpyapi.brk_riemann.fan_kind import FanKind
from brkpyapi.brk_riemann.newton_solver import NewtonResult, newton_solve
from brkpyapi.brk_riemann.riemann_exception import DataTooLargeException, NewtonDivergedException
from brkpyapi.brk_riemann.wave_fan import WaveFan
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_fan_curve import WaveCurveResult, default_nodes, wave_fan_curve


def check_data_size(jump: float, numerics: Numerics) -> None:
    if jump > numerics.data_max:
        raise DataTooLargeException(f"data jump {jump:.6g} exceeds data_max={numerics.data_max:g}")


def solve_nodes(jump: float, numerics: Numerics) -> int:
    """
    Grid cells used by every curve of one solve, fixed so the composed map is smooth.
    """
    return default_nodes(2.0 * jump, numerics)


def compose_curves(sys: HyperbolicSystem, base: np.ndarray, families: Sequence[int], strengths: Sequence[float],
                   nodes: int, numerics: Numerics = DEFAULT_NUMERICS) -> List[WaveCurveResult]:
    """
    Applies T_i(s_i, .) for the families in the order given, each curve
    starting at the endpoint of the previous one.

    :param base: State the first curve starts from.
    :type base: np.ndarray
    :param families: Families in application order, e.g. n, n-1, ..., 1.
    :type families: Sequence[int]
    :param strengths: Matching strengths.
    :type strengths: Sequence[float]
    :return: Curves in application order.
    :rtype: List[WaveCurveResult]
    """
    curves: List[WaveCurveResult] = []
    state: np.ndarray = base
    for family, s in zip(families, strengths):
        curve: WaveCurveResult = wave_fan_curve(sys, state, family, float(s), nodes=nodes, numerics=numerics)
        curves.append(curve)
        state = curve.endpoint
    return curves


def waves_in_fan_order(curves: Sequence[WaveCurveResult]) -> Tuple[Wave, ...]:
    """
    Concatenates the waves of curves applied from the fastest family down.
    """
    waves: List[Wave] = []
    for curve in reversed(curves):
        waves.extend(curve.waves)
    return tuple(waves)


def linearized_strengths(spectral: SpectralData, jump: np.ndarray) -> np.ndarray:
    return spectral.left @ jump


def solve_riemann(sys: HyperbolicSystem, u_minus, u_plus, numerics: Numerics = DEFAULT_NUMERICS,
                  initial_guess: Optional[Sequence[float]] = None) -> WaveFan:
    """
    Solves the Riemann problem by Newton on s -> T_1(s_1, ... T_n(s_n, U+)) - U-.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u_minus: Left state.
    :param u_plus: Right state.
    :param numerics: Tolerances.
    :type numerics: Numerics
    :param initial_guess: Start tried before zero strengths and the linearized solve.
    :type initial_guess: Optional[Sequence[float]]
    :raises DataTooLargeException: If |U+ - U-| > data_max.
    :raises NewtonDivergedException: If Newton fails from every start.
    :return: Fan with nondecreasing wave speeds.
    :rtype: WaveFan
    """
    left: np.ndarray = as_state(u_minus, sys.n)
    right: np.ndarray = as_state(u_plus, sys.n)
    jump: float = float(np.linalg.norm(left - right))
    check_data_size(jump, numerics)
    if jump == 0.0:
        return WaveFan(kind=FanKind.RIEMANN, left_state=left.copy(), right_state=right.copy(),
                       strengths=np.zeros(sys.n))

    nodes: int = solve_nodes(jump, numerics)
    families: List[int] = list(range(sys.n, 0, -1))

    def residual(x: np.ndarray) -> np.ndarray:
        return compose_curves(sys, right, families, x[::-1], nodes, numerics)[-1].endpoint - left

    starts: List[np.ndarray] = []
    if initial_guess is not None:
        starts.append(np.asarray(initial_guess, dtype=float))
    starts.append(np.zeros(sys.n))
    starts.append(linearized_strengths(eigen_decompose(sys, right, numerics), left - right))
    scale: float = max(1.0, float(np.max(np.abs(np.concatenate((left, right))))))
    try:
        result: NewtonResult = newton_solve(residual, starts, numerics.tol_newton * scale, numerics, label="riemann")
    except NewtonDivergedException as e:
        raise NewtonDivergedException(f"riemann {left.tolist()} | {right.tolist()} failed; Detail: {e}",
                                      best=e.best)

    curves: List[WaveCurveResult] = compose_curves(sys, right, families, result.x[::-1], nodes, numerics)
    fan = WaveFan(kind=FanKind.RIEMANN, left_state=left.copy(), right_state=right.copy(),
                  waves=waves_in_fan_order(curves), strengths=result.x.copy(),
                  newton_residual=result.residual, newton_iterations=result.iterations)
    logging.info(f"riemann {sys.name}: strengths {result.x.tolist()}, "
                 f"{[(w.kind.name, w.family) for w in fan.waves]}")
    return fan
