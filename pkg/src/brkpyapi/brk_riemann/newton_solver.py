import logging
from dataclasses import dataclass
from typing import Callable, Iterable, Optional, Tuple

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.system_exception import SystemException
from brkpyapi.brk_layers.layer_exception import LayerException
from brkpyapi.brk_riemann.riemann_exception import NewtonDivergedException
from brkpyapi.brk_waves.wave_exception import WaveException


MIN_STEP: float = 1.0 / 1024.0

RECOVERABLE = (WaveException, LayerException, SystemException, np.linalg.LinAlgError)


@dataclass
class NewtonResult:
    x: np.ndarray
    residual: float
    iterations: int
    start: int


def _evaluate(residual: Callable[[np.ndarray], np.ndarray], x: np.ndarray) -> Tuple[Optional[np.ndarray], float]:
    try:
        r: np.ndarray = residual(x)
    except RECOVERABLE as e:
        logging.debug(f"composed map failed at {x.tolist()}; Detail: {e}")
        return None, float("inf")
    return r, float(np.linalg.norm(r))


def _jacobian(residual: Callable[[np.ndarray], np.ndarray], x: np.ndarray, r: np.ndarray, scale: float,
              numerics: Numerics) -> Optional[np.ndarray]:
    jac: np.ndarray = np.empty((r.size, x.size))
    for j in range(x.size):
        h: float = numerics.fd_step * max(scale, abs(x[j]))
        e: np.ndarray = np.zeros(x.size)
        e[j] = h
        forward, _ = _evaluate(residual, x + e)
        if forward is not None:
            jac[:, j] = (forward - r) / h
            continue
        backward, _ = _evaluate(residual, x - e)
        if backward is None:
            return None
        jac[:, j] = (r - backward) / h
    return jac


def newton_solve(residual: Callable[[np.ndarray], np.ndarray], starts: Iterable[np.ndarray], tol: float,
                 numerics: Numerics = DEFAULT_NUMERICS, scale: float = 1.0,
                 label: str = "composed map") -> NewtonResult:
    """
    Damped Newton with a forward-difference Jacobian and backtracking on the
    residual norm, tried from each start in turn.

    :param residual: Map whose zero is sought; wave and layer failures count as an infinite residual.
    :type residual: Callable[[np.ndarray], np.ndarray]
    :param starts: Initial guesses, in order of preference.
    :type starts: Iterable[np.ndarray]
    :param tol: Residual norm accepted as converged.
    :type tol: float
    :param numerics: fd_step and newton_max_iter.
    :type numerics: Numerics
    :param scale: Lower bound for the finite-difference step scale.
    :type scale: float
    :param label: Name used in log messages.
    :type label: str
    :raises NewtonDivergedException: If no start converges.
    :return: Root, residual norm, iteration count and index of the start used.
    :rtype: NewtonResult
    """
    best: Tuple[float, Optional[np.ndarray]] = (float("inf"), None)
    for index, start in enumerate(starts):
        x: np.ndarray = np.array(start, dtype=float)
        r, norm = _evaluate(residual, x)
        if r is None:
            logging.warning(f"{label}: start {index} not evaluable, trying the next one")
            continue
        for iteration in range(numerics.newton_max_iter):
            logging.debug(f"{label}: start {index} iteration {iteration} residual {norm:.3e}")
            if norm <= tol:
                logging.info(f"{label}: converged in {iteration} iterations, residual {norm:.3e}")
                return NewtonResult(x=x, residual=norm, iterations=iteration, start=index)
            jac: Optional[np.ndarray] = _jacobian(residual, x, r, scale, numerics)
            if jac is None:
                break
            dx: np.ndarray = np.linalg.lstsq(jac, -r, rcond=None)[0]
            t: float = 1.0
            accepted: bool = False
            while t >= MIN_STEP:
                r_new, norm_new = _evaluate(residual, x + t * dx)
                if r_new is not None and norm_new < (1.0 - 1e-4 * t) * norm:
                    x, r, norm = x + t * dx, r_new, norm_new
                    accepted = True
                    break
                t *= 0.5
                logging.debug(f"{label}: step halved to {t:g}")
            if not accepted:
                break
        if norm < best[0]:
            best = (norm, x)
        if norm <= tol:
            logging.info(f"{label}: converged, residual {norm:.3e}")
            return NewtonResult(x=x, residual=norm, iterations=numerics.newton_max_iter, start=index)
        logging.warning(f"{label}: start {index} stopped at residual {norm:.3e}, trying the next one")
    raise NewtonDivergedException(
        f"{label}: Newton failed from every start, best residual {best[0]:.3e} at "
        f"{best[1].tolist() if best[1] is not None else None}",
        best=best[1])
