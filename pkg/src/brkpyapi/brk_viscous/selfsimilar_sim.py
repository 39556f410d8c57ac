import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_riemann.riemann_exception import NewtonDivergedException
from brkpyapi.brk_viscous.classical_sim import march_selfsimilar, speed_bound, total_variation
from brkpyapi.brk_viscous.grid_solution import GridSolution, SimulationConfig, l1_distance
from brkpyapi.brk_viscous.solution_kind import SolutionKind
from brkpyapi.brk_viscous.viscous_exception import ViscousException


BVP_TOL: float = 1e-10
BVP_STEP_TOL: float = 1e-12
MIN_STEP: float = 1.0 / 1024.0
MIN_RATIO: float = 1.05
MIN_XI_NODES: int = 200
MAX_XI_NODES: int = 20000


def xi_extent(lam_max: float, epsilon: float, numerics: Numerics) -> float:
    return lam_max + numerics.margin + 10.0 * epsilon


def xi_nodes(xi_max: float, lam_max: float, epsilon: float) -> int:
    """
    Cells so that |lambda - xi| h / epsilon stays below one.
    """
    cells: int = int(math.ceil(xi_max * (lam_max + xi_max) / epsilon))
    return int(min(MAX_XI_NODES, max(MIN_XI_NODES, cells)))


class _SimilarityBVP:
    """
    Central differences for F(V)' - xi V' = epsilon (B(V) V')' on a uniform xi
    grid, with V fixed at both ends. The unknowns are the interior nodes.
    """

    def __init__(self, sys: HyperbolicSystem, u0: np.ndarray, ud: np.ndarray, xi: np.ndarray):
        self.sys: HyperbolicSystem = sys
        self.u0: np.ndarray = u0
        self.ud: np.ndarray = ud
        self.xi: np.ndarray = xi
        self.h: float = float(xi[1] - xi[0])
        self.interior: int = xi.size - 2

    def full(self, x: np.ndarray) -> np.ndarray:
        return np.vstack((self.ud[None, :], x.reshape(self.interior, self.sys.n), self.u0[None, :]))

    def residual(self, x: np.ndarray, epsilon: float) -> np.ndarray:
        v: np.ndarray = self.full(x)
        flux: np.ndarray = np.array([self.sys.F(u) for u in v])
        b_mid: np.ndarray = np.array([self.sys.B(u) for u in 0.5 * (v[1:] + v[:-1])])
        diffusive: np.ndarray = np.einsum("mij,mj->mi", b_mid, v[1:] - v[:-1])
        convective: np.ndarray = 0.5 * (flux[2:] - flux[:-2]) - 0.5 * self.xi[1:-1, None] * (v[2:] - v[:-2])
        return (convective - (epsilon / self.h) * (diffusive[1:] - diffusive[:-1])).reshape(-1)

    def jacobian(self, x: np.ndarray, r0: np.ndarray, epsilon: float, fd_step: float) -> sparse.csc_matrix:
        """
        Forward differences with 3n colors; node j only couples to j - 1, j, j + 1.
        """
        n: int = self.sys.n
        m: int = self.interior
        nodes: np.ndarray = np.arange(m)
        rows: List[np.ndarray] = []
        cols: List[np.ndarray] = []
        vals: List[np.ndarray] = []
        for color in range(3):
            source: np.ndarray = nodes[nodes % 3 == color]
            if source.size == 0:
                continue
            for comp in range(n):
                index: np.ndarray = source * n + comp
                step: np.ndarray = fd_step * np.maximum(1.0, np.abs(x[index]))
                shifted: np.ndarray = x.copy()
                shifted[index] += step
                change: np.ndarray = ((self.residual(shifted, epsilon) - r0).reshape(m, n))
                for offset in (-1, 0, 1):
                    target: np.ndarray = source + offset
                    ok: np.ndarray = (target >= 0) & (target < m)
                    for a in range(n):
                        rows.append(target[ok] * n + a)
                        cols.append(index[ok])
                        vals.append(change[target[ok], a] / step[ok])
        return sparse.csc_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                                 shape=(m * n, m * n))


def _newton_stage(problem: _SimilarityBVP, x: np.ndarray, epsilon: float, scale: float,
                  numerics: Numerics) -> Tuple[np.ndarray, int, float]:
    """
    Damped Newton at one continuation stage.

    :raises NewtonDivergedException: If the line search or the iteration budget runs out.
    :return: (solution, iterations, residual).
    """
    r: np.ndarray = problem.residual(x, epsilon)
    norm: float = float(np.linalg.norm(r))
    for iteration in range(1, numerics.newton_max_iter + 1):
        if float(np.max(np.abs(r), initial=0.0)) <= BVP_TOL * scale:
            return x, iteration - 1, float(np.max(np.abs(r), initial=0.0))
        jac: sparse.csc_matrix = problem.jacobian(x, r, epsilon, numerics.fd_step)
        delta: np.ndarray = spsolve(jac, -r)
        if not np.all(np.isfinite(delta)):
            raise NewtonDivergedException(f"singular Jacobian at eps={epsilon:.6g}, iteration {iteration}")
        damping: float = 1.0
        while True:
            trial: np.ndarray = x + damping * delta
            r_trial: np.ndarray = problem.residual(trial, epsilon)
            trial_norm: float = float(np.linalg.norm(r_trial))
            if np.isfinite(trial_norm) and trial_norm <= (1.0 - 0.25 * damping) * norm:
                break
            damping *= 0.5
            if damping < MIN_STEP:
                raise NewtonDivergedException(f"line search failed at eps={epsilon:.6g}, iteration {iteration}, "
                                              f"|R|={norm:.3e}")
        logging.debug(f"self-similar eps={epsilon:.6g} it={iteration}: |R|={trial_norm:.3e} damping={damping:g}")
        x, r, norm = trial, r_trial, trial_norm
        if damping == 1.0 and float(np.max(np.abs(delta))) <= BVP_STEP_TOL * scale:
            return x, iteration, float(np.max(np.abs(r), initial=0.0))
    raise NewtonDivergedException(f"no convergence in {numerics.newton_max_iter} iterations at eps={epsilon:.6g}, "
                                  f"|R|={norm:.3e}")


def continuation(solve_stage: Callable[[float], None], target: float, numerics: Numerics) -> List[float]:
    """
    Calls solve_stage on eps_start, eps_start / 2, ... down to the target.
    A failed stage is retried from the last good epsilon with the ratio
    reduced to continuation_refine, then to its square roots.

    :raises NewtonDivergedException: If the ratio falls below MIN_RATIO; the message names the last good epsilon.
    :return: Epsilons solved, in order.
    :rtype: List[float]
    """
    stages: List[float] = []
    current: float = max(target, numerics.eps_start)
    try:
        solve_stage(current)
    except NewtonDivergedException as e:
        raise NewtonDivergedException(f"first continuation stage eps={current:.6g} failed; Detail: {e}")
    stages.append(current)
    ratio: float = 2.0
    while current > target:
        trial: float = max(target, current / ratio)
        try:
            solve_stage(trial)
        except NewtonDivergedException as e:
            ratio = numerics.continuation_refine if ratio > numerics.continuation_refine else math.sqrt(ratio)
            logging.warning(f"continuation stage eps={trial:.6g} failed, ratio reduced to {ratio:.4g}; Detail: {e}")
            if ratio < MIN_RATIO:
                raise NewtonDivergedException(f"continuation stalled: last good eps={current:.6g}, target {target:.6g}",
                                              best=current)
            continue
        current = trial
        stages.append(current)
        ratio = min(2.0, ratio * numerics.continuation_refine)
    return stages


def simulate_selfsimilar(sys: HyperbolicSystem, u0, ud, epsilon: float,
                         config: SimulationConfig = SimulationConfig(),
                         numerics: Numerics = DEFAULT_NUMERICS) -> GridSolution:
    """
    Solves the self-similar boundary value problem
    (DF(V) - xi I) V' = epsilon (B(V) V')' on [0, Xi], V(0) = U_D, V(Xi) = U_0,
    by damped Newton with continuation in epsilon from eps_start.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Initial state U_0.
    :param ud: Boundary datum U_D.
    :param epsilon: Target viscosity scale, positive.
    :type epsilon: float
    :param config: xi_nodes and time_marching are used here.
    :type config: SimulationConfig
    :param numerics: margin, eps_start and continuation_refine in particular.
    :type numerics: Numerics
    :raises ValueError: If epsilon is not positive.
    :raises NewtonDivergedException: If a continuation stage cannot be solved.
    :return: Self-similar solution on the xi grid.
    :rtype: GridSolution
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon={epsilon} must be > 0")
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(ud, sys.n)
    lam_max, _ = speed_bound(sys, state, boundary)
    xi_max: float = xi_extent(lam_max, epsilon, numerics)
    cells: int = config.xi_nodes if config.xi_nodes is not None else xi_nodes(xi_max, lam_max, epsilon)
    xi: np.ndarray = np.linspace(0.0, xi_max, cells + 1)
    problem = _SimilarityBVP(sys, state, boundary, xi)
    scale: float = max(1.0, float(np.max(np.abs(np.concatenate((state, boundary))))))
    label: str = f"self-similar {sys.name} eps={epsilon:g}"

    # linear ramp between the data
    weights: np.ndarray = xi[1:-1, None] / xi_max
    guess: List[np.ndarray] = [((1.0 - weights) * boundary[None, :] + weights * state[None, :]).reshape(-1)]
    iterations: List[int] = []
    residuals: List[float] = []

    def solve_stage(eps: float) -> None:
        x, count, res = _newton_stage(problem, guess[-1], eps, scale, numerics)
        guess.append(x)
        iterations.append(count)
        residuals.append(res)

    if np.array_equal(state, boundary):
        stages: List[float] = [epsilon]
        values: np.ndarray = np.repeat(state[None, :], xi.size, axis=0)
        residuals.append(0.0)
        iterations.append(0)
    else:
        try:
            stages = continuation(solve_stage, epsilon, numerics)
        except NewtonDivergedException as e:
            raise NewtonDivergedException(f"{label} failed; Detail: {e}", best=e.best)
        values = problem.full(guess[-1])

    record: dict = config.to_dict()
    record.update({"xi_max": xi_max, "xi_nodes": cells, "h": problem.h})
    diagnostics: dict = {"stages": stages, "iterations": iterations, "residual": residuals[-1]}
    solution = GridSolution(kind=SolutionKind.SELF_SIMILAR, epsilon=epsilon, grid=xi, values=values,
                            config=record, total_variation=np.array([total_variation(values)]),
                            diagnostics=diagnostics)
    logging.info(f"{label}: {len(stages)} continuation stages, residual {residuals[-1]:.3e} on {xi.size} nodes")

    if config.time_marching:
        diagnostics["time_marching_l1"] = _marching_cross_check(sys, state, boundary, epsilon, config, numerics,
                                                                solution)
    return solution


def _marching_cross_check(sys: HyperbolicSystem, u0: np.ndarray, ud: np.ndarray, epsilon: float,
                          config: SimulationConfig, numerics: Numerics,
                          solution: GridSolution) -> Optional[float]:
    try:
        marched: GridSolution = march_selfsimilar(sys, u0, ud, epsilon, config, numerics)
        window: Tuple[float, float] = (0.0, min(float(solution.grid[-1]), float(marched.grid[-1]) / marched.times[-1]))
        distance: float = l1_distance(marched.similarity_slice(), solution.similarity_slice(), window)
    except ViscousException as e:
        logging.warning(f"time-marched cross-check of {sys.name} failed; Detail: {e}")
        return None
    logging.info(f"time-marched cross-check of {sys.name} eps={epsilon:g}: L1 distance {distance:.6g}")
    return distance
