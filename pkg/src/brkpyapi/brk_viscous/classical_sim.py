import logging
import math
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_viscous.grid_solution import (EntropyBalance, GridSlice, GridSolution, SimulationConfig,
                                                l1_distance)
from brkpyapi.brk_viscous.solution_kind import SolutionKind
from brkpyapi.brk_viscous.viscous_exception import CFLViolationException, DomainEscapeException


ESCAPE_TOL: float = 1e-6
ESCAPE_NODES: int = 5
SPEED_SAMPLES: int = 11
LENGTH_FACTOR: float = 1.5


def _states(sys: HyperbolicSystem, u: np.ndarray, fn: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
    return np.array([fn(v) for v in u])


def speed_bound(sys: HyperbolicSystem, u0: np.ndarray, ud: np.ndarray) -> Tuple[float, float]:
    """
    Largest |lambda| and largest ||B|| on the segment between the data.

    :return: (lambda_max, norm of B).
    :rtype: Tuple[float, float]
    """
    samples: np.ndarray = np.linspace(0.0, 1.0, SPEED_SAMPLES)[:, None] * (u0 - ud)[None, :] + ud[None, :]
    lam: float = max(float(np.max(np.abs(np.linalg.eigvals(sys.DF(u))))) for u in samples)
    b: float = max(float(np.linalg.norm(sys.B(u), 2)) for u in samples)
    return lam, b


def domain_length(lam_max: float, final_time: float, epsilon: float, numerics: Numerics) -> float:
    return LENGTH_FACTOR * (lam_max + numerics.margin) * final_time + 10.0 * epsilon


def stable_dt(dx: float, lam_max: float, b_norm: float, viscosity: float, numerics: Numerics) -> float:
    """
    cfl * min(dx / lambda_max, dx^2 / (2 viscosity ||B||)).
    """
    convective: float = dx / lam_max if lam_max > 0.0 else math.inf
    diffusive: float = dx * dx / (2.0 * viscosity * b_norm) if viscosity * b_norm > 0.0 else math.inf
    bound: float = numerics.cfl * min(convective, diffusive)
    if not math.isfinite(bound):
        bound = numerics.cfl * dx
    return bound


def total_variation(values: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(values, axis=0))))


# region flux

def _absolute_matrices(jacobians: np.ndarray, entropy_fix: float) -> np.ndarray:
    """
    |A| = R |Lambda| R^-1 per interface, with Harten's smoothing of |lambda|
    below entropy_fix * max |lambda|.
    """
    lam, right = np.linalg.eig(jacobians)
    lam = lam.real
    right = right.real
    magnitude: np.ndarray = np.abs(lam)
    delta: np.ndarray = entropy_fix * np.max(magnitude, axis=1, keepdims=True)
    smooth: np.ndarray = (lam * lam + delta * delta) / (2.0 * np.maximum(delta, np.finfo(float).tiny))
    magnitude = np.where(magnitude < delta, smooth, magnitude)
    return right @ (magnitude[:, :, None] * np.linalg.inv(right))


def _numerical_flux(sys: HyperbolicSystem, u: np.ndarray, flux: np.ndarray, numerics: Numerics) -> np.ndarray:
    mid: np.ndarray = 0.5 * (u[1:] + u[:-1])
    dissipation: np.ndarray = _absolute_matrices(_states(sys, mid, sys.DF), numerics.entropy_fix)
    jump: np.ndarray = u[1:] - u[:-1]
    return 0.5 * (flux[1:] + flux[:-1]) - 0.5 * np.einsum("mij,mj->mi", dissipation, jump)


def _rate(sys: HyperbolicSystem, u: np.ndarray, dx: float, viscosity: float, numerics: Numerics) -> np.ndarray:
    flux: np.ndarray = _states(sys, u, sys.F)
    interface: np.ndarray = _numerical_flux(sys, u, flux, numerics)
    b_mid: np.ndarray = _states(sys, 0.5 * (u[1:] + u[:-1]), sys.B)
    diffusive: np.ndarray = np.einsum("mij,mj->mi", b_mid, u[1:] - u[:-1]) / dx
    total: np.ndarray = interface - viscosity * diffusive
    rate: np.ndarray = np.zeros_like(u)
    rate[1:-1] = -(total[1:] - total[:-1]) / dx
    return rate

# endregion


def _boundary_entropy_rate(sys: HyperbolicSystem, u: np.ndarray, dx: float, viscosity: float) -> float:
    """
    q(U(0)) - q(U(L)) plus the viscous entropy flux through both ends.
    """
    pair = sys.entropy
    left: float = float(pair.q(u[0])) - viscosity * float(pair.grad_eta(u[0]) @ sys.B(u[0]) @ (u[1] - u[0])) / dx
    right: float = float(pair.q(u[-1])) - viscosity * float(pair.grad_eta(u[-1]) @ sys.B(u[-1]) @ (u[-1] - u[-2])) / dx
    return left - right


def _entropy_integral(sys: HyperbolicSystem, u: np.ndarray, grid: np.ndarray) -> float:
    return float(trapezoid(np.array([sys.entropy.eta(v) for v in u]), grid))


@dataclass
class _MarchResult:
    grid: np.ndarray
    values: np.ndarray
    times: np.ndarray
    dt: float
    steps: int
    entropy: Optional[EntropyBalance]


def _march(sys: HyperbolicSystem, u0: np.ndarray, ud: np.ndarray, config: SimulationConfig, length: float,
           viscosity_at: Callable[[float], float], max_viscosity: float, numerics: Numerics,
           label: str) -> _MarchResult:
    """
    Heun's method on the semi-discrete upwind scheme with Dirichlet data at both ends.
    """
    lam_max, b_norm = speed_bound(sys, u0, ud)
    cells: int = max(4 * ESCAPE_NODES, int(math.ceil(length / config.dx)))
    dx: float = length / cells
    grid: np.ndarray = np.linspace(0.0, length, cells + 1)
    bound: float = stable_dt(dx, lam_max, b_norm, max_viscosity, numerics)
    if config.dt is not None and config.dt > bound:
        raise CFLViolationException(f"{label}: dt={config.dt:.6g} exceeds the stable bound {bound:.6g} "
                                    f"(dx={dx:.6g}, lambda_max={lam_max:.6g}, ||B||={b_norm:.6g})")
    requested: float = bound if config.dt is None else config.dt
    saves: int = max(2, config.saves)
    steps: int = max(1, int(math.ceil(config.final_time / requested - 1e-12)))
    steps = (saves - 1) * int(math.ceil(steps / (saves - 1)))
    dt: float = config.final_time / steps
    save_steps: List[int] = sorted(set(int(round(k)) for k in np.linspace(0, steps, saves)))
    logging.debug(f"{label}: {cells} cells, dx={dx:.4g}, dt={dt:.4g}, {steps} steps, L={length:.4g}")

    u: np.ndarray = np.repeat(u0[None, :], cells + 1, axis=0)
    u[0] = ud
    values: List[np.ndarray] = []
    times: List[float] = []
    track: bool = sys.entropy is not None
    balance: List[float] = []
    outflow: float = 0.0
    scale: float = max(1.0, float(np.max(np.abs(np.concatenate((u0, ud))))))

    def save(t: float):
        values.append(u.copy())
        times.append(t)
        if track:
            balance.append(_entropy_integral(sys, u, grid) - outflow)
        escape: float = float(np.max(np.abs(u[-ESCAPE_NODES - 1:-1] - u0)))
        if escape > ESCAPE_TOL * scale:
            raise DomainEscapeException(f"{label}: waves reached x=L={length:.6g} at t={t:.6g} "
                                        f"(deviation {escape:.3e}); increase the domain length")

    save(0.0)
    for step in range(1, steps + 1):
        t: float = (step - 1) * dt
        nu0: float = viscosity_at(t)
        nu1: float = viscosity_at(t + dt)
        k1: np.ndarray = _rate(sys, u, dx, nu0, numerics)
        predictor: np.ndarray = u + dt * k1
        k2: np.ndarray = _rate(sys, predictor, dx, nu1, numerics)
        if track:
            phi0: float = _boundary_entropy_rate(sys, u, dx, nu0)
        u = u + 0.5 * dt * (k1 + k2)
        if not np.all(np.isfinite(u)):
            raise CFLViolationException(f"{label}: non-finite values at step {step}, t={t + dt:.6g}")
        if track:
            outflow += 0.5 * dt * (phi0 + _boundary_entropy_rate(sys, u, dx, nu1))
        if step in save_steps:
            save(step * dt)

    entropy: Optional[EntropyBalance] = None
    if track:
        g: np.ndarray = np.array(balance)
        increase: float = float(max(0.0, np.max(np.diff(g)))) if g.size > 1 else 0.0
        eta_scale: float = max(1.0, abs(float(sys.entropy.eta(u0))), abs(float(sys.entropy.eta(ud))))
        entropy = EntropyBalance(times=np.array(times), values=g, max_increase=increase,
                                 tolerance=(dt + dx) * eta_scale * max(1.0, lam_max))
        if not entropy.dissipative:
            logging.warning(f"{label}: entropy balance increased by {increase:.3e} "
                            f"(tolerance {entropy.tolerance:.3e})")
    return _MarchResult(grid=grid, values=np.array(values), times=np.array(times), dt=dt, steps=steps,
                        entropy=entropy)


def _solution(kind: SolutionKind, epsilon: float, result: _MarchResult, config: SimulationConfig, length: float,
              u0: np.ndarray, ud: np.ndarray, numerics: Numerics, label: str) -> GridSolution:
    tv: np.ndarray = np.array([total_variation(v) for v in result.values])
    budget: float = numerics.tv_factor * float(np.linalg.norm(u0 - ud)) * config.tv_safety
    if np.any(tv > budget + numerics.tol_newton):
        logging.warning(f"{label}: total variation {float(np.max(tv)):.6g} above budget {budget:.6g}")
    record: dict = config.to_dict()
    record.update({"length": length, "dx": float(result.grid[1] - result.grid[0]), "dt": result.dt})
    diagnostics: dict = {"steps": result.steps, "tv_budget": budget, "tv_ok": bool(np.all(tv <= budget + 1e-12))}
    return GridSolution(kind=kind, epsilon=epsilon, grid=result.grid, values=result.values, times=result.times,
                        config=record, total_variation=tv, entropy=result.entropy, diagnostics=diagnostics)


def simulate_classical(sys: HyperbolicSystem, u0, ud, epsilon: float, config: SimulationConfig = SimulationConfig(),
                       numerics: Numerics = DEFAULT_NUMERICS) -> GridSolution:
    """
    Solves U_t + F(U)_x = epsilon (B(U) U_x)_x on [0, L] with U(t, 0) = U_D,
    U(t, L) = U_0 and U(0, x) = U_0.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Initial state U_0.
    :param ud: Boundary datum U_D.
    :param epsilon: Viscosity scale, positive.
    :type epsilon: float
    :param config: Grid, time step and saved slices.
    :type config: SimulationConfig
    :param numerics: cfl, margin and entropy_fix in particular.
    :type numerics: Numerics
    :raises ValueError: If epsilon is not positive.
    :raises CFLViolationException: If config.dt exceeds the stable bound or the solution blows up.
    :raises DomainEscapeException: If waves reach x = L before T.
    :return: Time-dependent solution.
    :rtype: GridSolution
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon={epsilon} must be > 0")
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(ud, sys.n)
    lam_max, _ = speed_bound(sys, state, boundary)
    length: float = config.length if config.length is not None else domain_length(
        lam_max, config.final_time, epsilon, numerics)
    label: str = f"classical {sys.name} eps={epsilon:g}"
    result: _MarchResult = _march(sys, state, boundary, config, length, lambda t: epsilon, epsilon, numerics, label)
    solution: GridSolution = _solution(SolutionKind.TIME_DEPENDENT, epsilon, result, config, length, state,
                                       boundary, numerics, label)
    logging.info(f"{label}: T={config.final_time:g} in {result.steps} steps on {result.grid.size} nodes")
    return solution


def march_selfsimilar(sys: HyperbolicSystem, u0, ud, epsilon: float, config: SimulationConfig = SimulationConfig(),
                      numerics: Numerics = DEFAULT_NUMERICS) -> GridSolution:
    """
    Time-marches U_t + F(U)_x = epsilon t (B(U) U_x)_x with the same scheme as
    simulate_classical. The solution is a function of x / t only.
    """
    if epsilon <= 0.0:
        raise ValueError(f"epsilon={epsilon} must be > 0")
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(ud, sys.n)
    lam_max, _ = speed_bound(sys, state, boundary)
    length: float = config.length if config.length is not None else domain_length(
        lam_max, config.final_time, epsilon * config.final_time, numerics)
    label: str = f"marched self-similar {sys.name} eps={epsilon:g}"
    result: _MarchResult = _march(sys, state, boundary, config, length, lambda t: epsilon * t,
                                  epsilon * config.final_time, numerics, label)
    return _solution(SolutionKind.TIME_DEPENDENT, epsilon, result, config, length, state, boundary, numerics, label)


@dataclass(frozen=True)
class SelfSimilarityCheck:
    """
    L1 distance in xi = x / t between the classical solution at T and at 2T.
    """
    distance: float
    window: Tuple[float, float]
    times: Tuple[float, float]
    reference: float

    def to_dict(self) -> dict:
        return {"distance": self.distance, "window": list(self.window), "times": list(self.times),
                "reference": self.reference}


def self_similarity_check(sys: HyperbolicSystem, u0, ud, epsilon: float,
                          config: SimulationConfig = SimulationConfig(),
                          numerics: Numerics = DEFAULT_NUMERICS) -> SelfSimilarityCheck:
    """
    Runs simulate_classical to 2T and compares the profiles at T and 2T as
    functions of xi on [0, lambda_max + margin]. The reference epsilon + dx is
    the size the distance is expected to scale with.
    """
    final_time: float = config.final_time
    doubled: SimulationConfig = replace(config, final_time=2.0 * final_time, saves=3,
                                        length=None if config.length is None else 2.0 * config.length)
    solution: GridSolution = simulate_classical(sys, u0, ud, epsilon, doubled, numerics)
    lam_max, _ = speed_bound(sys, as_state(u0, sys.n), as_state(ud, sys.n))
    window: Tuple[float, float] = (0.0, lam_max + numerics.margin)
    first: GridSlice = solution.similarity_slice(1)
    second: GridSlice = solution.similarity_slice(2)
    distance: float = l1_distance(first, second, window)
    logging.info(f"self-similarity of {sys.name} at T={final_time:g}, 2T: L1 distance {distance:.6g}")
    return SelfSimilarityCheck(distance=distance, window=window, times=(float(solution.times[1]),
                                                                        float(solution.times[2])),
                               reference=epsilon + config.dx)
