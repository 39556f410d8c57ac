import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, List, NamedTuple, Optional, Sequence, Tuple, TypeVar

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, StateBox, as_state
from brkpyapi.brk_core.spectral import HypothesisReport, check_hypotheses
from brkpyapi.brk_layers.layer_exception import LayerException
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.riemann_exception import RiemannException
from brkpyapi.brk_riemann.wave_fan import WaveFan, evaluate
from brkpyapi.brk_viscous.classical_sim import simulate_classical, speed_bound
from brkpyapi.brk_viscous.grid_solution import GridSlice, GridSolution, SimulationConfig, l1_distance
from brkpyapi.brk_viscous.selfsimilar_sim import simulate_selfsimilar
from brkpyapi.brk_viscous.viscous_exception import ViscousException
from brkpyapi.brk_waves.wave_exception import WaveException


FAN_SAMPLES: int = 20001
ROW_ERRORS = (ViscousException, RiemannException, LayerException, WaveException)
CSV_HEADER: Tuple[str, ...] = ("epsilon", "d_UZ", "d_Ufan", "d_Zfan", "p_hat")

T = TypeVar("T")
R = TypeVar("R")


@dataclass
class ComparisonRow:
    """
    Distances at one epsilon. Missing values are NaN.

    :param d_uz: L1 distance of U^eps(T) and Z^eps(T) on the window.
    :param d_ufan: L1 distance of U^eps(T) and the boundary fan.
    :param d_zfan: L1 distance of Z^eps(T) and the boundary fan.
    :param order: Empirical order of d_uz against the previous row.
    """
    epsilon: float
    d_uz: float = math.nan
    d_ufan: float = math.nan
    d_zfan: float = math.nan
    order: float = math.nan
    failed: bool = False
    error: str = ""

    def values(self) -> List[float]:
        return [self.epsilon, self.d_uz, self.d_ufan, self.d_zfan, self.order]

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "d_UZ": self.d_uz, "d_Ufan": self.d_ufan, "d_Zfan": self.d_zfan,
                "p_hat": self.order, "failed": self.failed, "error": self.error}


@dataclass
class ComparisonTable:
    rows: List[ComparisonRow] = field(default_factory=list)
    window: Tuple[float, float] = (0.0, 1.0)
    final_time: float = 1.0
    fan: Optional[WaveFan] = None
    fan_error: str = ""

    @property
    def failed_rows(self) -> int:
        return sum(1 for row in self.rows if row.failed)

    @property
    def monotone(self) -> bool:
        """
        d_UZ is nonincreasing along the rows that did not fail.
        """
        distances: List[float] = [row.d_uz for row in self.rows if not row.failed]
        return all(b <= a for a, b in zip(distances[:-1], distances[1:]))

    def as_array(self) -> np.ndarray:
        return np.array([row.values() for row in self.rows], dtype=float).reshape(-1, len(CSV_HEADER))

    def to_dict(self) -> dict:
        return {"window": list(self.window), "final_time": self.final_time, "monotone": self.monotone,
                "failed_rows": self.failed_rows, "fan_error": self.fan_error,
                "rows": [row.to_dict() for row in self.rows]}


def fan_slice(fan: WaveFan, final_time: float, window: Tuple[float, float], samples: int = FAN_SAMPLES) -> GridSlice:
    """
    x -> V(x / T) of the fan sampled on the window.
    """
    x: np.ndarray = np.linspace(window[0], window[1], samples)
    return GridSlice(x, np.array([evaluate(fan, xi / final_time) for xi in x]))


def _order(previous: ComparisonRow, row: ComparisonRow) -> float:
    if previous.failed or row.failed or not (previous.d_uz > 0.0 and row.d_uz > 0.0):
        return math.nan
    return math.log(previous.d_uz / row.d_uz) / math.log(previous.epsilon / row.epsilon)


def rank_map(function: Callable[[T], R], items: Sequence[T], workers: int = 1) -> List[R]:
    """
    Maps function over items on a thread pool of the given size. Results
    come back in the order of items; workers=1 runs inline.
    """
    if workers <= 1 or len(items) <= 1:
        return [function(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(function, items))


def compare_limits(sys: HyperbolicSystem, u0, ud, epsilons: Sequence[float],
                   config: SimulationConfig = SimulationConfig(),
                   numerics: Numerics = DEFAULT_NUMERICS) -> ComparisonTable:
    """
    Compares the classical and the self-similar viscous solutions at time T
    with each other and with the boundary Riemann fan, for a decreasing list
    of epsilons, on the window [0, (lambda_max + margin) T].

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Initial state U_0.
    :param ud: Boundary datum U_D.
    :param epsilons: Strictly decreasing viscosity scales.
    :type epsilons: Sequence[float]
    :param config: Discretization shared by both simulations.
    :type config: SimulationConfig
    :param numerics: Tolerances.
    :type numerics: Numerics
    :raises ValueError: If epsilons is empty, not positive or not decreasing.
    :return: Table; a row whose solver failed is marked failed and the run continues.
    :rtype: ComparisonTable
    """
    eps: List[float] = [float(e) for e in epsilons]
    if not eps or any(e <= 0.0 for e in eps) or any(b >= a for a, b in zip(eps[:-1], eps[1:])):
        raise ValueError(f"epsilon list {eps} must be positive and strictly decreasing")
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(ud, sys.n)
    lam_max, _ = speed_bound(sys, state, boundary)
    final_time: float = config.final_time
    window: Tuple[float, float] = (0.0, (lam_max + numerics.margin) * final_time)
    table = ComparisonTable(window=window, final_time=final_time)

    reference: Optional[GridSlice] = None
    try:
        table.fan = solve_boundary_riemann(sys, state, boundary, numerics)
        reference = fan_slice(table.fan, final_time, window)
    except ROW_ERRORS as e:
        table.fan_error = f"{type(e).__name__}: {e}"
        logging.warning(f"compare limits: boundary fan unavailable, fan distances skipped; Detail: {e}")

    def measure(epsilon: float) -> ComparisonRow:
        row = ComparisonRow(epsilon=epsilon)
        try:
            classical: GridSlice = simulate_classical(sys, state, boundary, epsilon, config, numerics).final_slice()
            similar: GridSlice = simulate_selfsimilar(sys, state, boundary, epsilon, config, numerics).final_slice()
            row.d_uz = l1_distance(classical, similar, window)
            if reference is not None:
                row.d_ufan = l1_distance(classical, reference, window)
                row.d_zfan = l1_distance(similar, reference, window)
        except ROW_ERRORS as e:
            row.failed = True
            row.error = f"{type(e).__name__}: {e}"
            logging.warning(f"compare limits: eps={epsilon:g} failed; Detail: {e}")
        return row

    for row in rank_map(measure, eps, config.workers):
        if table.rows:
            row.order = _order(table.rows[-1], row)
        table.rows.append(row)
        logging.info(f"compare limits eps={row.epsilon:g}: d_UZ={row.d_uz:.6g} d_Ufan={row.d_ufan:.6g} "
                     f"d_Zfan={row.d_zfan:.6g} p_hat={row.order:.4g}")
    if not table.monotone:
        logging.warning(f"compare limits: d_UZ not monotone along {eps}")
    return table


@dataclass
class ViscosityDependence:
    """
    Self-similar traces just outside the boundary layer for two viscosity
    matrices, and their distance. fan_trace_1/2 are the traces of the
    inviscid boundary Riemann fans for the same viscosities, None when the
    solver failed.
    """
    trace_1: np.ndarray
    trace_2: np.ndarray
    gap: float
    xi: float
    dissipative: Tuple[bool, bool] = (True, True)
    fan_trace_1: Optional[np.ndarray] = None
    fan_trace_2: Optional[np.ndarray] = None

    @property
    def fan_gap(self) -> Optional[float]:
        if self.fan_trace_1 is None or self.fan_trace_2 is None:
            return None
        return float(np.linalg.norm(self.fan_trace_1 - self.fan_trace_2))

    def to_dict(self) -> dict:
        return {"trace_1": self.trace_1.tolist(), "trace_2": self.trace_2.tolist(), "gap": self.gap, "xi": self.xi,
                "dissipative": list(self.dissipative),
                "fan_trace_1": self.fan_trace_1.tolist() if self.fan_trace_1 is not None else None,
                "fan_trace_2": self.fan_trace_2.tolist() if self.fan_trace_2 is not None else None,
                "fan_gap": self.fan_gap}


class _Leg(NamedTuple):
    trace: np.ndarray
    dissipative: bool
    fan_trace: Optional[np.ndarray]


def _trace_at(solution: GridSolution, xi: float) -> np.ndarray:
    return np.array([np.interp(xi, solution.grid, solution.values[:, j]) for j in range(solution.values.shape[1])])


def viscosity_dependence_experiment(sys: HyperbolicSystem, u0, ud, b_1, b_2, epsilon: float,
                                    config: SimulationConfig = SimulationConfig(),
                                    numerics: Numerics = DEFAULT_NUMERICS) -> ViscosityDependence:
    """
    Solves the self-similar problem with viscosity B_1 and with B_2 and reads
    V^eps at xi = sqrt(epsilon) as the trace estimate of each. The inviscid
    boundary fan of each viscosity is solved too, so the gap can be read
    against the gap of the limits.

    :param b_1: First viscosity, a constant matrix or a matrix-valued map.
    :param b_2: Second viscosity.
    :return: Both traces, both fan traces and their Euclidean gaps.
    :rtype: ViscosityDependence
    """
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(ud, sys.n)
    box = StateBox(lower=np.minimum(state, boundary) - numerics.regime_radius,
                   upper=np.maximum(state, boundary) + numerics.regime_radius)
    xi: float = math.sqrt(epsilon)

    def leg(item: Tuple[str, Any]) -> _Leg:
        label, viscosity = item
        variant: HyperbolicSystem = sys.with_viscosity(viscosity)
        report: HypothesisReport = check_hypotheses(variant, numerics=numerics, region=box)
        if not report.dissipative:
            logging.warning(f"viscosity dependence: {label} fails the dissipativity check (alpha={report.alpha:.4g})")
        fan_trace: Optional[np.ndarray] = None
        try:
            fan_trace = solve_boundary_riemann(variant, state, boundary, numerics).trace
        except ROW_ERRORS as e:
            logging.warning(f"viscosity dependence: no boundary fan for {label}; Detail: {e}")
        trace: np.ndarray = _trace_at(simulate_selfsimilar(variant, state, boundary, epsilon, config, numerics), xi)
        return _Leg(trace=trace, dissipative=report.dissipative, fan_trace=fan_trace)

    first, second = rank_map(leg, [("B_1", b_1), ("B_2", b_2)], config.workers)
    gap: float = float(np.linalg.norm(first.trace - second.trace))
    logging.info(f"viscosity dependence of {sys.name} at eps={epsilon:g}: traces {first.trace.tolist()} and "
                 f"{second.trace.tolist()}, gap {gap:.6g}")
    return ViscosityDependence(trace_1=first.trace, trace_2=second.trace, gap=gap, xi=xi,
                               dissipative=(first.dissipative, second.dissipative),
                               fan_trace_1=first.fan_trace, fan_trace_2=second.fan_trace)
