from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid

from brkpyapi.brk_viscous.solution_kind import SolutionKind
from brkpyapi.brk_viscous.viscous_exception import WindowMismatchException


WINDOW_TOL: float = 1e-12


@dataclass(frozen=True)
class SimulationConfig:
    """
    Discretization of a viscous run.

    :param dx: Grid spacing in x for the classical problem.
    :type dx: float
    :param final_time: T.
    :type final_time: float
    :param length: Domain length L, chosen from the speeds when None.
    :type length: Optional[float]
    :param dt: Time step, the largest stable one when None.
    :type dt: Optional[float]
    :param saves: Number of saved time slices, both ends included.
    :type saves: int
    :param xi_nodes: Collocation nodes of the self-similar problem, chosen from epsilon when None.
    :type xi_nodes: Optional[int]
    :param time_marching: Cross-check the self-similar solution by time marching.
    :type time_marching: bool
    :param tv_safety: Factor on the total variation budget reported per slice.
    :type tv_safety: float
    :param workers: Threads used for independent runs of a sweep; 1 runs them in order.
    :type workers: int
    """
    dx: float = 0.01
    final_time: float = 1.0
    length: Optional[float] = None
    dt: Optional[float] = None
    saves: int = 11
    xi_nodes: Optional[int] = None
    time_marching: bool = False
    tv_safety: float = 2.0
    workers: int = 1

    def to_dict(self) -> dict:
        return asdict(self)


class GridSlice(NamedTuple):
    grid: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class EntropyBalance:
    """
    G(t) = int eta(U(t)) dx minus the time integral of the boundary entropy
    fluxes, at the saved times. G is non-increasing for an entropy solution.
    """
    times: np.ndarray
    values: np.ndarray
    max_increase: float
    tolerance: float

    @property
    def dissipative(self) -> bool:
        return self.max_increase <= self.tolerance

    def to_dict(self) -> dict:
        return {"times": self.times.tolist(), "values": self.values.tolist(), "max_increase": self.max_increase,
                "tolerance": self.tolerance, "dissipative": self.dissipative}


@dataclass(frozen=True, eq=False)
class GridSolution:
    """
    Result of a viscous simulation.

    TIME_DEPENDENT solutions hold U at the saved times on the x grid,
    values of shape (saves, nodes, n). SELF_SIMILAR solutions hold V on the
    xi grid, values of shape (nodes, n).
    """
    kind: SolutionKind
    epsilon: float
    grid: np.ndarray
    values: np.ndarray
    times: np.ndarray = field(default_factory=lambda: np.empty(0))
    config: dict = field(default_factory=dict)
    total_variation: np.ndarray = field(default_factory=lambda: np.empty(0))
    entropy: Optional[EntropyBalance] = None
    diagnostics: dict = field(default_factory=dict)

    @property
    def final_time(self) -> float:
        return float(self.times[-1]) if self.times.size else float(self.config.get("final_time", 1.0))

    def final_slice(self) -> GridSlice:
        """
        U(T, x) on the x grid; for a self-similar solution V(x / T) on x = T xi.
        """
        if self.kind is SolutionKind.TIME_DEPENDENT:
            return GridSlice(self.grid, self.values[-1])
        return GridSlice(self.grid * self.final_time, self.values)

    def similarity_slice(self, index: int = -1) -> GridSlice:
        """
        Profile in xi = x / t.
        """
        if self.kind is SolutionKind.SELF_SIMILAR:
            return GridSlice(self.grid, self.values)
        return GridSlice(self.grid / self.times[index], self.values[index])

    def table(self, index: int = -1) -> np.ndarray:
        """
        Columns (x, U components) of a saved slice, or (xi, V components).
        """
        values: np.ndarray = self.values[index] if self.kind is SolutionKind.TIME_DEPENDENT else self.values
        return np.column_stack((self.grid, values))


def _covers(grid: np.ndarray, window: Tuple[float, float]) -> bool:
    span: float = max(1.0, abs(window[1]))
    return grid[0] <= window[0] + WINDOW_TOL * span and grid[-1] >= window[1] - WINDOW_TOL * span


def _resample(part: GridSlice, nodes: np.ndarray) -> np.ndarray:
    values: np.ndarray = part.values.reshape(part.grid.size, -1)
    return np.column_stack([np.interp(nodes, part.grid, values[:, j]) for j in range(values.shape[1])])


def l1_distance(a: GridSlice, b: GridSlice, window: Tuple[float, float]) -> float:
    """
    Trapezoidal L1 norm of the difference, summed over components, after
    linear resampling onto the finer grid restricted to the window.

    :param a: First slice.
    :type a: GridSlice
    :param b: Second slice.
    :type b: GridSlice
    :param window: Interval [0, X].
    :type window: Tuple[float, float]
    :raises WindowMismatchException: If a slice does not cover the window.
    :return: Distance.
    :rtype: float
    """
    lo, hi = float(window[0]), float(window[1])
    for label, part in (("first", a), ("second", b)):
        if part.grid.size < 2 or not _covers(part.grid, (lo, hi)):
            raise WindowMismatchException(f"{label} slice [{part.grid[0]:.6g}, {part.grid[-1]:.6g}] "
                                          f"does not cover [{lo:.6g}, {hi:.6g}]")
    finer: np.ndarray = max((a.grid, b.grid), key=lambda g: np.count_nonzero((g > lo) & (g < hi)))
    inside: np.ndarray = finer[(finer > lo) & (finer < hi)]
    nodes: np.ndarray = np.concatenate(([lo], inside, [hi]))
    difference: np.ndarray = np.sum(np.abs(_resample(a, nodes) - _resample(b, nodes)), axis=1)
    return float(trapezoid(difference, nodes))
