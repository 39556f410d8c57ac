import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from brkpyapi.brk_core.brk_constants import SPLICE_TOL, TOL_CONTACT
from brkpyapi.brk_envelope.envelope_exception import EmptyIntervalException, EnvelopeException
from brkpyapi.brk_envelope.envelope_kind import EnvelopeKind


@dataclass(frozen=True, eq=False)
class SampledFunction:
    """
    Values of a function on a strictly increasing grid.

    :param grid: Abscissae tau_0 < ... < tau_m, m >= 1.
    :type grid: np.ndarray
    :param values: f(tau_j).
    :type values: np.ndarray
    """
    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid: np.ndarray = np.asarray(self.grid, dtype=float).reshape(-1)
        values: np.ndarray = np.asarray(self.values, dtype=float).reshape(-1)
        if grid.size < 2 or grid.size != values.size:
            raise EnvelopeException(f"need at least 2 nodes with matching values, got {grid.size}/{values.size}")
        if np.any(np.diff(grid) <= 0.0):
            raise EnvelopeException("grid must be strictly increasing")
        if not np.all(np.isfinite(values)):
            raise EnvelopeException("values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


@dataclass(frozen=True, eq=False)
class PiecewiseLinearEnvelope:
    """
    Envelope of a sampled function on a sub-interval of its grid.

    :param kind: Which envelope.
    :type kind: EnvelopeKind
    :param grid: Nodes of the sub-interval.
    :type grid: np.ndarray
    :param function_values: f on those nodes.
    :type function_values: np.ndarray
    :param values: Envelope values on those nodes.
    :type values: np.ndarray
    :param breakpoints: Node indices of the envelope vertices.
    :type breakpoints: np.ndarray
    :param contact: True where the envelope touches f within tol_contact.
    :type contact: np.ndarray
    :param slopes: Slope of every cell (derivative of the envelope).
    :type slopes: np.ndarray
    :param splice_index: Node where a monotone envelope leaves its frozen part.
    :type splice_index: Optional[int]
    """
    kind: EnvelopeKind
    grid: np.ndarray
    function_values: np.ndarray
    values: np.ndarray
    breakpoints: np.ndarray
    contact: np.ndarray
    slopes: np.ndarray
    splice_index: Optional[int] = None

    @property
    def detachment(self) -> np.ndarray:
        """
        |f - envelope| on every node.
        """
        return np.abs(self.function_values - self.values)

    def as_sampled(self) -> SampledFunction:
        return SampledFunction(grid=self.grid, values=self.values)


@dataclass(frozen=True, eq=False)
class StepFunction:
    """
    Right-continuous piecewise constant function: ``slopes[j]`` on [grid[j], grid[j+1]).
    """
    grid: np.ndarray
    slopes: np.ndarray

    def __call__(self, tau):
        idx = np.searchsorted(self.grid, tau, side="right") - 1
        idx = np.clip(idx, 0, self.slopes.size - 1)
        return self.slopes[idx]


def _interval_indices(f: SampledFunction, interval: Optional[Tuple[float, float]]) -> Tuple[int, int]:
    if interval is None:
        return 0, f.grid.size - 1
    a, b = float(interval[0]), float(interval[1])
    if a >= b:
        raise EmptyIntervalException(f"empty interval [{a}, {b}]")
    i0: int = int(np.searchsorted(f.grid, a))
    i1: int = int(np.searchsorted(f.grid, b))
    if i0 >= f.grid.size or i1 >= f.grid.size or f.grid[i0] != a or f.grid[i1] != b:
        raise EnvelopeException(f"interval endpoints [{a}, {b}] are not grid nodes")
    return i0, i1


def lower_hull(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Monotone-chain lower convex hull of points sorted by x.

    Collinear points are dropped; the orientation test carries a relative
    round-off allowance so that hulls of hulls are reproduced exactly.

    :return: Indices of the hull vertices, increasing.
    :rtype: np.ndarray
    """
    eps: float = 4.0 * np.finfo(float).eps
    hull: list = []
    for j in range(x.size):
        while len(hull) >= 2:
            o, a = hull[-2], hull[-1]
            lhs: float = (x[a] - x[o]) * (y[j] - y[o])
            rhs: float = (y[a] - y[o]) * (x[j] - x[o])
            if lhs - rhs <= eps * (abs(lhs) + abs(rhs)):
                hull.pop()
            else:
                break
        hull.append(j)
    return np.asarray(hull, dtype=int)


def _contact(values: np.ndarray, env: np.ndarray, breakpoints: np.ndarray, tol_contact: float) -> np.ndarray:
    contact: np.ndarray = np.abs(values - env) <= tol_contact
    contact[breakpoints] = True
    return contact


def convex_envelope(f: SampledFunction, interval: Optional[Tuple[float, float]] = None,
                    tol_contact: float = TOL_CONTACT) -> PiecewiseLinearEnvelope:
    """
    Largest convex minorant of the piecewise linear interpolant of f on [a, b].

    :param f: Sampled function.
    :type f: SampledFunction
    :param interval: Sub-interval with grid-node endpoints, the whole grid when None.
    :type interval: Optional[Tuple[float, float]]
    :param tol_contact: Contact tolerance.
    :type tol_contact: float
    :raises EmptyIntervalException: If a >= b.
    :return: The envelope.
    :rtype: PiecewiseLinearEnvelope
    """
    i0, i1 = _interval_indices(f, interval)
    x: np.ndarray = f.grid[i0:i1 + 1]
    y: np.ndarray = f.values[i0:i1 + 1]
    breakpoints: np.ndarray = lower_hull(x, y)
    env: np.ndarray = np.interp(x, x[breakpoints], y[breakpoints])
    env[breakpoints] = y[breakpoints]
    return PiecewiseLinearEnvelope(
        kind=EnvelopeKind.CONVEX,
        grid=x,
        function_values=y,
        values=env,
        breakpoints=breakpoints,
        contact=_contact(y, env, breakpoints, tol_contact),
        slopes=np.diff(env) / np.diff(x),
    )


def concave_envelope(f: SampledFunction, interval: Optional[Tuple[float, float]] = None,
                     tol_contact: float = TOL_CONTACT) -> PiecewiseLinearEnvelope:
    """
    Smallest concave majorant, computed as -conv(-f).
    """
    mirror: PiecewiseLinearEnvelope = convex_envelope(SampledFunction(grid=f.grid, values=-f.values),
                                                      interval, tol_contact)
    return PiecewiseLinearEnvelope(
        kind=EnvelopeKind.CONCAVE,
        grid=mirror.grid,
        function_values=-mirror.function_values,
        values=-mirror.values,
        breakpoints=mirror.breakpoints,
        contact=mirror.contact,
        slopes=-mirror.slopes,
    )


def monotone_convex_envelope(f: SampledFunction, interval: Optional[Tuple[float, float]] = None,
                             tol_contact: float = TOL_CONTACT,
                             splice_tol: float = SPLICE_TOL) -> PiecewiseLinearEnvelope:
    """
    Largest convex nondecreasing minorant.

    Splice: with tau_0 the first node whose right cell has conv-slope
    >= -splice_tol (the right endpoint when there is none), the result is
    conv f(tau_0) for tau <= tau_0 and conv f beyond.
    """
    conv: PiecewiseLinearEnvelope = convex_envelope(f, interval, tol_contact)
    nonnegative: np.ndarray = conv.slopes >= -splice_tol
    j0: int = int(np.argmax(nonnegative)) if nonnegative.any() else conv.grid.size - 1

    env: np.ndarray = conv.values.copy()
    env[:j0] = conv.values[j0]
    slopes: np.ndarray = conv.slopes.copy()
    slopes[:j0] = 0.0
    slopes[j0:] = np.maximum(slopes[j0:], 0.0)
    breakpoints: np.ndarray = np.unique(np.concatenate(([0, j0], conv.breakpoints[conv.breakpoints >= j0])))
    contact: np.ndarray = np.abs(conv.function_values - env) <= tol_contact
    logging.debug(f"monotone convex envelope: splice at node {j0} of {conv.grid.size}")
    return PiecewiseLinearEnvelope(
        kind=EnvelopeKind.MONOTONE_CONVEX,
        grid=conv.grid,
        function_values=conv.function_values,
        values=env,
        breakpoints=breakpoints,
        contact=contact,
        slopes=slopes,
        splice_index=j0,
    )


def monotone_concave_envelope(f: SampledFunction, interval: Optional[Tuple[float, float]] = None,
                              tol_contact: float = TOL_CONTACT,
                              splice_tol: float = SPLICE_TOL) -> PiecewiseLinearEnvelope:
    """
    Concave envelope frozen after its first descending cell.

    With tau_1 the left node of the first cell whose conc-slope is below
    -splice_tol (the right endpoint when there is none), the result is
    conc f up to tau_1 and conc f(tau_1) beyond. Its slopes are >= 0.
    """
    conc: PiecewiseLinearEnvelope = concave_envelope(f, interval, tol_contact)
    descending: np.ndarray = conc.slopes < -splice_tol
    j1: int = int(np.argmax(descending)) if descending.any() else conc.grid.size - 1

    env: np.ndarray = conc.values.copy()
    env[j1 + 1:] = conc.values[j1]
    slopes: np.ndarray = conc.slopes.copy()
    slopes[j1:] = 0.0
    slopes[:j1] = np.maximum(slopes[:j1], 0.0)
    last: int = conc.grid.size - 1
    breakpoints: np.ndarray = np.unique(np.concatenate((conc.breakpoints[conc.breakpoints <= j1], [j1, last])))
    contact: np.ndarray = np.abs(conc.function_values - env) <= tol_contact
    logging.debug(f"monotone concave envelope: frozen from node {j1} of {conc.grid.size}")
    return PiecewiseLinearEnvelope(
        kind=EnvelopeKind.MONOTONE_CONCAVE,
        grid=conc.grid,
        function_values=conc.function_values,
        values=env,
        breakpoints=breakpoints,
        contact=contact,
        slopes=slopes,
        splice_index=j1,
    )


def envelope_derivative(env: PiecewiseLinearEnvelope, d: float = 1.0) -> StepFunction:
    """
    Right-continuous step function of cell slopes divided by d.

    :param env: Envelope.
    :type env: PiecewiseLinearEnvelope
    :param d: Speed normalization constant.
    :type d: float
    :return: sigma(tau).
    :rtype: StepFunction
    """
    return StepFunction(grid=env.grid, slopes=env.slopes / d)


def envelope_table(env: PiecewiseLinearEnvelope, d: float = 1.0) -> np.ndarray:
    """
    Columns (tau, f, envelope, sigma, contact) for CSV output.
    """
    sigma: np.ndarray = np.append(env.slopes, env.slopes[-1]) / d
    return np.column_stack((env.grid, env.function_values, env.values, sigma, env.contact.astype(float)))
