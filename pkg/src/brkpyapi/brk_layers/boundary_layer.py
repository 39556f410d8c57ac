import logging
import math
from dataclasses import dataclass
from typing import Callable, List, NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg
from scipy.integrate import solve_ivp

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_layers.layer_exception import BlowUpException, NoConnectionException
from brkpyapi.brk_layers.stable_subspace import (InvariantSubspace, SlowMode, layer_matrix, slow_mode,
                                                 stable_subspace)
from brkpyapi.brk_waves.wave_exception import LeftRegionException


EXPONENT_CAP: float = 600.0
FORWARD_HORIZON: float = 1e9
MAX_PROFILE_NODES: int = 200000

StateMap = Callable[[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class BoundaryLayerProfile:
    """
    Solution of B(W) W' = F(W) - F(equilibrium) on 0 = y_0 < ... < y_M.

    :param y: Fast variable grid.
    :type y: np.ndarray
    :param states: W at every node, shape (M + 1, n).
    :type states: np.ndarray
    :param equilibrium: Limit state as y -> infinity.
    :type equilibrium: np.ndarray
    :param boundary_value: Prescribed W(0).
    :type boundary_value: np.ndarray
    :param decay_rate: Exponential rate fitted on the tail half of the grid.
    :type decay_rate: float
    :param residual: Largest integrated residual per unit y over the cells.
    :type residual: float
    :param tail_distance: Distance of the last node to the equilibrium.
    :type tail_distance: float
    :param characteristic: The equilibrium has a near-zero layer eigenvalue.
    :type characteristic: bool
    """
    y: np.ndarray
    states: np.ndarray
    equilibrium: np.ndarray
    boundary_value: np.ndarray
    decay_rate: float
    residual: float
    tail_distance: float
    characteristic: bool = False

    @property
    def trivial(self) -> bool:
        return self.y.size == 1

    def satisfies(self, numerics: Numerics = DEFAULT_NUMERICS) -> Tuple[bool, bool]:
        """
        :return: Residual and tail invariants.
        :rtype: Tuple[bool, bool]
        """
        return self.residual <= numerics.tol_layer, self.tail_distance <= numerics.tol_tail

    def table(self) -> np.ndarray:
        return np.column_stack((self.y, self.states))

    def to_dict(self) -> dict:
        return {
            "y": self.y.tolist(),
            "states": self.states.tolist(),
            "equilibrium": self.equilibrium.tolist(),
            "boundary_value": self.boundary_value.tolist(),
            "decay_rate": self.decay_rate,
            "residual": self.residual,
            "tail_distance": self.tail_distance,
            "characteristic": self.characteristic,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryLayerProfile":
        states: np.ndarray = np.asarray(data["states"], dtype=float)
        return cls(y=np.asarray(data["y"], dtype=float), states=states.reshape(len(data["y"]), -1),
                   equilibrium=np.asarray(data["equilibrium"], dtype=float),
                   boundary_value=np.asarray(data["boundary_value"], dtype=float),
                   decay_rate=float(data["decay_rate"]), residual=float(data["residual"]),
                   tail_distance=float(data["tail_distance"]), characteristic=bool(data.get("characteristic", False)))


class DecayFit(NamedTuple):
    rate: float
    constant: float
    r_squared: float


def fit_decay(y: np.ndarray, norms: np.ndarray, floor: float) -> Optional[DecayFit]:
    """
    Least squares of log|.| against y over the tail half of the nodes above
    floor. The constant is the smallest C with norms <= C exp(-rate y).

    :return: Fit, or None with fewer than three usable nodes.
    :rtype: Optional[DecayFit]
    """
    valid: np.ndarray = norms > floor
    if np.count_nonzero(valid) < 3:
        return None
    y_valid: np.ndarray = y[valid]
    tail: np.ndarray = y_valid >= 0.5 * y_valid.max()
    if np.count_nonzero(tail) < 3:
        tail = np.ones(y_valid.size, dtype=bool)
    x: np.ndarray = y_valid[tail]
    logs: np.ndarray = np.log(norms[valid][tail])
    slope, intercept = np.polyfit(x, logs, 1)
    predicted: np.ndarray = intercept + slope * x
    total: float = float(np.sum((logs - logs.mean()) ** 2))
    r_squared: float = 1.0 if total == 0.0 else 1.0 - float(np.sum((logs - predicted) ** 2)) / total
    rate: float = -float(slope)
    constant: float = float(np.max(norms[valid] * np.exp(rate * y_valid)))
    return DecayFit(rate=rate, constant=constant, r_squared=r_squared)


def _field(sys: HyperbolicSystem, equilibrium_flux: np.ndarray, sign: float) -> Callable:
    return lambda t, w: sign * sys.layer_field(w, equilibrium_flux)


def _exit_event(sys: HyperbolicSystem) -> Callable:
    def leaves_region(t, w):
        return sys.region.distance_to_exit(w)
    leaves_region.terminal = True
    return leaves_region


def _arrival_event(equilibrium: np.ndarray, radius: float) -> Callable:
    def arrives(t, w):
        return float(np.linalg.norm(w - equilibrium)) - radius
    arrives.terminal = True
    arrives.direction = -1
    return arrives


def layer_residual(sys: HyperbolicSystem, equilibrium: np.ndarray, y: np.ndarray, states: np.ndarray) -> float:
    """
    Simpson residual of the integrated layer equation per unit y, with a
    Hermite midpoint state in every cell.
    """
    if y.size < 2:
        return 0.0
    eq_flux: np.ndarray = sys.F(equilibrium)
    g: np.ndarray = np.array([sys.layer_field(w, eq_flux) for w in states])
    h: np.ndarray = np.diff(y)[:, None]
    mid: np.ndarray = 0.5 * (states[:-1] + states[1:]) + h / 8.0 * (g[:-1] - g[1:])
    g_mid: np.ndarray = np.array([sys.layer_field(w, eq_flux) for w in mid])
    defect: np.ndarray = states[1:] - states[:-1] - h / 6.0 * (g[:-1] + 4.0 * g_mid + g[1:])
    return float(np.max(np.linalg.norm(defect, axis=1) / h[:, 0]))


def _sample_profile(sys: HyperbolicSystem, equilibrium: np.ndarray, boundary_value: np.ndarray,
                    state_at: StateMap, horizon: float, numerics: Numerics,
                    characteristic: bool = False) -> BoundaryLayerProfile:
    """
    Uniform nodes up to y_fast, geometric beyond, until the state is within
    tol_tail / 10 of the equilibrium or the horizon is reached.
    """
    target: float = numerics.tol_tail / 10.0
    y_nodes: List[float] = [0.0]
    states: List[np.ndarray] = [boundary_value.copy()]
    y: float = 0.0
    distance: float = float(np.linalg.norm(boundary_value - equilibrium))
    while distance > target and y < horizon:
        if len(y_nodes) > MAX_PROFILE_NODES:
            raise NoConnectionException(f"layer tail still {distance:.3e} from equilibrium at y={y:.6g}")
        step: float = numerics.layer_dy if y < numerics.y_fast else (numerics.y_growth - 1.0) * y
        y = min(y + step, horizon)
        w: np.ndarray = state_at(y)
        y_nodes.append(y)
        states.append(w)
        distance = float(np.linalg.norm(w - equilibrium))

    grid: np.ndarray = np.array(y_nodes)
    values: np.ndarray = np.array(states)
    norms: np.ndarray = np.linalg.norm(values - equilibrium, axis=1)
    fit: Optional[DecayFit] = fit_decay(grid, norms, 0.0)
    profile = BoundaryLayerProfile(
        y=grid, states=values, equilibrium=equilibrium.copy(), boundary_value=boundary_value.copy(),
        decay_rate=fit.rate if fit is not None else float("inf"),
        residual=layer_residual(sys, equilibrium, grid, values), tail_distance=distance,
        characteristic=characteristic,
    )
    if profile.tail_distance > numerics.tol_tail:
        raise NoConnectionException(f"layer ends {profile.tail_distance:.3e} away from equilibrium "
                                    f"{equilibrium.tolist()}")
    if profile.residual > numerics.tol_layer:
        logging.warning(f"layer residual {profile.residual:.3e} exceeds tol_layer={numerics.tol_layer:g}")
    logging.debug(f"layer to {equilibrium.tolist()}: {grid.size} nodes, y_end={grid[-1]:.6g}, "
                  f"rate={profile.decay_rate:.6g}, residual={profile.residual:.3e}")
    return profile


def _trivial_profile(equilibrium: np.ndarray, boundary_value: np.ndarray,
                     characteristic: bool = False) -> BoundaryLayerProfile:
    return BoundaryLayerProfile(y=np.zeros(1), states=boundary_value[None, :].copy(), equilibrium=equilibrium.copy(),
                                boundary_value=boundary_value.copy(), decay_rate=float("inf"), residual=0.0,
                                tail_distance=0.0, characteristic=characteristic)


# region stable manifold chart

def phi_horizon(subspace: InvariantSubspace, numerics: Numerics = DEFAULT_NUMERICS) -> float:
    """
    Backward integration time log(s_ref / eps_seed) / kappa for the slowest
    rate kappa, shortened so the fastest mode is seeded above underflow.
    """
    horizon: float = math.log(numerics.s_ref / numerics.eps_seed) / subspace.slowest_rate
    if subspace.fastest_rate * horizon > EXPONENT_CAP:
        horizon = EXPONENT_CAP / subspace.fastest_rate
        logging.debug(f"layer seed horizon capped at {horizon:.6g} by the fast rate {subspace.fastest_rate:.6g}")
    return horizon


class _ChartOrbit(NamedTuple):
    point: np.ndarray
    seed: np.ndarray
    amplitude: np.ndarray
    horizon: float
    solution: object


def _chart_orbit(sys: HyperbolicSystem, equilibrium: np.ndarray, subspace: InvariantSubspace,
                 coords: np.ndarray, numerics: Numerics) -> _ChartOrbit:
    horizon: float = phi_horizon(subspace, numerics)
    amplitude: np.ndarray = scipy.linalg.expm(subspace.generator * horizon) @ coords
    seed: np.ndarray = equilibrium + subspace.basis @ amplitude
    if not sys.region.contains(seed):
        raise LeftRegionException(f"layer seed {seed.tolist()} outside the region")
    sol = solve_ivp(_field(sys, sys.F(equilibrium), -1.0), (0.0, horizon), seed, method="DOP853",
                    rtol=numerics.ode_rtol, atol=numerics.ode_atol, dense_output=True,
                    events=[_exit_event(sys)])
    if sol.status == 1:
        raise LeftRegionException(f"backward layer orbit from coordinates {coords.tolist()} left the region "
                                  f"at parameter time {sol.t[-1]:.6g}")
    if not sol.success:
        raise LeftRegionException(f"backward layer orbit failed: {sol.message}")
    return _ChartOrbit(point=sol.y[:, -1].copy(), seed=seed, amplitude=amplitude, horizon=horizon, solution=sol)


def layer_map_phi(sys: HyperbolicSystem, u_bar, coords, numerics: Numerics = DEFAULT_NUMERICS,
                  subspace: Optional[InvariantSubspace] = None) -> np.ndarray:
    """
    Chart of the stable manifold of u_bar: W(0) of the orbit seeded at
    u_bar + V exp(Lambda Y) coords and integrated backward over the fixed time Y.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u_bar: Non-characteristic equilibrium.
    :param coords: Coordinates s_1..s_m in the basis of the subspace.
    :param numerics: Tolerances.
    :type numerics: Numerics
    :param subspace: Invariant subspace to parameterize, the stable subspace when None.
    :type subspace: Optional[InvariantSubspace]
    :raises LeftRegionException: If the orbit leaves the region.
    :return: Point of the manifold.
    :rtype: np.ndarray
    """
    equilibrium: np.ndarray = as_state(u_bar, sys.n)
    if subspace is None:
        subspace = stable_subspace(sys, equilibrium, numerics)
    c: np.ndarray = np.atleast_1d(np.asarray(coords, dtype=float))
    if c.size != subspace.dimension:
        raise ValueError(f"{c.size} coordinates for a {subspace.dimension}-dimensional subspace")
    if c.size == 0 or not np.any(c):
        return equilibrium.copy()
    return _chart_orbit(sys, equilibrium, subspace, c, numerics).point


def _chart_profile(sys: HyperbolicSystem, equilibrium: np.ndarray, boundary_value: np.ndarray,
                   subspace: InvariantSubspace, orbit: _ChartOrbit, numerics: Numerics,
                   characteristic: bool = False) -> BoundaryLayerProfile:
    horizon: float = orbit.horizon
    inner: Callable = orbit.solution.sol
    if subspace.dimension == sys.n:
        tail = solve_ivp(_field(sys, sys.F(equilibrium), 1.0), (horizon, horizon + FORWARD_HORIZON), orbit.seed,
                         method="LSODA", rtol=numerics.ode_rtol, atol=numerics.ode_atol, dense_output=True,
                         events=[_arrival_event(equilibrium, numerics.tol_tail / 20.0)])
        tail_end: float = float(tail.t[-1])

        def state_at(y: float) -> np.ndarray:
            return inner(horizon - y) if y <= horizon else tail.sol(min(y, tail_end))
        end: float = tail_end
    else:
        if subspace.fastest_rate * horizon >= EXPONENT_CAP:
            logging.warning(f"linear layer tail from a seed {np.linalg.norm(orbit.seed - equilibrium):.3e} "
                            f"away from equilibrium")

        def state_at(y: float) -> np.ndarray:
            if y <= horizon:
                return inner(horizon - y)
            return equilibrium + subspace.basis @ (scipy.linalg.expm(subspace.generator * (y - horizon))
                                                   @ orbit.amplitude)
        end = float("inf")
    return _sample_profile(sys, equilibrium, boundary_value, state_at, end, numerics, characteristic)


def _gauss_newton(residual: Callable[[np.ndarray], np.ndarray], x0: np.ndarray, tol: float,
                  numerics: Numerics) -> Tuple[np.ndarray, float]:
    x: np.ndarray = x0.copy()
    r: np.ndarray = residual(x)
    norm: float = float(np.linalg.norm(r))
    for iteration in range(numerics.shoot_max_iter):
        if norm <= tol:
            break
        jac: np.ndarray = np.empty((r.size, x.size))
        for j in range(x.size):
            h: float = numerics.fd_step * max(1.0, abs(x[j]))
            e: np.ndarray = np.zeros(x.size)
            e[j] = h
            try:
                jac[:, j] = (residual(x + e) - r) / h
            except LeftRegionException:
                jac[:, j] = (r - residual(x - e)) / h
        dx: np.ndarray = np.linalg.lstsq(jac, -r, rcond=None)[0]
        t: float = 1.0
        while t >= 1.0 / 64.0:
            try:
                r_new: np.ndarray = residual(x + t * dx)
            except LeftRegionException:
                t *= 0.5
                continue
            norm_new: float = float(np.linalg.norm(r_new))
            if norm_new < (1.0 - 1e-4 * t) * norm:
                x, r, norm = x + t * dx, r_new, norm_new
                break
            t *= 0.5
        else:
            logging.debug(f"shooting stalled at iteration {iteration} with residual {norm:.3e}")
            break
    return x, norm


def shoot_layer(sys: HyperbolicSystem, equilibrium, boundary_value,
                numerics: Numerics = DEFAULT_NUMERICS) -> BoundaryLayerProfile:
    """
    Solves B(W) W' = F(W) - F(equilibrium), W(0) = boundary_value, W -> equilibrium.

    Non-characteristic equilibria are handled by backward shooting in the
    stable-manifold chart with Gauss-Newton on the chart coordinates and
    seeded restarts. Equilibria with a layer eigenvalue below c_min in
    modulus go through the center routines.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param equilibrium: Limit state.
    :param boundary_value: W(0).
    :param numerics: Tolerances.
    :type numerics: Numerics
    :raises NoConnectionException: If boundary_value is off the stable manifold.
    :raises BlowUpException: If every attempted orbit leaves the region.
    :return: Profile.
    :rtype: BoundaryLayerProfile
    """
    eq: np.ndarray = as_state(equilibrium, sys.n)
    bv: np.ndarray = as_state(boundary_value, sys.n)
    scale: float = max(1.0, float(np.linalg.norm(bv)))
    if np.linalg.norm(bv - eq) <= numerics.tol_newton * scale:
        return _trivial_profile(eq, bv)
    if not (sys.region.contains(eq) and sys.region.contains(bv)):
        raise NoConnectionException(f"layer data {eq.tolist()} -> {bv.tolist()} outside the region")

    mode: SlowMode = slow_mode(sys, eq)
    if abs(mode.eigenvalue) <= numerics.c_min:
        return _shoot_center(sys, eq, bv, mode, numerics)

    subspace: InvariantSubspace = stable_subspace(sys, eq, numerics)
    if subspace.dimension == 0:
        raise NoConnectionException(f"equilibrium {eq.tolist()} has no stable layer directions")

    def residual(c: np.ndarray) -> np.ndarray:
        return layer_map_phi(sys, eq, c, numerics, subspace) - bv

    x0: np.ndarray = subspace.basis.T @ (bv - eq)
    tol: float = numerics.tol_newton * scale
    rng = np.random.default_rng(0)
    evaluated: bool = False
    best: Tuple[float, Optional[np.ndarray]] = (float("inf"), None)
    for attempt in range(numerics.shoot_restarts + 1):
        start: np.ndarray = x0 if attempt == 0 else x0 * (1.0 + 0.5 * rng.standard_normal()) + \
            0.1 * max(1.0, float(np.linalg.norm(x0))) * rng.standard_normal(x0.size)
        try:
            x, norm = _gauss_newton(residual, start, tol, numerics)
        except LeftRegionException as e:
            logging.debug(f"shooting attempt {attempt} left the region; Detail: {e}")
            continue
        evaluated = True
        if norm < best[0]:
            best = (norm, x)
        if norm <= tol:
            break
        logging.warning(f"shooting attempt {attempt} to {bv.tolist()} stalled at residual {norm:.3e}, restarting")
    if not evaluated:
        raise BlowUpException(f"every shooting orbit toward {bv.tolist()} left the region")
    if best[0] > tol:
        raise NoConnectionException(f"boundary value {bv.tolist()} is not on the stable manifold of {eq.tolist()} "
                                    f"(best residual {best[0]:.3e})")
    orbit: _ChartOrbit = _chart_orbit(sys, eq, subspace, best[1], numerics)
    return _chart_profile(sys, eq, bv, subspace, orbit, numerics)

# endregion


# region center equilibria

def center_counts(sys: HyperbolicSystem, equilibrium: np.ndarray, numerics: Numerics) -> Tuple[int, int]:
    """
    Stable and unstable layer directions at an equilibrium, the mode closest to zero left out.
    """
    w: np.ndarray = scipy.linalg.eigvals(layer_matrix(sys, equilibrium))
    others: np.ndarray = np.delete(w, int(np.argmin(np.abs(w.real))))
    return int(np.sum(others.real < -numerics.tol_eig)), int(np.sum(others.real > numerics.tol_eig))


def _reduced_solution(sys: HyperbolicSystem, equilibrium: np.ndarray, mode: SlowMode, w0: float, y0: float,
                      y1: float, numerics: Numerics, stop: Optional[float] = None):
    eq_flux: np.ndarray = sys.F(equilibrium)
    rhs = lambda t, w: [float(mode.left @ sys.layer_field(equilibrium + w[0] * mode.right, eq_flux))]
    events = []
    if stop is not None:
        def arrives(t, w):
            return abs(w[0]) - stop
        arrives.terminal = True
        events.append(arrives)
    return solve_ivp(rhs, (y0, y1), [w0], method="LSODA", rtol=numerics.ode_rtol, atol=numerics.ode_atol,
                     dense_output=True, events=events or None)


def reduced_center_flow(sys: HyperbolicSystem, equilibrium: np.ndarray, mode: SlowMode, w0: float, y0: float,
                        y_eval: np.ndarray, numerics: Numerics = DEFAULT_NUMERICS) -> np.ndarray:
    """
    Scalar flow w' = l . g(equilibrium + w r) along the slow eigenvector,
    started at w(y0) = w0 and sampled at y_eval (either side of y0).
    """
    values: np.ndarray = np.full(y_eval.size, float(w0))
    for mask in (y_eval < y0, y_eval > y0):
        if not mask.any():
            continue
        points: np.ndarray = y_eval[mask]
        end: float = float(points.min() if points[0] < y0 else points.max())
        values[mask] = _reduced_solution(sys, equilibrium, mode, w0, y0, end, numerics).sol(points)[0]
    return values


def center_orbit_point(sys: HyperbolicSystem, equilibrium, target: float, numerics: Numerics = DEFAULT_NUMERICS,
                       mode: Optional[SlowMode] = None) -> Tuple[np.ndarray, float]:
    """
    Point of the center orbit of a characteristic equilibrium whose slow
    coordinate l . (W - equilibrium) equals target, found by integrating
    backward from a seed eps_seed along the slow eigenvector.

    :raises NoConnectionException: If the orbit never reaches the target coordinate.
    :return: The point and the layer time from it to the seed.
    :rtype: Tuple[np.ndarray, float]
    """
    eq: np.ndarray = as_state(equilibrium, sys.n)
    mode = slow_mode(sys, eq) if mode is None else mode
    if target == 0.0:
        return eq.copy(), 0.0
    offset: float = math.copysign(min(numerics.eps_seed, 0.5 * abs(target)), target)
    seed: np.ndarray = eq + offset * mode.right

    def reached(t, w):
        return float(mode.left @ (w - eq)) - target
    reached.terminal = True

    sol = solve_ivp(_field(sys, sys.F(eq), -1.0), (0.0, FORWARD_HORIZON), seed, method="LSODA",
                    rtol=numerics.ode_rtol, atol=numerics.ode_atol, events=[reached, _exit_event(sys)])
    if sol.status != 1 or sol.t_events[0].size == 0:
        raise NoConnectionException(f"center orbit of {eq.tolist()} does not reach slow coordinate {target:.6g}")
    return sol.y_events[0][0].copy(), float(sol.t_events[0][0])


def _shoot_center(sys: HyperbolicSystem, eq: np.ndarray, bv: np.ndarray, mode: SlowMode,
                  numerics: Numerics) -> BoundaryLayerProfile:
    fast_stable, unstable = center_counts(sys, eq, numerics)
    if unstable == 0:
        sol = solve_ivp(_field(sys, sys.F(eq), 1.0), (0.0, FORWARD_HORIZON), bv, method="LSODA",
                        rtol=numerics.ode_rtol, atol=numerics.ode_atol, dense_output=True,
                        events=[_arrival_event(eq, numerics.tol_tail / 20.0), _exit_event(sys)])
        if sol.t_events[1].size:
            raise BlowUpException(f"forward layer orbit from {bv.tolist()} left the region")
        if sol.t_events[0].size == 0:
            raise NoConnectionException(f"forward layer orbit from {bv.tolist()} does not approach {eq.tolist()}")
        end: float = float(sol.t[-1])
        logging.debug(f"center layer to {eq.tolist()} by forward integration up to y={end:.6g}")
        return _sample_profile(sys, eq, bv, lambda y: sol.sol(min(y, end)), end, numerics, characteristic=True)

    if fast_stable > 0:
        raise NoConnectionException(f"center equilibrium {eq.tolist()} with {fast_stable} stable and {unstable} "
                                    f"unstable layer directions is not supported")
    target: float = float(mode.left @ (bv - eq))
    point, time_to_seed = center_orbit_point(sys, eq, target, numerics, mode)
    mismatch: float = float(np.linalg.norm(point - bv))
    if mismatch > math.sqrt(numerics.tol_newton) * max(1.0, float(np.linalg.norm(bv))):
        raise NoConnectionException(f"boundary value {bv.tolist()} is {mismatch:.3e} off the center orbit "
                                    f"of {eq.tolist()}")
    sol = solve_ivp(_field(sys, sys.F(eq), 1.0), (0.0, time_to_seed), bv, method="DOP853",
                    rtol=numerics.ode_rtol, atol=numerics.ode_atol, dense_output=True)
    w_seed: float = float(mode.left @ (sol.y[:, -1] - eq))
    tail = _reduced_solution(sys, eq, mode, w_seed, time_to_seed, time_to_seed + FORWARD_HORIZON, numerics,
                             stop=numerics.tol_tail / 20.0)
    tail_end: float = float(tail.t[-1])

    def state_at(y: float) -> np.ndarray:
        if y <= time_to_seed:
            return sol.sol(y)
        return eq + tail.sol(min(y, tail_end))[0] * mode.right
    return _sample_profile(sys, eq, bv, state_at, tail_end, numerics, characteristic=True)

# endregion
