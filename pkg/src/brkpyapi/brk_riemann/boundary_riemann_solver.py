import logging
from typing import List, Optional, Sequence, Tuple

import numpy as np

from brkpyapi.brk_core.boundary_regime import BoundaryRegime
from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, SamplingPlan, StateBox, as_state
from brkpyapi.brk_core.spectral import SpectralData, classify_boundary, eigen_decompose
from brkpyapi.brk_layers.boundary_layer import (BoundaryLayerProfile, center_counts, center_orbit_point,
                                                layer_map_phi, shoot_layer)
from brkpyapi.brk_layers.layer_exception import LayerException, NoConnectionException
from brkpyapi.brk_layers.stable_subspace import (InvariantSubspace, SlowMode, layer_matrix, slow_mode,
                                                 stable_subspace)
from brkpyapi.brk_riemann.fan_kind import FanKind
from brkpyapi.brk_riemann.newton_solver import RECOVERABLE, NewtonResult, newton_solve
from brkpyapi.brk_riemann.riemann_exception import NewtonDivergedException
from brkpyapi.brk_riemann.riemann_solver import check_data_size, compose_curves, solve_nodes, waves_in_fan_order
from brkpyapi.brk_riemann.wave_fan import BoundaryGroup, WaveFan
from brkpyapi.brk_waves.wave_fan_curve import WaveCurveResult, characteristic_wave_fan_curve


def boundary_regime(sys: HyperbolicSystem, u0: np.ndarray, numerics: Numerics = DEFAULT_NUMERICS,
                    plan: SamplingPlan = SamplingPlan()) -> BoundaryRegime:
    """
    Regime of the boundary classified on the box U_0 +- regime_radius.
    """
    box: StateBox = StateBox.around(u0, numerics.regime_radius).intersect(sys.region)
    return classify_boundary(sys, box, plan, numerics)


def _trace_layer(sys: HyperbolicSystem, underline: np.ndarray, u_d: np.ndarray,
                 numerics: Numerics) -> BoundaryLayerProfile:
    try:
        return shoot_layer(sys, underline, u_d, numerics)
    except LayerException as e:
        raise NoConnectionException(f"boundary layer {underline.tolist()} -> {u_d.tolist()} failed; Detail: {e}")


def _diagnose(sys: HyperbolicSystem, error: NewtonDivergedException, trace_of, u0: np.ndarray, u_d: np.ndarray,
              numerics: Numerics) -> None:
    """
    Re-raises a Newton failure as NoConnection when the best trace found has no layer to U_D.
    """
    trace: np.ndarray = u0
    if error.best is not None:
        try:
            trace = trace_of(error.best)
        except RECOVERABLE as e:
            logging.debug(f"best iterate not evaluable; Detail: {e}")
    try:
        shoot_layer(sys, trace, u_d, numerics)
    except LayerException as e:
        raise NoConnectionException(f"boundary riemann {u0.tolist()} -> {u_d.tolist()} failed: no layer from "
                                    f"trace {trace.tolist()}; Detail: {e}")


# region non-characteristic boundary

def _noncharacteristic(sys: HyperbolicSystem, u0: np.ndarray, u_d: np.ndarray, regime: BoundaryRegime,
                       nodes: int, numerics: Numerics, initial_guess: Optional[Sequence[float]]) -> WaveFan:
    m: int = sys.n - regime.p
    families: List[int] = list(range(sys.n, m, -1))

    def outgoing(x: np.ndarray) -> Tuple[List[WaveCurveResult], np.ndarray]:
        curves: List[WaveCurveResult] = compose_curves(sys, u0, families, x[m:][::-1], nodes, numerics)
        return curves, curves[-1].endpoint if curves else u0

    def residual(x: np.ndarray) -> np.ndarray:
        _, trace = outgoing(x)
        if m == 0:
            return trace - u_d
        subspace: InvariantSubspace = stable_subspace(sys, trace, numerics)
        if subspace.dimension != m:
            raise NoConnectionException(f"stable dimension {subspace.dimension} at {trace.tolist()}, expected {m}")
        return layer_map_phi(sys, trace, x[:m], numerics, subspace) - u_d

    spectral: SpectralData = eigen_decompose(sys, u0, numerics)
    columns: List[np.ndarray] = [spectral.r(i) for i in range(m + 1, sys.n + 1)]
    if m > 0:
        columns = list(stable_subspace(sys, u0, numerics).basis.T) + columns
    linear: np.ndarray = np.linalg.lstsq(np.column_stack(columns), u_d - u0, rcond=None)[0]
    starts: List[np.ndarray] = [] if initial_guess is None else [np.asarray(initial_guess, dtype=float)]
    starts += [np.zeros(sys.n), linear]
    scale: float = max(1.0, float(np.max(np.abs(np.concatenate((u0, u_d))))))
    try:
        result: NewtonResult = newton_solve(residual, starts, numerics.tol_newton * scale, numerics,
                                            label="boundary riemann")
    except NewtonDivergedException as e:
        _diagnose(sys, e, lambda x: outgoing(x)[1], u0, u_d, numerics)
        raise NewtonDivergedException(f"boundary riemann {u0.tolist()} -> {u_d.tolist()} failed; Detail: {e}",
                                      best=e.best)

    curves, trace = outgoing(result.x)
    layer: BoundaryLayerProfile = _trace_layer(sys, trace, u_d, numerics)
    return WaveFan(kind=FanKind.BOUNDARY_RIEMANN, left_state=trace.copy(), right_state=u0.copy(),
                   waves=waves_in_fan_order(curves), strengths=result.x.copy(), boundary_state=u_d.copy(),
                   boundary_group=BoundaryGroup(underline_state=trace.copy(), layer=layer), regime=regime,
                   newton_residual=result.residual, newton_iterations=result.iterations)

# endregion


# region characteristic boundary

def characteristic_layer_point(sys: HyperbolicSystem, curve: WaveCurveResult, fast: np.ndarray,
                               numerics: Numerics = DEFAULT_NUMERICS) -> np.ndarray:
    """
    Boundary value reached from the characteristic curve: the part of the
    curve beyond s_under becomes the slow layer coordinate at the underline
    state, and fast holds the coordinates of the remaining stable modes.

    :param curve: Characteristic wave fan curve of the near-zero family.
    :type curve: WaveCurveResult
    :param fast: Coordinates along the fast stable modes at the underline state.
    :type fast: np.ndarray
    :raises NoConnectionException: If the layer directions do not match the unknowns.
    :return: W(0) of the layer.
    :rtype: np.ndarray
    """
    eq: np.ndarray = curve.underline_state
    mode: SlowMode = slow_mode(sys, eq)
    slow: float = float(mode.left @ (curve.endpoint - eq))
    scale: float = max(1.0, float(np.linalg.norm(eq)))

    if abs(mode.eigenvalue) > numerics.c_min:
        subspace: InvariantSubspace = stable_subspace(sys, eq, numerics, exclude_center=True)
        if subspace.dimension != fast.size:
            raise NoConnectionException(f"{subspace.dimension} fast stable modes at {eq.tolist()}, "
                                        f"expected {fast.size}")
        coords: np.ndarray = fast
        if mode.eigenvalue < 0.0:
            subspace = subspace.extended(mode.right, mode.eigenvalue, layer_matrix(sys, eq))
            coords = np.append(fast, slow)
        elif abs(slow) > numerics.tol_newton * scale:
            logging.debug(f"slow mode {mode.eigenvalue:.3e} unstable at {eq.tolist()}, slow coordinate dropped")
        return layer_map_phi(sys, eq, coords, numerics, subspace)

    if abs(slow) <= numerics.tol_newton * scale:
        if fast.size == 0:
            return eq.copy()
        return layer_map_phi(sys, eq, fast, numerics, stable_subspace(sys, eq, numerics, exclude_center=True))
    fast_stable, unstable = center_counts(sys, eq, numerics)
    if fast_stable != fast.size:
        raise NoConnectionException(f"{fast_stable} fast stable modes at {eq.tolist()}, expected {fast.size}")
    if unstable == 0:
        basis: np.ndarray = stable_subspace(sys, eq, numerics, exclude_center=True).basis
        return curve.endpoint + basis @ fast
    if fast_stable == 0:
        return center_orbit_point(sys, eq, slow, numerics, mode)[0]
    raise NoConnectionException(f"center equilibrium {eq.tolist()} with both stable and unstable layer "
                                f"directions is not supported")


def _characteristic(sys: HyperbolicSystem, u0: np.ndarray, u_d: np.ndarray, regime: BoundaryRegime,
                    nodes: int, numerics: Numerics, initial_guess: Optional[Sequence[float]]) -> WaveFan:
    k: int = regime.k
    families: List[int] = list(range(sys.n, k, -1))

    def build(x: np.ndarray) -> Tuple[List[WaveCurveResult], WaveCurveResult]:
        curves: List[WaveCurveResult] = compose_curves(sys, u0, families, x[k:][::-1], nodes, numerics)
        sharp: np.ndarray = curves[-1].endpoint if curves else u0
        return curves, characteristic_wave_fan_curve(sys, sharp, k, float(x[k - 1]), nodes=nodes, numerics=numerics)

    def residual(x: np.ndarray) -> np.ndarray:
        _, curve = build(x)
        return characteristic_layer_point(sys, curve, x[:k - 1], numerics) - u_d

    spectral: SpectralData = eigen_decompose(sys, u0, numerics)
    linear: np.ndarray = spectral.left @ (u_d - u0)
    starts: List[np.ndarray] = [] if initial_guess is None else [np.asarray(initial_guess, dtype=float)]
    starts += [np.zeros(sys.n), linear]
    scale: float = max(1.0, float(np.max(np.abs(np.concatenate((u0, u_d))))))
    try:
        result: NewtonResult = newton_solve(residual, starts, numerics.tol_newton * scale, numerics,
                                            label="characteristic boundary riemann")
    except NewtonDivergedException as e:
        _diagnose(sys, e, lambda x: build(x)[1].underline_state, u0, u_d, numerics)
        raise NewtonDivergedException(f"characteristic boundary riemann {u0.tolist()} -> {u_d.tolist()} failed; "
                                      f"Detail: {e}", best=e.best)

    curves, curve = build(result.x)
    underline: np.ndarray = curve.underline_state
    layer: BoundaryLayerProfile = _trace_layer(sys, underline, u_d, numerics)
    waves: tuple = tuple(curve.waves) + waves_in_fan_order(curves)
    flags: dict = {"ambiguous_plateau": curve.ambiguous_plateau, "s_bar": curve.s_bar, "s_under": curve.s_under}
    logging.info(f"characteristic boundary k={k}: s_bar={curve.s_bar:.6g}, s_under={curve.s_under:.6g}, "
                 f"{len(curve.zero_speed_waves)} zero-speed waves")
    return WaveFan(kind=FanKind.BOUNDARY_RIEMANN, left_state=curve.trace_state.copy() if not waves else
                   waves[0].left.copy(), right_state=u0.copy(), waves=waves, strengths=result.x.copy(),
                   boundary_state=u_d.copy(),
                   boundary_group=BoundaryGroup(underline_state=underline.copy(),
                                                zero_speed_waves=tuple(curve.zero_speed_waves), layer=layer),
                   regime=regime, newton_residual=result.residual, newton_iterations=result.iterations, flags=flags)

# endregion


def solve_boundary_riemann(sys: HyperbolicSystem, u0, u_d, numerics: Numerics = DEFAULT_NUMERICS,
                           initial_guess: Optional[Sequence[float]] = None,
                           regime: Optional[BoundaryRegime] = None) -> WaveFan:
    """
    Solves the boundary Riemann problem on x > 0 with U(0, x) = U_0 and the
    boundary datum U_D. The fan holds the waves of positive speed; its
    boundary group holds the layer from the underline state to U_D.

    Unknowns of the non-characteristic regime with p positive speeds are the
    n - p layer chart coordinates followed by s_{n-p+1}..s_n. In the
    characteristic regime of family k they are the k - 1 fast layer
    coordinates followed by s_k..s_n.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u0: Initial state.
    :param u_d: Boundary datum.
    :param numerics: Tolerances.
    :type numerics: Numerics
    :param initial_guess: Start tried first.
    :type initial_guess: Optional[Sequence[float]]
    :param regime: Regime to use instead of classifying it around U_0.
    :type regime: Optional[BoundaryRegime]
    :raises DataTooLargeException: If |U_0 - U_D| > data_max.
    :raises NewtonDivergedException: If Newton fails and the best trace still has a layer to U_D.
    :raises NoConnectionException: If U_D cannot be reached by a layer.
    :return: Boundary wave fan.
    :rtype: WaveFan
    """
    state: np.ndarray = as_state(u0, sys.n)
    boundary: np.ndarray = as_state(u_d, sys.n)
    jump: float = float(np.linalg.norm(state - boundary))
    check_data_size(jump, numerics)
    if regime is None:
        regime = boundary_regime(sys, state, numerics)
    if jump == 0.0:
        return WaveFan(kind=FanKind.BOUNDARY_RIEMANN, left_state=state.copy(), right_state=state.copy(),
                       strengths=np.zeros(sys.n), boundary_state=boundary.copy(), regime=regime)

    nodes: int = solve_nodes(jump, numerics)
    solver = _characteristic if regime.is_characteristic else _noncharacteristic
    fan: WaveFan = solver(sys, state, boundary, regime, nodes, numerics, initial_guess)
    logging.info(f"boundary riemann {sys.name}: regime {regime.kind.name}, trace {fan.trace.tolist()}, "
                 f"{[(w.kind.name, w.family) for w in fan.waves]}")
    return fan
