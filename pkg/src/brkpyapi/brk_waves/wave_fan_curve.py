import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_core.spectral import SpectralData, eigen_decompose
from brkpyapi.brk_envelope.envelope import (
    PiecewiseLinearEnvelope,
    SampledFunction,
    concave_envelope,
    convex_envelope,
    monotone_concave_envelope,
    monotone_convex_envelope,
)
from brkpyapi.brk_waves.hugoniot import hugoniot_piece, rh_speed
from brkpyapi.brk_waves.rarefaction import rk4_step
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_exception import FixedPointDivergedException, LeftRegionException
from brkpyapi.brk_waves.wave_extract import FAN, JUMP, Segment, extract_waves, segment_structure


SONIC_SUBSTEPS: int = 4


@dataclass(frozen=True, eq=False)
class WaveCurveResult:
    """
    Converged fixed point of a wave fan curve and the waves read off it.

    Arrays are in construction order: node 0 is the base (tau = 0) and node N
    is the far end (tau = s). The fan runs from node N (left) to node 0 (right).

    :param family: 1-based family.
    :type family: int
    :param base: U+ or U_k sharp.
    :type base: np.ndarray
    :param strength: s.
    :type strength: float
    :param endpoint: T_i(s, base).
    :type endpoint: np.ndarray
    :param tau: Curve parameter per node.
    :type tau: np.ndarray
    :param states: U(tau).
    :type states: np.ndarray
    :param flux: Generalized flux f(tau).
    :type flux: np.ndarray
    :param envelope: Envelope of f.
    :type envelope: np.ndarray
    :param detachment: v = |f - envelope| >= 0.
    :type detachment: np.ndarray
    :param speeds: sigma per cell, cell j between nodes j and j+1.
    :type speeds: np.ndarray
    :param waves: Waves with positive or arbitrary speed, in fan order.
    :type waves: tuple
    """
    family: int
    base: np.ndarray
    strength: float
    endpoint: np.ndarray
    tau: np.ndarray
    states: np.ndarray
    flux: np.ndarray
    envelope: np.ndarray
    detachment: np.ndarray
    speeds: np.ndarray
    waves: tuple
    iterations: int = 0
    contraction: np.ndarray = field(default_factory=lambda: np.empty(0))
    characteristic: bool = False
    s_bar: Optional[float] = None
    s_under: Optional[float] = None
    trace_state: Optional[np.ndarray] = None
    underline_state: Optional[np.ndarray] = None
    zero_speed_waves: tuple = ()
    ambiguous_plateau: bool = False

    @property
    def fan_speeds(self) -> np.ndarray:
        """
        Cell speeds in fan order, nondecreasing.
        """
        return self.speeds[::-1]

    def profile_table(self) -> np.ndarray:
        """
        Columns (tau, U..., f, envelope, v, sigma) for CSV output.
        """
        if self.tau.size < 2:
            sigma = np.zeros(self.tau.size)
        else:
            sigma = np.append(self.speeds, self.speeds[-1])
        return np.column_stack((self.tau, self.states, self.flux, self.envelope, self.detachment, sigma))


def default_nodes(s: float, numerics: Numerics = DEFAULT_NUMERICS) -> int:
    return max(numerics.min_nodes, math.ceil(numerics.nodes_per_unit * abs(s)))


def _spectra(sys: HyperbolicSystem, states: np.ndarray, family: int,
             numerics: Numerics) -> Tuple[np.ndarray, np.ndarray]:
    decompositions: List[SpectralData] = [eigen_decompose(sys, u, numerics) for u in states]
    lam: np.ndarray = np.array([d.lam(family) for d in decompositions])
    r: np.ndarray = np.array([d.r(family) for d in decompositions])
    return lam, r


def _generalized_flux(sys: HyperbolicSystem, states: np.ndarray, tau: np.ndarray, lam: np.ndarray,
                      segments: Optional[List[Segment]]) -> np.ndarray:
    """
    Trapezoidal integral of lambda_i on fan segments; on jump segments with
    anchor a, f(tau) = f(a) + sigma_RH(U(tau), U(a)) (tau - tau_a).
    """
    f: np.ndarray = np.zeros(tau.size)
    h: float = tau[1] - tau[0]
    if segments is None:
        f[1:] = np.cumsum(0.5 * h * (lam[1:] + lam[:-1]))
        return f
    for kind, a, b in segments:
        if kind == FAN:
            f[a + 1:b + 1] = f[a] + np.cumsum(0.5 * h * (lam[a + 1:b + 1] + lam[a:b]))
        else:
            for j in range(a + 1, b + 1):
                f[j] = f[a] + rh_speed(sys, states[j], states[a]) * (tau[j] - tau[a])
    return f


def _envelope(tau: np.ndarray, f: np.ndarray, s: float, monotone: bool,
              numerics: Numerics) -> PiecewiseLinearEnvelope:
    if s < 0.0:
        sampled = SampledFunction(grid=tau[::-1], values=f[::-1])
        builder = monotone_convex_envelope if monotone else convex_envelope
    else:
        sampled = SampledFunction(grid=tau, values=f)
        builder = monotone_concave_envelope if monotone else concave_envelope
    if monotone:
        return builder(sampled, tol_contact=numerics.tol_contact, splice_tol=numerics.splice_tol)
    return builder(sampled, tol_contact=numerics.tol_contact)


def _construction_order(values: np.ndarray, s: float) -> np.ndarray:
    return values[::-1].copy() if s < 0.0 else values.copy()


def _sweep(sys: HyperbolicSystem, base: np.ndarray, family: int, tau: np.ndarray, r: np.ndarray,
           segments: List[Segment], numerics: Numerics) -> np.ndarray:
    """
    One application of the fixed-point map: trapezoidal integral of r_i on
    fan segments, Hugoniot locus through the anchor on jump segments.
    """
    h: float = tau[1] - tau[0]
    direction: int = 1 if h > 0.0 else -1
    states: np.ndarray = np.empty((tau.size, sys.n))
    states[0] = base
    for kind, a, b in segments:
        if kind == FAN:
            increments: np.ndarray = 0.5 * h * (r[a:b] + r[a + 1:b + 1])
            states[a + 1:b + 1] = states[a] + np.cumsum(increments, axis=0)
        else:
            piece, _ = hugoniot_piece(sys, states[a], family, direction, b - a, abs(h), numerics)
            states[a + 1:b + 1] = piece
    return states


def _zero_split(slopes: np.ndarray, numerics: Numerics) -> int:
    """
    Construction index of s_bar: the base-side end of the zero-speed cells.
    """
    zero: np.ndarray = np.abs(slopes) <= numerics.zero_speed_tol
    if not zero.any():
        return slopes.size
    return int(np.argmax(zero))


def _sweep_segments(contact: np.ndarray, split: int, characteristic: bool) -> List[Segment]:
    if not characteristic:
        return segment_structure(contact)
    segments: List[Segment] = segment_structure(contact[:split + 1]) if split > 0 else []
    if split < contact.size - 1:
        segments.append((FAN, split, contact.size - 1))
    return segments


def _fixed_point(sys: HyperbolicSystem, base: np.ndarray, family: int, s: float, nodes: int,
                 characteristic: bool, numerics: Numerics):
    tau: np.ndarray = np.linspace(0.0, s, nodes + 1)
    r0: np.ndarray = eigen_decompose(sys, base, numerics).r(family)
    states: np.ndarray = base + np.outer(tau, r0)
    segments: Optional[List[Segment]] = None
    previous_change: Optional[float] = None
    ratios: List[float] = []

    for iteration in range(1, numerics.max_iter + 1):
        lam, r = _spectra(sys, states, family, numerics)
        f: np.ndarray = _generalized_flux(sys, states, tau, lam, segments)
        env: PiecewiseLinearEnvelope = _envelope(tau, f, s, characteristic, numerics)
        contact: np.ndarray = _construction_order(env.contact, s)
        slopes: np.ndarray = _construction_order(env.slopes, s) / numerics.d_scale
        split: int = _zero_split(slopes, numerics)
        new_segments: List[Segment] = _sweep_segments(contact, split, characteristic)

        swept: np.ndarray = _sweep(sys, base, family, tau, r, new_segments, numerics)
        if not all(sys.region.contains(u) for u in swept):
            raise LeftRegionException(
                f"wave curve of family {family} from {base.tolist()} with s={s:.6g} left the region")
        change: float = float(np.max(np.abs(swept - states)))
        if previous_change is not None and previous_change > 0.0:
            ratios.append(change / previous_change)
        previous_change = change
        omega: float = numerics.damping if iteration <= numerics.damped_iterations else 1.0
        logging.debug(f"wave curve family {family} s={s:.6g}: iteration {iteration}, change {change:.3e}, "
                      f"{len(new_segments)} segments")
        segments = new_segments
        if change <= numerics.tol_fp:
            return tau, swept, segments, split, iteration, np.asarray(ratios)
        states = states + omega * (swept - states)

    raise FixedPointDivergedException(
        f"wave curve of family {family} from {base.tolist()} with s={s:.6g} did not converge "
        f"in {numerics.max_iter} iterations (last change {previous_change:.3e})")


def _trivial(base: np.ndarray, family: int, s: float, characteristic: bool) -> WaveCurveResult:
    return WaveCurveResult(
        family=family, base=base, strength=s, endpoint=base.copy(), tau=np.zeros(1), states=base[None, :].copy(),
        flux=np.zeros(1), envelope=np.zeros(1), detachment=np.zeros(1), speeds=np.empty(0), waves=(),
        characteristic=characteristic, s_bar=0.0 if characteristic else None,
        s_under=0.0 if characteristic else None,
        trace_state=base.copy() if characteristic else None,
        underline_state=base.copy() if characteristic else None,
    )


def wave_fan_curve(sys: HyperbolicSystem, u_plus, family: int, s: float, nodes: Optional[int] = None,
                   numerics: Numerics = DEFAULT_NUMERICS) -> WaveCurveResult:
    """
    Wave fan curve T_i(s, U+) by damped Picard iteration on the envelope
    fixed point: convex envelope for s < 0, concave envelope for s > 0.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u_plus: Base (right) state.
    :param family: 1-based family.
    :type family: int
    :param s: Signed strength.
    :type s: float
    :param nodes: Grid cells, nodes_per_unit * |s| (at least min_nodes) when None.
    :type nodes: Optional[int]
    :param numerics: Tolerances.
    :type numerics: Numerics
    :raises FixedPointDivergedException: After max_iter iterations.
    :raises LeftRegionException: If the curve leaves the region.
    :return: Converged curve with its waves in fan order.
    :rtype: WaveCurveResult
    """
    base: np.ndarray = as_state(u_plus, sys.n)
    if not 1 <= family <= sys.n:
        raise ValueError(f"family {family} outside 1..{sys.n}")
    if s == 0.0:
        return _trivial(base, family, s, characteristic=False)
    cells: int = default_nodes(s, numerics) if nodes is None else nodes

    tau, states, segments, _, iterations, ratios = _fixed_point(sys, base, family, s, cells, False, numerics)
    lam, _ = _spectra(sys, states, family, numerics)
    f: np.ndarray = _generalized_flux(sys, states, tau, lam, segments)
    env: PiecewiseLinearEnvelope = _envelope(tau, f, s, False, numerics)
    waves: List[Wave] = extract_waves(sys, family, states, lam, segments, numerics)
    result = WaveCurveResult(
        family=family, base=base, strength=s, endpoint=states[-1].copy(), tau=tau, states=states, flux=f,
        envelope=_construction_order(env.values, s), detachment=_construction_order(env.detachment, s),
        speeds=_construction_order(env.slopes, s) / numerics.d_scale, waves=tuple(waves),
        iterations=iterations, contraction=ratios,
    )
    logging.debug(f"wave curve family {family} s={s:.6g}: {iterations} iterations, "
                  f"{[w.kind.name for w in waves]}")
    return result


def _sonic_point(sys: HyperbolicSystem, family: int, tau: np.ndarray, states: np.ndarray, lam: np.ndarray,
                 split: int, numerics: Numerics) -> Optional[Tuple[float, np.ndarray]]:
    """
    Root of lambda_k along the curve in a cell next to the split node.
    """
    for j in (split - 1, split):
        if j < 0 or j + 1 >= tau.size:
            continue
        if lam[j] * lam[j + 1] > 0.0 or (lam[j] == 0.0 and lam[j + 1] == 0.0):
            continue

        def state_at(t: float, j=j) -> np.ndarray:
            u: np.ndarray = states[j]
            h: float = (t - tau[j]) / SONIC_SUBSTEPS
            for _ in range(SONIC_SUBSTEPS):
                u = rk4_step(sys, u, family, h, numerics)
            return u

        speed: Callable[[float], float] = lambda t: eigen_decompose(sys, state_at(t), numerics).lam(family)
        if lam[j] == 0.0:
            return float(tau[j]), states[j].copy()
        if lam[j + 1] == 0.0:
            return float(tau[j + 1]), states[j + 1].copy()
        root: float = brentq(speed, tau[j], tau[j + 1], xtol=1e-15, rtol=4.0 * np.finfo(float).eps)
        return root, state_at(root)
    return None


def characteristic_wave_fan_curve(sys: HyperbolicSystem, u_sharp, family: int, s: float,
                                  nodes: Optional[int] = None,
                                  numerics: Numerics = DEFAULT_NUMERICS) -> WaveCurveResult:
    """
    Characteristic wave fan curve of the near-zero family k: the fixed point
    with the monotone convex (s < 0) or monotone concave (s > 0) envelope.

    Only the positive-speed part [s_bar, 0] goes into ``waves``. The
    zero-speed contacts and jumps between s_under and s_bar go into
    ``zero_speed_waves``; the part between s and s_under is left to the
    boundary layer.

    :raises FixedPointDivergedException: After max_iter iterations.
    :return: Converged curve with s_bar, s_under, trace and underline states.
    :rtype: WaveCurveResult
    """
    base: np.ndarray = as_state(u_sharp, sys.n)
    if s == 0.0:
        return _trivial(base, family, s, characteristic=True)
    cells: int = default_nodes(s, numerics) if nodes is None else nodes

    tau, states, segments, split, iterations, ratios = _fixed_point(sys, base, family, s, cells, True, numerics)
    lam, _ = _spectra(sys, states, family, numerics)
    f: np.ndarray = _generalized_flux(sys, states, tau, lam, segments)
    env: PiecewiseLinearEnvelope = _envelope(tau, f, s, True, numerics)
    slopes: np.ndarray = _construction_order(env.slopes, s) / numerics.d_scale
    detachment: np.ndarray = _construction_order(env.detachment, s)
    last: int = tau.size - 1

    detached: np.ndarray = np.flatnonzero(detachment[split:] > numerics.tol_contact) + split
    if detached.size == 0:
        under: int = last
        ambiguous: bool = False
    else:
        under = max(int(detached[0]) - 1, split)
        plateau: np.ndarray = detachment[int(detached[0]):int(detached[-1]) + 1]
        ambiguous = bool(np.any(plateau <= numerics.tol_contact))
        if ambiguous:
            logging.warning(f"characteristic curve family {family} s={s:.6g}: detachment vanishes inside the "
                            f"zero-speed plateau; s_under taken at the last detached node")

    s_bar: float = float(tau[split])
    s_under: float = float(tau[under])
    trace_state: np.ndarray = states[split].copy()
    underline_state: np.ndarray = states[under].copy()
    first_left: Optional[Tuple[np.ndarray, float]] = None
    positive_segments: List[Segment] = [seg for seg in segments if seg[2] <= split]
    if under == split and split > 0 and positive_segments and positive_segments[-1][0] == FAN:
        sonic = _sonic_point(sys, family, tau, states, lam, split, numerics)
        if sonic is not None:
            s_bar, trace_state = sonic
            s_under, underline_state = s_bar, trace_state.copy()
            first_left = (trace_state, 0.0)
            logging.debug(f"characteristic curve family {family}: sonic point refined to tau={s_bar:.15g}")

    waves: List[Wave] = extract_waves(sys, family, states, lam, positive_segments, numerics,
                                      speed_floor=0.0, first_left=first_left)
    zero_waves: List[Wave] = []
    if under > split:
        zero_segments: List[Segment] = [(kind, a + split, b + split) for kind, a, b in
                                        segment_structure(_construction_order(env.contact, s)[split:under + 1])]
        zero_waves = extract_waves(sys, family, states, lam, zero_segments, numerics)

    result = WaveCurveResult(
        family=family, base=base, strength=s, endpoint=states[-1].copy(), tau=tau, states=states, flux=f,
        envelope=_construction_order(env.values, s), detachment=detachment, speeds=slopes, waves=tuple(waves),
        iterations=iterations, contraction=ratios, characteristic=True, s_bar=s_bar, s_under=s_under,
        trace_state=trace_state, underline_state=underline_state, zero_speed_waves=tuple(zero_waves),
        ambiguous_plateau=ambiguous,
    )
    logging.debug(f"characteristic curve family {family} s={s:.6g}: s_bar={s_bar:.6g}, s_under={s_under:.6g}")
    return result
