import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_core.spectral import eigen_decompose
from brkpyapi.brk_waves.wave_exception import ContinuationStallException, OutOfRangeException


CORRECTOR_MAX_ITER: int = 20


@dataclass(frozen=True, eq=False)
class HugoniotLocus:
    """
    Samples (s, W(s), sigma(s)) of the i-Hugoniot locus through a right state.

    :param family: 1-based family.
    :type family: int
    :param reference: Right state U+.
    :type reference: np.ndarray
    :param s: Signed arclength, increasing, s = 0 at U+.
    :type s: np.ndarray
    :param states: W(s), one row per sample.
    :type states: np.ndarray
    :param speeds: Shock speeds sigma(s).
    :type speeds: np.ndarray
    """
    family: int
    reference: np.ndarray
    s: np.ndarray
    states: np.ndarray
    speeds: np.ndarray

    @property
    def extent(self) -> Tuple[float, float]:
        return float(self.s[0]), float(self.s[-1])

    def state_at(self, s: float) -> np.ndarray:
        return np.array([np.interp(s, self.s, self.states[:, j]) for j in range(self.states.shape[1])])

    def speed_at(self, s: float) -> float:
        return float(np.interp(s, self.s, self.speeds))

    def rh_residuals(self, sys: HyperbolicSystem) -> np.ndarray:
        f_ref: np.ndarray = sys.F(self.reference)
        return np.array([np.linalg.norm(sys.F(w) - f_ref - sig * (w - self.reference))
                         for w, sig in zip(self.states, self.speeds)])


class LiuVerdict(NamedTuple):
    admissible: bool
    worst_margin: float


def rh_speed(sys: HyperbolicSystem, left: np.ndarray, right: np.ndarray) -> float:
    """
    Least-squares jump speed (F(L) - F(R)).(L - R) / |L - R|^2.
    """
    jump: np.ndarray = left - right
    return float(np.dot(sys.F(left) - sys.F(right), jump) / np.dot(jump, jump))


def _corrector(sys: HyperbolicSystem, base: np.ndarray, f_base: np.ndarray, w_prev: np.ndarray,
               w_guess: np.ndarray, sigma_guess: float, h: float,
               numerics: Numerics) -> Optional[Tuple[np.ndarray, float]]:
    """
    Newton on the divided RH equations and the chord constraint |W - W_prev| = h.
    """
    n: int = sys.n
    w: np.ndarray = w_guess.copy()
    sigma: float = sigma_guess
    scale: float = max(1.0, float(np.max(np.abs(f_base))))
    for _ in range(CORRECTOR_MAX_ITER):
        d: np.ndarray = w - base
        rho: float = float(np.linalg.norm(d))
        if rho == 0.0:
            return None
        rh: np.ndarray = sys.F(w) - f_base - sigma * d
        chord: np.ndarray = w - w_prev
        g: np.ndarray = np.append(rh / rho, (np.dot(chord, chord) - h * h) / (2.0 * h))

        jac: np.ndarray = np.zeros((n + 1, n + 1))
        jac[:n, :n] = (sys.DF(w) - sigma * np.eye(n)) / rho - np.outer(rh, d) / rho ** 3
        jac[:n, n] = -d / rho
        jac[n, :n] = chord / h
        try:
            step: np.ndarray = np.linalg.solve(jac, -g)
        except np.linalg.LinAlgError:
            return None
        w = w + step[:n]
        sigma = sigma + float(step[n])
        if not np.all(np.isfinite(w)):
            return None
        small_step: bool = float(np.max(np.abs(step))) <= 1e-13 * max(1.0, float(np.max(np.abs(w))), abs(sigma))
        if float(np.max(np.abs(g))) <= numerics.tol_hugoniot or small_step:
            residual: float = float(np.linalg.norm(sys.F(w) - f_base - sigma * (w - base)))
            if residual <= 0.1 * numerics.tol_rh * scale:
                return w, sigma
    return None


def continue_branch(sys: HyperbolicSystem, base: np.ndarray, family: int, direction: int, s_max: float,
                    ds: float, numerics: Numerics = DEFAULT_NUMERICS,
                    stop_outside_region: bool = True) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Pseudo-arclength continuation of one branch of the Hugoniot locus.

    :param direction: +1 along r_i(base), -1 against it.
    :type direction: int
    :param s_max: Arclength to cover.
    :type s_max: float
    :param ds: Nominal step.
    :type ds: float
    :raises ContinuationStallException: If the step falls below ds_min.
    :return: Unsigned arclengths, states and speeds of the accepted samples.
    :rtype: Tuple[np.ndarray, np.ndarray, np.ndarray]
    """
    spectral = eigen_decompose(sys, base, numerics)
    tangent: np.ndarray = direction * spectral.r(family)
    f_base: np.ndarray = sys.F(base)
    arclengths: List[float] = [0.0]
    states: List[np.ndarray] = [base.copy()]
    speeds: List[float] = [spectral.lam(family)]

    dsigma: float = 0.0
    step: float = ds
    s: float = 0.0
    while s < s_max * (1.0 - 1e-12):
        h: float = min(step, s_max - s)
        w_prev: np.ndarray = states[-1]
        result = _corrector(sys, base, f_base, w_prev, w_prev + h * tangent, speeds[-1] + h * dsigma, h, numerics)
        if result is None:
            step /= 2.0
            logging.debug(f"hugoniot family {family}: corrector failed at s={s:.6g}, step halved to {step:.3e}")
            if step < numerics.ds_min:
                raise ContinuationStallException(
                    f"Hugoniot continuation of family {family} from {base.tolist()} stalled at s={s:.6g}")
            continue
        w, sigma = result
        if stop_outside_region and not sys.region.contains(w):
            logging.warning(f"hugoniot family {family}: locus left the region at s={s:.6g}")
            break
        tangent = (w - w_prev) / np.linalg.norm(w - w_prev)
        dsigma = (sigma - speeds[-1]) / h
        s += h
        arclengths.append(s)
        states.append(w)
        speeds.append(sigma)
        step = min(ds, 2.0 * step)
    return np.asarray(arclengths), np.asarray(states), np.asarray(speeds)


def hugoniot_locus(sys: HyperbolicSystem, u_plus, family: int, s_max: float, ds: Optional[float] = None,
                   numerics: Numerics = DEFAULT_NUMERICS) -> HugoniotLocus:
    """
    Continues the i-Hugoniot locus through U+ to both sides up to |s| = s_max.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param u_plus: Right state.
    :param family: 1-based family.
    :type family: int
    :param s_max: Extent on each side.
    :type s_max: float
    :param ds: Step, numerics.ds_hugoniot when None.
    :type ds: Optional[float]
    :raises ContinuationStallException: If the corrector fails after step halving.
    :return: The locus.
    :rtype: HugoniotLocus
    """
    base: np.ndarray = as_state(u_plus, sys.n)
    if not 1 <= family <= sys.n:
        raise ValueError(f"family {family} outside 1..{sys.n}")
    step: float = numerics.ds_hugoniot if ds is None else ds
    s_pos, w_pos, sig_pos = continue_branch(sys, base, family, +1, s_max, step, numerics)
    s_neg, w_neg, sig_neg = continue_branch(sys, base, family, -1, s_max, step, numerics)
    locus = HugoniotLocus(
        family=family,
        reference=base,
        s=np.concatenate((-s_neg[:0:-1], s_pos)),
        states=np.vstack((w_neg[:0:-1], w_pos)),
        speeds=np.concatenate((sig_neg[:0:-1], sig_pos)),
    )
    logging.debug(f"hugoniot family {family} through {base.tolist()}: {locus.s.size} samples on {locus.extent}")
    return locus


def liu_admissible(locus: HugoniotLocus, s_bar: float, tol_liu: float = DEFAULT_NUMERICS.tol_liu,
                   sigma_bar: Optional[float] = None) -> LiuVerdict:
    """
    Liu test of the jump from W(s_bar) on the left to U+ on the right:
    sigma(s) <= sigma(s_bar) + tol_liu for every sample strictly between 0 and s_bar.

    :param locus: Locus through the right state.
    :type locus: HugoniotLocus
    :param s_bar: Strength of the jump.
    :type s_bar: float
    :param tol_liu: Tolerance.
    :type tol_liu: float
    :param sigma_bar: Jump speed, interpolated from the locus when None.
    :type sigma_bar: Optional[float]
    :raises OutOfRangeException: If s_bar lies beyond the locus.
    :return: Verdict and min over s of sigma(s_bar) - sigma(s).
    :rtype: LiuVerdict
    """
    lo, hi = locus.extent
    if not lo - 1e-14 <= s_bar <= hi + 1e-14:
        raise OutOfRangeException(f"strength {s_bar} outside locus extent [{lo}, {hi}]")
    reference: float = locus.speed_at(s_bar) if sigma_bar is None else sigma_bar
    between: np.ndarray = (locus.s * np.sign(s_bar) > 0.0) & (np.abs(locus.s) < abs(s_bar) - 1e-14)
    if not between.any():
        return LiuVerdict(admissible=True, worst_margin=0.0)
    worst: float = float(np.min(reference - locus.speeds[between]))
    return LiuVerdict(admissible=worst >= -tol_liu, worst_margin=worst)


def shock_liu_margin(sys: HyperbolicSystem, left: np.ndarray, right: np.ndarray, family: int, speed: float,
                     numerics: Numerics = DEFAULT_NUMERICS) -> LiuVerdict:
    """
    Liu test of a computed jump by continuing the locus from its right state
    toward its left state.

    A left state that is not on the locus gives an inadmissible verdict
    whose margin is minus the distance to the locus.
    """
    jump: float = float(np.linalg.norm(left - right))
    if jump == 0.0:
        return LiuVerdict(admissible=True, worst_margin=0.0)
    r: np.ndarray = eigen_decompose(sys, right, numerics).r(family)
    direction: int = 1 if float(np.dot(r, left - right)) >= 0.0 else -1
    ds: float = max(jump / 200.0, 1e-7)
    s, states, speeds = continue_branch(sys, right, family, direction, 2.0 * jump + 2.0 * ds, ds, numerics,
                                        stop_outside_region=False)
    distances: np.ndarray = np.linalg.norm(states - left, axis=1)
    nearest: int = int(np.argmin(distances))
    if distances[nearest] > max(1e-6, 1e-2 * jump):
        logging.debug(f"jump {left.tolist()} -> {right.tolist()} is off the family-{family} locus")
        return LiuVerdict(admissible=False, worst_margin=-float(distances[nearest]))
    interior: np.ndarray = speeds[1:nearest]
    if interior.size == 0:
        return LiuVerdict(admissible=True, worst_margin=0.0)
    worst: float = float(np.min(speed - interior))
    return LiuVerdict(admissible=worst >= -numerics.tol_liu, worst_margin=worst)


def hugoniot_piece(sys: HyperbolicSystem, anchor: np.ndarray, family: int, direction: int, count: int,
                   h: float, numerics: Numerics = DEFAULT_NUMERICS) -> Tuple[np.ndarray, np.ndarray]:
    """
    ``count`` consecutive locus states through ``anchor`` at chord spacing h.

    A failing chord is split into 2, 4, 8 or 16 sub-chords, so every
    returned state lies on the locus.

    :raises ContinuationStallException: If even the finest split fails.
    :return: States (count x n) and their shock speeds.
    :rtype: Tuple[np.ndarray, np.ndarray]
    """
    spectral = eigen_decompose(sys, anchor, numerics)
    f_anchor: np.ndarray = sys.F(anchor)
    tangent: np.ndarray = direction * spectral.r(family)
    w_prev: np.ndarray = anchor
    sigma_prev: float = spectral.lam(family)
    dsigma: float = 0.0
    states: np.ndarray = np.empty((count, sys.n))
    speeds: np.ndarray = np.empty(count)
    for j in range(count):
        for pieces in (1, 2, 4, 8, 16):
            sub: float = h / pieces
            w, sigma, tan, dsig = w_prev, sigma_prev, tangent, dsigma
            for _ in range(pieces):
                result = _corrector(sys, anchor, f_anchor, w, w + sub * tan, sigma + sub * dsig, sub, numerics)
                if result is None:
                    break
                w_new, sigma_new = result
                tan = (w_new - w) / np.linalg.norm(w_new - w)
                dsig = (sigma_new - sigma) / sub
                w, sigma = w_new, sigma_new
            else:
                break
            logging.debug(f"hugoniot piece family {family}: chord {j} split into {2 * pieces}")
        else:
            raise ContinuationStallException(
                f"Hugoniot piece of family {family} from {anchor.tolist()} stalled at chord {j}")
        states[j], speeds[j] = w, sigma
        w_prev, sigma_prev, tangent, dsigma = w, sigma, tan, dsig
    return states, speeds
