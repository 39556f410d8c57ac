import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.linalg

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, as_state
from brkpyapi.brk_layers.boundary_layer import BoundaryLayerProfile, DecayFit, fit_decay, reduced_center_flow
from brkpyapi.brk_layers.layer_exception import LayerException, PoorFitException
from brkpyapi.brk_layers.stable_subspace import SlowMode, layer_matrix


MIN_R_SQUARED: float = 0.9
PHASE_WINDOW: float = 20.0


@dataclass(frozen=True, eq=False)
class LayerDecomposition:
    """
    Split W = U_k + U_s + U_p of a layer profile.

    U_k follows the slow flow on the center direction, U_s is the linear
    stable flow of W(0) at U_sharp and U_p is the remainder.

    :param y: Fast variable grid of the profile.
    :type y: np.ndarray
    :param center: U_k per node.
    :type center: np.ndarray
    :param stable: U_s per node.
    :type stable: np.ndarray
    :param perturbation: U_p per node.
    :type perturbation: np.ndarray
    :param gap: Smallest decay rate of the fast stable modes.
    :type gap: float
    :param rate_s: Fitted decay rate of U_s, None when U_s vanishes.
    :type rate_s: Optional[float]
    :param rate_p: Fitted decay rate of U_p, None when U_p vanishes.
    :type rate_p: Optional[float]
    :param const_s: Envelope constant of U_s.
    :type const_s: Optional[float]
    :param const_p: Envelope constant of U_p.
    :type const_p: Optional[float]
    """
    y: np.ndarray
    center: np.ndarray
    stable: np.ndarray
    perturbation: np.ndarray
    gap: float
    rate_s: Optional[float] = None
    rate_p: Optional[float] = None
    const_s: Optional[float] = None
    const_p: Optional[float] = None
    fit_slack: float = DEFAULT_NUMERICS.fit_slack

    @property
    def fitted_rates(self) -> tuple:
        return self.rate_s, self.rate_p

    @property
    def fitted_consts(self) -> tuple:
        return self.const_s, self.const_p

    @property
    def rate_s_ok(self) -> bool:
        return self.rate_s is None or self.rate_s >= 0.5 * self.gap * (1.0 - self.fit_slack)

    @property
    def rate_p_ok(self) -> bool:
        return self.rate_p is None or self.rate_p >= 0.25 * self.gap * (1.0 - self.fit_slack)

    @property
    def bounds_hold(self) -> bool:
        return self.rate_s_ok and self.rate_p_ok

    def max_perturbation(self) -> float:
        return float(np.max(np.linalg.norm(self.perturbation, axis=1)))

    def norms_table(self, equilibrium: np.ndarray) -> np.ndarray:
        """
        Columns y, |U_k - equilibrium|, |U_s|, |U_p|.
        """
        return np.column_stack((self.y, np.linalg.norm(self.center - equilibrium, axis=1),
                                np.linalg.norm(self.stable, axis=1), np.linalg.norm(self.perturbation, axis=1)))

    def to_dict(self) -> dict:
        return {"rate_s": self.rate_s, "rate_p": self.rate_p, "const_s": self.const_s, "const_p": self.const_p,
                "gap": self.gap, "bounds_hold": self.bounds_hold, "max_perturbation": self.max_perturbation()}


def _checked_fit(y: np.ndarray, values: np.ndarray, floor: float, label: str) -> Optional[DecayFit]:
    fit: Optional[DecayFit] = fit_decay(y, np.linalg.norm(values, axis=1), floor)
    if fit is None:
        logging.debug(f"{label} below {floor:.3e}, no decay fit")
        return None
    if fit.r_squared < MIN_R_SQUARED:
        raise PoorFitException(f"decay fit of {label} has R^2={fit.r_squared:.4f} < {MIN_R_SQUARED}")
    return fit


def decompose_layer(sys: HyperbolicSystem, profile: BoundaryLayerProfile, u_sharp, k: int,
                    numerics: Numerics = DEFAULT_NUMERICS) -> LayerDecomposition:
    """
    Splits a layer into its slow center part, its fast stable part and the
    remaining perturbation, then fits the decay of the last two.

    The eigenvalues of B^-1 DF(U_sharp) are sorted by real part and the k-th
    one is the center mode. U_k is the scalar slow flow along its
    eigenvector, phase matched to W at y = min(y_end, 20 / gap). U_s is
    the linear flow of the stable projection of W(0) - equilibrium.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param profile: Valid layer profile.
    :type profile: BoundaryLayerProfile
    :param u_sharp: State defining the frozen spectral frame.
    :param k: 1-based center family.
    :type k: int
    :param numerics: Tolerances, fit_slack in particular.
    :type numerics: Numerics
    :raises PoorFitException: If a decay regression has R^2 below 0.9.
    :return: Decomposition with fitted rates and envelope constants.
    :rtype: LayerDecomposition
    """
    frame: np.ndarray = as_state(u_sharp, sys.n)
    if not 1 <= k <= sys.n:
        raise LayerException(f"family {k} outside 1..{sys.n}")
    w, x = scipy.linalg.eig(layer_matrix(sys, frame))
    order: np.ndarray = np.argsort(w.real, kind="stable")
    w, x = w[order].real, np.array(x[:, order].real, dtype=float)
    y_left: np.ndarray = np.linalg.inv(x)
    c_idx: int = k - 1
    mode = SlowMode(eigenvalue=float(w[c_idx]), right=x[:, c_idx], left=y_left[c_idx])
    stable_idx: List[int] = [i for i in range(sys.n) if i != c_idx and w[i] < -numerics.tol_eig]

    eq: np.ndarray = profile.equilibrium
    y: np.ndarray = profile.y
    offset: np.ndarray = profile.states - eq
    scale: float = max(float(np.linalg.norm(offset[0])), np.finfo(float).tiny)
    floor: float = numerics.tol_layer * scale

    gap: float = float(np.min(-w[stable_idx])) if stable_idx else float("inf")
    stable: np.ndarray = np.zeros_like(offset)
    if stable_idx:
        a0: np.ndarray = y_left[stable_idx] @ offset[0]
        stable = (x[:, stable_idx] @ (a0[:, None] * np.exp(np.outer(w[stable_idx], y)))).T

    y_ref: float = min(float(y[-1]), PHASE_WINDOW / gap) if stable_idx else 0.0
    j_ref: int = int(np.argmin(np.abs(y - y_ref)))
    w_ref: float = float(mode.left @ offset[j_ref])
    if abs(w_ref) <= floor:
        slow: np.ndarray = np.zeros(y.size)
    else:
        slow = reduced_center_flow(sys, eq, mode, w_ref, float(y[j_ref]), y, numerics)
    center: np.ndarray = eq + np.outer(slow, mode.right)
    perturbation: np.ndarray = profile.states - center - stable

    fit_s: Optional[DecayFit] = _checked_fit(y, stable, floor, "U_s")
    fit_p: Optional[DecayFit] = _checked_fit(y, perturbation, floor, "U_p")
    result = LayerDecomposition(
        y=y.copy(), center=center, stable=stable, perturbation=perturbation, gap=gap,
        rate_s=fit_s.rate if fit_s else None, rate_p=fit_p.rate if fit_p else None,
        const_s=fit_s.constant if fit_s else None, const_p=fit_p.constant if fit_p else None,
        fit_slack=numerics.fit_slack,
    )
    logging.info(f"layer decomposition k={k}: rates {result.fitted_rates}, gap {gap:.6g}, "
                 f"max|U_p|={result.max_perturbation():.3e}, bounds hold: {result.bounds_hold}")
    return result
