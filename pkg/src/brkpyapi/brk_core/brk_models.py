import logging
from typing import Any, Callable, Dict, Mapping, Optional

import numpy as np
import scipy.linalg

from brkpyapi.brk_core.hyperbolic_system import EntropyPair, HyperbolicSystem, StateBox
from brkpyapi.brk_core.system_exception import SystemException


def _constant_viscosity(params: Mapping[str, Any], n: int) -> Callable[[np.ndarray], np.ndarray]:
    raw = params.get("viscosity", np.eye(n))
    matrix: np.ndarray = np.atleast_2d(np.asarray(raw, dtype=float))
    if matrix.shape != (n, n):
        raise SystemException(f"viscosity has shape {matrix.shape}, expected {(n, n)}")
    return lambda u: matrix.copy()


def _region(params: Mapping[str, Any], lower, upper) -> StateBox:
    region = params.get("region")
    if region is None:
        return StateBox(lower=np.asarray(lower, dtype=float), upper=np.asarray(upper, dtype=float))
    if isinstance(region, StateBox):
        return region
    return StateBox(lower=np.asarray(region["lower"], dtype=float), upper=np.asarray(region["upper"], dtype=float))


def _scalar_entropy(flux_prime: Callable[[float], float], q: Callable[[float], float]) -> EntropyPair:
    return EntropyPair(
        eta=lambda u: 0.5 * float(u[0]) ** 2,
        q=lambda u: q(float(u[0])),
        grad_eta=lambda u: np.array([float(u[0])]),
        grad_q=lambda u: np.array([float(u[0]) * flux_prime(float(u[0]))]),
        hess_eta=lambda u: np.ones((1, 1)),
    )


def burgers(params: Optional[Mapping[str, Any]] = None) -> HyperbolicSystem:
    """
    Inviscid Burgers flux F(u) = u^2/2 with entropy u^2/2 and flux u^3/3.
    """
    params = params or {}
    return HyperbolicSystem(
        n=1,
        flux=lambda u: np.array([0.5 * u[0] ** 2]),
        jacobian=lambda u: np.array([[u[0]]]),
        viscosity=_constant_viscosity(params, 1),
        region=_region(params, [-3.0], [3.0]),
        entropy=_scalar_entropy(lambda u: u, lambda u: u ** 3 / 3.0),
        name="burgers",
        parameters=dict(params),
    )


def cubic(params: Optional[Mapping[str, Any]] = None) -> HyperbolicSystem:
    """
    Non-convex scalar flux F(u) = u^3 with entropy u^2/2 and flux 3u^4/4.
    """
    params = params or {}
    return HyperbolicSystem(
        n=1,
        flux=lambda u: np.array([u[0] ** 3]),
        jacobian=lambda u: np.array([[3.0 * u[0] ** 2]]),
        viscosity=_constant_viscosity(params, 1),
        region=_region(params, [-3.0], [3.0]),
        entropy=_scalar_entropy(lambda u: 3.0 * u ** 2, lambda u: 0.75 * u ** 4),
        name="cubic",
        parameters=dict(params),
    )


def linear2(params: Optional[Mapping[str, Any]] = None) -> HyperbolicSystem:
    """
    Constant-coefficient 2x2 system F(U) = A U.

    The entropy is eta = U^T S U / 2 with S = L^T L built from the left
    eigenvectors of A, so that S A is symmetric.
    """
    params = params or {}
    a: np.ndarray = np.atleast_2d(np.asarray(params.get("a", [[-1.0, 0.0], [0.0, 1.0]]), dtype=float))
    if a.shape != (2, 2):
        raise SystemException(f"linear2 needs a 2x2 matrix, got shape {a.shape}")

    entropy: Optional[EntropyPair] = None
    w, vr = scipy.linalg.eig(a)
    if np.all(np.abs(w.imag) == 0.0) and abs(w.real[0] - w.real[1]) > 0.0:
        left: np.ndarray = scipy.linalg.inv(vr.real)
        s: np.ndarray = left.T @ left
        sa: np.ndarray = s @ a
        entropy = EntropyPair(
            eta=lambda u: 0.5 * float(u @ s @ u),
            q=lambda u: 0.5 * float(u @ sa @ u),
            grad_eta=lambda u: s @ u,
            grad_q=lambda u: sa @ u,
            hess_eta=lambda u: s.copy(),
        )
    else:
        logging.warning(f"linear2: matrix {a.tolist()} is not strictly hyperbolic, no entropy pair")

    return HyperbolicSystem(
        n=2,
        flux=lambda u: a @ u,
        jacobian=lambda u: a.copy(),
        viscosity=_constant_viscosity(params, 2),
        region=_region(params, [-10.0, -10.0], [10.0, 10.0]),
        entropy=entropy,
        name="linear2",
        parameters=dict(params),
    )


def p_system(params: Optional[Mapping[str, Any]] = None) -> HyperbolicSystem:
    """
    Isentropic gas dynamics in Lagrangian coordinates, U = (v, u):
    F(v, u) = (-u, p(v)) with p(v) = k_p v^-gamma, seen from a frame moving
    with speed ``drift`` so that F becomes F + drift U.

    Speeds are drift -/+ sqrt(-p'(v)). The entropy is u^2/2 + e(v) with
    e' = -p; in the moving frame the entropy flux is q + drift eta.
    """
    params = params or {}
    k_p: float = float(params.get("k_p", 1.0))
    gamma: float = float(params.get("gamma", 2.0))
    drift: float = float(params.get("drift", 0.0))
    if k_p <= 0.0 or gamma <= 0.0:
        raise SystemException(f"p-system needs k_p > 0 and gamma > 0, got k_p={k_p}, gamma={gamma}")

    def pressure(v: float) -> float:
        return k_p * v ** (-gamma)

    def pressure_prime(v: float) -> float:
        return -gamma * k_p * v ** (-gamma - 1.0)

    def internal_energy(v: float) -> float:
        if gamma == 1.0:
            return -k_p * np.log(v)
        return -k_p * (v ** (1.0 - gamma) - 1.0) / (1.0 - gamma)

    def eta(u: np.ndarray) -> float:
        return 0.5 * u[1] ** 2 + internal_energy(u[0])

    def grad_eta(u: np.ndarray) -> np.ndarray:
        return np.array([-pressure(u[0]), u[1]])

    def flux(u: np.ndarray) -> np.ndarray:
        return np.array([-u[1] + drift * u[0], pressure(u[0]) + drift * u[1]])

    def jacobian(u: np.ndarray) -> np.ndarray:
        return np.array([[drift, -1.0], [pressure_prime(u[0]), drift]])

    entropy = EntropyPair(
        eta=eta,
        q=lambda u: u[1] * pressure(u[0]) + drift * eta(u),
        grad_eta=grad_eta,
        grad_q=lambda u: np.array([u[1] * pressure_prime(u[0]), pressure(u[0])]) + drift * grad_eta(u),
        hess_eta=lambda u: np.array([[-pressure_prime(u[0]), 0.0], [0.0, 1.0]]),
    )

    return HyperbolicSystem(
        n=2,
        flux=flux,
        jacobian=jacobian,
        viscosity=_constant_viscosity(params, 2),
        region=_region(params, [0.3, -3.0], [3.0, 3.0]),
        entropy=entropy,
        name="p-system",
        parameters=dict(params),
    )


MODEL_REGISTRY: Dict[str, Callable[[Optional[Mapping[str, Any]]], HyperbolicSystem]] = {
    "burgers": burgers,
    "cubic": cubic,
    "linear2": linear2,
    "p-system": p_system,
}


def build_system(name: str, params: Optional[Mapping[str, Any]] = None) -> HyperbolicSystem:
    """
    Builds a bundled model by name.

    :param name: One of the keys of MODEL_REGISTRY.
    :type name: str
    :param params: Model parameters; ``viscosity`` and ``region`` are accepted by every model.
    :type params: Optional[Mapping[str, Any]]
    :raises SystemException: If the model is unknown or a parameter is invalid.
    :return: The system.
    :rtype: HyperbolicSystem
    """
    try:
        builder = MODEL_REGISTRY[name]
    except KeyError:
        raise SystemException(f"unknown model '{name}', expected one of {sorted(MODEL_REGISTRY)}")
    return builder(params)
