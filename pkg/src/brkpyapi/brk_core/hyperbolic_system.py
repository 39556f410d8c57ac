import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence, Union

import numpy as np

from brkpyapi.brk_core.brk_constants import H_FD
from brkpyapi.brk_core.system_exception import SystemException


StateLike = Union[float, Sequence[float], np.ndarray]
FluxMap = Callable[[np.ndarray], np.ndarray]
MatrixMap = Callable[[np.ndarray], np.ndarray]

MAX_DIMENSION: int = 4


def as_state(u: StateLike, n: Optional[int] = None) -> np.ndarray:
    """
    Converts a scalar or sequence to a 1-D float state vector.

    :param u: State given as a scalar, sequence or array.
    :type u: StateLike
    :param n: Expected dimension, checked when given.
    :type n: Optional[int]
    :raises ValueError: If the dimension does not match.
    :return: State vector.
    :rtype: np.ndarray
    """
    state: np.ndarray = np.atleast_1d(np.asarray(u, dtype=float)).reshape(-1)
    if n is not None and state.size != n:
        raise ValueError(f"state {state.tolist()} has dimension {state.size}, expected {n}")
    return state


@dataclass(frozen=True, eq=False)
class StateBox:
    """
    Axis-aligned box in state space.

    :param lower: Lower corner.
    :type lower: np.ndarray
    :param upper: Upper corner.
    :type upper: np.ndarray
    """
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower: np.ndarray = as_state(self.lower)
        upper: np.ndarray = as_state(self.upper)
        if lower.shape != upper.shape or np.any(lower > upper):
            raise ValueError(f"invalid box lower={lower.tolist()} upper={upper.tolist()}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    @classmethod
    def around(cls, center: StateLike, radius: float) -> "StateBox":
        c: np.ndarray = as_state(center)
        return cls(lower=c - radius, upper=c + radius)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lower + self.upper)

    def contains(self, u: np.ndarray, slack: float = 0.0) -> bool:
        return bool(np.all(u >= self.lower - slack) and np.all(u <= self.upper + slack))

    def inside(self, other: "StateBox") -> bool:
        return bool(np.all(self.lower >= other.lower) and np.all(self.upper <= other.upper))

    def intersect(self, other: "StateBox") -> "StateBox":
        return StateBox(lower=np.maximum(self.lower, other.lower),
                        upper=np.minimum(self.upper, other.upper))

    def distance_to_exit(self, u: np.ndarray) -> float:
        """
        Signed distance to the box boundary, negative outside.
        """
        return float(np.min(np.concatenate((u - self.lower, self.upper - u))))

    def sample(self, plan: "SamplingPlan") -> np.ndarray:
        """
        Tensor grid plus seeded uniform random points.

        :param plan: Sampling plan.
        :type plan: SamplingPlan
        :return: Array of shape (count, n).
        :rtype: np.ndarray
        """
        axes = [np.linspace(lo, hi, plan.grid_per_axis) for lo, hi in zip(self.lower, self.upper)]
        mesh = np.meshgrid(*axes, indexing="ij")
        grid: np.ndarray = np.stack([m.reshape(-1) for m in mesh], axis=1)
        rng = np.random.default_rng(plan.seed)
        random_points: np.ndarray = self.lower + (self.upper - self.lower) * rng.random((plan.n_random, self.n))
        return np.vstack((grid, random_points))

    def to_dict(self) -> dict:
        return {"lower": self.lower.tolist(), "upper": self.upper.tolist()}


@dataclass(frozen=True)
class SamplingPlan:
    """
    Finite certification plan for the hypotheses: a tensor grid and random points.

    :param grid_per_axis: Grid nodes per state axis.
    :type grid_per_axis: int
    :param n_random: Number of uniform random points.
    :type n_random: int
    :param seed: Random generator seed.
    :type seed: int
    """
    grid_per_axis: int = 5
    n_random: int = 50
    seed: int = 0


@dataclass(frozen=True, eq=False)
class EntropyPair:
    """
    Entropy eta with entropy flux q, gradients and the Hessian of eta.
    """
    eta: Callable[[np.ndarray], float]
    q: Callable[[np.ndarray], float]
    grad_eta: Callable[[np.ndarray], np.ndarray]
    grad_q: Callable[[np.ndarray], np.ndarray]
    hess_eta: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class HyperbolicSystem:
    """
    A system of conservation laws U_t + F(U)_x = eps (B(U) U_x)_x.

    :param n: Dimension, 1 to 4.
    :type n: int
    :param flux: Flux F.
    :type flux: FluxMap
    :param viscosity: Viscosity matrix B, invertible on the region.
    :type viscosity: MatrixMap
    :param region: Box on which the hypotheses are asserted.
    :type region: StateBox
    :param jacobian: Analytic Jacobian DF, central differences of the flux when None.
    :type jacobian: Optional[MatrixMap]
    :param entropy: Optional entropy pair.
    :type entropy: Optional[EntropyPair]
    :param name: Model name.
    :type name: str
    :param h_fd: Finite-difference step for the Jacobian.
    :type h_fd: float
    """
    n: int
    flux: FluxMap
    viscosity: MatrixMap
    region: StateBox
    jacobian: Optional[MatrixMap] = None
    entropy: Optional[EntropyPair] = None
    name: str = "custom"
    h_fd: float = H_FD
    parameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIMENSION:
            raise SystemException(f"dimension {self.n} outside 1..{MAX_DIMENSION}")
        if self.region.n != self.n:
            raise SystemException(f"region dimension {self.region.n} does not match n={self.n}")

    def F(self, u: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.flux(u), dtype=float)).reshape(self.n)

    def DF(self, u: np.ndarray) -> np.ndarray:
        if self.jacobian is not None:
            return np.atleast_2d(np.asarray(self.jacobian(u), dtype=float)).reshape(self.n, self.n)
        return self.fd_jacobian(u)

    def B(self, u: np.ndarray) -> np.ndarray:
        return np.atleast_2d(np.asarray(self.viscosity(u), dtype=float)).reshape(self.n, self.n)

    def fd_jacobian(self, u: np.ndarray) -> np.ndarray:
        """
        Central finite differences of the flux with step h_fd scaled by |u_j|.
        """
        u = as_state(u, self.n)
        jac: np.ndarray = np.empty((self.n, self.n))
        for j in range(self.n):
            h: float = self.h_fd * max(1.0, abs(u[j]))
            e: np.ndarray = np.zeros(self.n)
            e[j] = h
            jac[:, j] = (self.F(u + e) - self.F(u - e)) / (2.0 * h)
        return jac

    def layer_field(self, w: np.ndarray, equilibrium_flux: np.ndarray) -> np.ndarray:
        """
        Right-hand side g(W) = B(W)^-1 (F(W) - F(equilibrium)) of the layer equation.
        """
        return np.linalg.solve(self.B(w), self.F(w) - equilibrium_flux)

    def with_viscosity(self, viscosity: Union[MatrixMap, np.ndarray]) -> "HyperbolicSystem":
        """
        Returns the same system with another viscosity matrix.

        :param viscosity: Constant matrix or matrix-valued map.
        :type viscosity: Union[MatrixMap, np.ndarray]
        :return: New system.
        :rtype: HyperbolicSystem
        """
        if callable(viscosity):
            return replace(self, viscosity=viscosity)
        matrix: np.ndarray = np.atleast_2d(np.asarray(viscosity, dtype=float))
        logging.debug(f"{self.name}: viscosity replaced by {matrix.tolist()}")
        return replace(self, viscosity=lambda u, m=matrix: m.copy())

    def with_region(self, region: StateBox) -> "HyperbolicSystem":
        return replace(self, region=region)
