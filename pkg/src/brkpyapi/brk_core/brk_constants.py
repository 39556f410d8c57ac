from dataclasses import dataclass, fields, replace
from typing import Any, Dict


GAP_MIN: float = 1e-6
TOL_EIG: float = 1e-10
TOL_ENTROPY: float = 1e-8
C_MIN: float = 1e-3
H_FD: float = 1e-6

TOL_CONTACT: float = 1e-12
SPLICE_TOL: float = 1e-12

TOL_RH: float = 1e-10
TOL_LIU: float = 1e-8
TOL_LD: float = 1e-6
TOL_FAN: float = 1e-6
TOL_FP: float = 1e-10
MAX_ITER: int = 500
DAMPING: float = 0.5
DAMPED_ITERATIONS: int = 5
NODES_PER_UNIT: int = 400
MIN_NODES: int = 16
D_SCALE: float = 1.0
DS_HUGONIOT: float = 1e-3
DS_MIN: float = 1e-9
TOL_HUGONIOT: float = 1e-13
RK4_STEP: float = 1e-3
ZERO_SPEED_TOL: float = 1e-8

EPS_SEED: float = 1e-4
S_REF: float = 1.0
TOL_LAYER: float = 1e-7
TOL_TAIL: float = 1e-6
FIT_SLACK: float = 0.2
SHOOT_RESTARTS: int = 8
SHOOT_MAX_ITER: int = 50
ODE_RTOL: float = 1e-11
ODE_ATOL: float = 1e-13
LAYER_DY: float = 0.05
Y_FAST: float = 40.0
Y_GROWTH: float = 1.05

TOL_NEWTON: float = 1e-10
NEWTON_MAX_ITER: int = 100
FD_STEP: float = 1e-6
DATA_MAX: float = 4.0
TV_FACTOR: float = 10.0
REGIME_RADIUS: float = 0.1

CFL: float = 0.4
MARGIN: float = 0.2
EPS_START: float = 0.5
CONTINUATION_REFINE: float = 1.3
ENTROPY_FIX: float = 0.05


@dataclass(frozen=True)
class Numerics:
    """
    Tolerances and discretization parameters shared by every solver.

    Instances are immutable; use :meth:`updated` to derive a modified copy.
    """

    # spectral analysis and hypotheses
    gap_min: float = GAP_MIN
    tol_eig: float = TOL_EIG
    tol_entropy: float = TOL_ENTROPY
    c_min: float = C_MIN
    h_fd: float = H_FD

    # envelopes
    tol_contact: float = TOL_CONTACT
    splice_tol: float = SPLICE_TOL

    # wave curves
    tol_rh: float = TOL_RH
    tol_liu: float = TOL_LIU
    tol_ld: float = TOL_LD
    tol_fan: float = TOL_FAN
    tol_fp: float = TOL_FP
    max_iter: int = MAX_ITER
    damping: float = DAMPING
    damped_iterations: int = DAMPED_ITERATIONS
    nodes_per_unit: int = NODES_PER_UNIT
    min_nodes: int = MIN_NODES
    d_scale: float = D_SCALE
    ds_hugoniot: float = DS_HUGONIOT
    ds_min: float = DS_MIN
    tol_hugoniot: float = TOL_HUGONIOT
    rk4_step: float = RK4_STEP
    zero_speed_tol: float = ZERO_SPEED_TOL

    # boundary layers
    eps_seed: float = EPS_SEED
    s_ref: float = S_REF
    tol_layer: float = TOL_LAYER
    tol_tail: float = TOL_TAIL
    fit_slack: float = FIT_SLACK
    shoot_restarts: int = SHOOT_RESTARTS
    shoot_max_iter: int = SHOOT_MAX_ITER
    ode_rtol: float = ODE_RTOL
    ode_atol: float = ODE_ATOL
    layer_dy: float = LAYER_DY
    y_fast: float = Y_FAST
    y_growth: float = Y_GROWTH

    # composed Newton solves
    tol_newton: float = TOL_NEWTON
    newton_max_iter: int = NEWTON_MAX_ITER
    fd_step: float = FD_STEP
    data_max: float = DATA_MAX
    tv_factor: float = TV_FACTOR
    regime_radius: float = REGIME_RADIUS

    # viscous simulations
    cfl: float = CFL
    margin: float = MARGIN
    eps_start: float = EPS_START
    continuation_refine: float = CONTINUATION_REFINE
    entropy_fix: float = ENTROPY_FIX

    def updated(self, **overrides: Any) -> "Numerics":
        """
        Returns a copy with the given fields replaced.

        :param overrides: Field names and their new values.
        :raises TypeError: If a field name is unknown.
        :return: The modified copy.
        :rtype: Numerics
        """
        return replace(self, **overrides)

    def as_dict(self) -> Dict[str, Any]:
        return {f.name: getattr(self, f.name) for f in fields(self)}

    @classmethod
    def field_names(cls) -> tuple:
        return tuple(f.name for f in fields(cls))


DEFAULT_NUMERICS: Numerics = Numerics()
