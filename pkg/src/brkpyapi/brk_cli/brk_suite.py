import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from brkpyapi.brk_cli.brk_artifacts import ArtifactWriter
from brkpyapi.brk_cli.run_config import RunConfig
from brkpyapi.brk_core.brk_constants import Numerics
from brkpyapi.brk_core.brk_models import build_system
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_core.spectral import SignatureCounts, eigen_signature_compare
from brkpyapi.brk_core.system_exception import NearSingularException, SystemException
from brkpyapi.brk_envelope.envelope import (PiecewiseLinearEnvelope, SampledFunction, concave_envelope,
                                            convex_envelope, monotone_convex_envelope)
from brkpyapi.brk_layers.boundary_layer import BoundaryLayerProfile, shoot_layer
from brkpyapi.brk_layers.layer_decomposition import LayerDecomposition, decompose_layer
from brkpyapi.brk_layers.layer_exception import LayerException
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.riemann_exception import RiemannException
from brkpyapi.brk_riemann.riemann_solver import solve_riemann
from brkpyapi.brk_riemann.validation import validate_solution
from brkpyapi.brk_riemann.wave_fan import WaveFan, evaluate
from brkpyapi.brk_viscous.limit_comparison import ComparisonTable, compare_limits, viscosity_dependence_experiment
from brkpyapi.brk_viscous.viscous_exception import ViscousException
from brkpyapi.brk_waves.hugoniot import HugoniotLocus, hugoniot_locus
from brkpyapi.brk_waves.rarefaction import rarefaction_curve
from brkpyapi.brk_waves.wave_exception import WaveException
from brkpyapi.brk_waves.wave_fan_curve import wave_fan_curve


SOLVER_ERRORS = (RiemannException, LayerException, WaveException, SystemException, ViscousException)
ENVELOPE_TOL: float = 1e-12
ORACLE_TOL: float = 1e-8
LAYER_TOL: float = 1e-6
UNIQUENESS_TOL: float = 1e-8
CONTACT_STRENGTHS: Tuple[float, ...] = (0.05, 0.1, 0.2, 0.4)
CONTACT_SLOPE: Tuple[float, float] = (2.6, 3.4)
MIXING_VISCOSITY: Tuple[Tuple[float, float], ...] = ((1.0, 0.0), (1.0, 1.0))
DEPENDENCE_GAP: float = 0.5
DEPENDENCE_TRACE_TOL: float = 0.1
DECAY_DELTAS: Tuple[float, ...] = (0.02, 0.04, 0.08)
DECAY_SLOPE: Tuple[float, float] = (1.7, 2.3)


@dataclass
class SuiteItem:
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


@dataclass
class SuiteReport:
    items: List[SuiteItem] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(item.passed for item in self.items)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "items": [item.to_dict() for item in self.items]}


# region envelopes

def brute_force_convex(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Convex envelope at the nodes as the minimum over all chords spanning each node.
    """
    hull: np.ndarray = y.copy()
    a, b = np.triu_indices(x.size, k=1)
    for j in range(x.size):
        spans: np.ndarray = (a <= j) & (b >= j)
        aj, bj = a[spans], b[spans]
        chords: np.ndarray = ((x[bj] - x[j]) * y[aj] + (x[j] - x[aj]) * y[bj]) / (x[bj] - x[aj])
        hull[j] = min(hull[j], float(np.min(chords, initial=np.inf)))
    return hull


def brute_force_monotone_convex(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """
    Largest convex nondecreasing minorant: convex envelope of the running minimum from the right.
    """
    return brute_force_convex(x, np.minimum.accumulate(y[::-1])[::-1])


def random_function(rng: np.random.Generator, max_nodes: int) -> SampledFunction:
    m: int = int(rng.integers(2, max_nodes + 1))
    grid: np.ndarray = np.cumsum(rng.uniform(0.1, 1.0, m))
    return SampledFunction(grid=grid - grid[0], values=rng.normal(size=m))


def _envelope_item(config: RunConfig, rng: np.random.Generator) -> SuiteItem:
    worst: float = 0.0
    for _ in range(config.suite.envelope_functions):
        f: SampledFunction = random_function(rng, config.suite.envelope_max_nodes)
        scale: float = max(1.0, float(np.max(np.abs(f.values))))
        checks: List[Tuple[PiecewiseLinearEnvelope, np.ndarray]] = [
            (convex_envelope(f), brute_force_convex(f.grid, f.values)),
            (concave_envelope(f), -brute_force_convex(f.grid, -f.values)),
            (monotone_convex_envelope(f), brute_force_monotone_convex(f.grid, f.values)),
        ]
        for env, oracle in checks:
            worst = max(worst, float(np.max(np.abs(env.values - oracle))) / scale)
    return SuiteItem(name="envelopes", passed=worst <= ENVELOPE_TOL,
                     detail={"functions": config.suite.envelope_functions, "worst_error": worst})

# endregion


# region closed forms

def _burgers_item(numerics: Numerics) -> SuiteItem:
    sys: HyperbolicSystem = build_system("burgers")
    shock: WaveFan = solve_riemann(sys, [1.0], [0.0], numerics)
    shock_error: float = abs(shock.waves[0].speed - 0.5) if len(shock.waves) == 1 else math.inf
    fan: WaveFan = solve_riemann(sys, [0.0], [1.0], numerics)
    xi: np.ndarray = np.linspace(0.05, 0.95, 19)
    fan_error: float = max(abs(float(evaluate(fan, x)[0]) - x) for x in xi)
    layer: BoundaryLayerProfile = shoot_layer(sys, [-1.0], [0.0], numerics)
    layer_error: float = float(np.max(np.abs(layer.states[:, 0] + np.tanh(layer.y / 2.0))))
    passed: bool = shock_error <= ORACLE_TOL and fan_error <= ORACLE_TOL and layer_error <= LAYER_TOL
    return SuiteItem(name="burgers_oracles", passed=passed,
                     detail={"shock_speed_error": shock_error, "rarefaction_error": fan_error,
                             "layer_error": layer_error})


def _linear_item(numerics: Numerics) -> SuiteItem:
    sys: HyperbolicSystem = build_system("linear2")
    fan: WaveFan = solve_boundary_riemann(sys, [1.0, 2.0], [3.0, 4.0], numerics)
    trace_error: float = float(np.max(np.abs(fan.trace - np.array([1.0, 4.0]))))
    waves_ok: bool = (len(fan.waves) == 1 and abs(fan.waves[0].speed - 1.0) <= ORACLE_TOL
                      and float(np.max(np.abs(fan.waves[0].right - np.array([1.0, 2.0])))) <= ORACLE_TOL)
    layer: Optional[BoundaryLayerProfile] = fan.boundary_group.layer if fan.boundary_group is not None else None
    layer_error: float = math.inf
    if layer is not None:
        exact: np.ndarray = np.column_stack((1.0 + 2.0 * np.exp(-layer.y), np.full(layer.y.size, 4.0)))
        layer_error = float(np.max(np.abs(layer.states - exact)))
    passed: bool = trace_error <= ORACLE_TOL and waves_ok and layer_error <= ORACLE_TOL
    return SuiteItem(name="linear_closed_form", passed=passed,
                     detail={"trace_error": trace_error, "waves_ok": waves_ok, "layer_error": layer_error})

# endregion


# region random boundary problems

def _boundary_problems(config: RunConfig, rng: np.random.Generator) -> List[Tuple[HyperbolicSystem, np.ndarray,
                                                                                     np.ndarray]]:
    size: float = config.suite.data_size
    p_system: HyperbolicSystem = build_system("p-system")
    burgers: HyperbolicSystem = build_system("burgers")
    problems: list = []
    for _ in range(config.suite.boundary_problems):
        d: np.ndarray = rng.standard_normal(2)
        u0: np.ndarray = np.array([1.0, 0.0])
        problems.append((p_system, u0, u0 + size * d / np.linalg.norm(d)))
    for _ in range(config.suite.boundary_problems):
        u0 = np.array([rng.uniform(-size, size)])
        problems.append((burgers, u0, u0 + size * rng.choice([-1.0, 1.0]) * rng.uniform(0.5, 1.0)))
    return problems


def _fan_distance(a: WaveFan, b: WaveFan) -> float:
    if len(a.waves) != len(b.waves):
        return math.inf
    distance: float = float(np.max(np.abs(a.trace - b.trace)))
    for wa, wb in zip(a.waves, b.waves):
        distance = max(distance, float(np.max(np.abs(wa.left - wb.left))), float(np.max(np.abs(wa.right - wb.right))),
                       abs(wa.speed - wb.speed))
    return distance


def _structural_items(config: RunConfig, rng: np.random.Generator) -> List[SuiteItem]:
    numerics: Numerics = config.numerics
    failures: List[str] = []
    distances: List[float] = []
    for sys, u0, ud in _boundary_problems(config, rng):
        label: str = f"{sys.name} {u0.tolist()} -> {ud.tolist()}"
        try:
            fan: WaveFan = solve_boundary_riemann(sys, u0, ud, numerics)
        except SOLVER_ERRORS as e:
            failures.append(f"{label}: {type(e).__name__}")
            continue
        report = validate_solution(sys, fan, numerics)
        if not report.passed:
            failures.append(f"{label}: {report.failures()}")
        guess: np.ndarray = fan.strengths + 1e-3 * rng.standard_normal(fan.strengths.size)
        try:
            again: WaveFan = solve_boundary_riemann(sys, u0, ud, numerics, initial_guess=guess)
            distances.append(_fan_distance(fan, again))
        except SOLVER_ERRORS as e:
            logging.debug(f"suite: second initialization of {label} failed; Detail: {e}")
            distances.append(math.inf)
    total: int = 2 * config.suite.boundary_problems
    worst: float = max(distances, default=0.0)
    return [
        SuiteItem(name="structural_contract", passed=not failures,
                  detail={"problems": total, "failures": failures}),
        SuiteItem(name="uniqueness", passed=worst <= UNIQUENESS_TOL,
                  detail={"compared": len(distances), "worst_distance": worst}),
    ]

# endregion


def _random_dissipative(sys: HyperbolicSystem, u: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """
    B = (D2 eta)^-1 (alpha I + K) with K skew, so that sym(D2 eta B) = alpha I.
    """
    hessian: np.ndarray = np.atleast_2d(sys.entropy.hess_eta(u))
    k: np.ndarray = rng.standard_normal((sys.n, sys.n))
    return np.linalg.solve(hessian, rng.uniform(0.5, 2.0) * np.eye(sys.n) + (k - k.T))


def _signature_item(config: RunConfig, rng: np.random.Generator) -> SuiteItem:
    systems: List[HyperbolicSystem] = [build_system(name) for name in ("burgers", "linear2", "p-system")]
    mismatches: List[str] = []
    compared: int = 0
    for _ in range(config.suite.signature_draws):
        sys: HyperbolicSystem = systems[int(rng.integers(len(systems)))]
        u: np.ndarray = sys.region.lower + rng.random(sys.n) * (sys.region.upper - sys.region.lower)
        variant: HyperbolicSystem = sys.with_viscosity(_random_dissipative(sys, u, rng))
        try:
            counts: SignatureCounts = eigen_signature_compare(variant, u, config.numerics)
        except NearSingularException:
            continue
        compared += 1
        if counts.neg_DF != counts.neg_BinvDF or counts.pos_DF != counts.pos_BinvDF:
            mismatches.append(f"{sys.name} at {u.tolist()}: {counts}")
    return SuiteItem(name="signature_counts", passed=not mismatches,
                     detail={"compared": compared, "mismatches": mismatches})


def _contact_item(numerics: Numerics) -> SuiteItem:
    """
    Hugoniot locus and rarefaction curve through the same state agree to third order.
    Fan speeds of the wave fan curves on either side are nondecreasing.
    """
    sys: HyperbolicSystem = build_system("p-system")
    base: np.ndarray = np.array([1.0, 0.0])
    slopes: List[float] = []
    for family in (1, 2):
        locus: HugoniotLocus = hugoniot_locus(sys, base, family, max(CONTACT_STRENGTHS) * 1.1, numerics=numerics)
        gaps: List[float] = [float(np.linalg.norm(locus.state_at(s) - rarefaction_curve(sys, base, family, s,
                                                                                        numerics=numerics).endpoint))
                             for s in CONTACT_STRENGTHS]
        slopes.append(float(np.polyfit(np.log(CONTACT_STRENGTHS), np.log(gaps), 1)[0]))
    monotone: bool = True
    for family in (1, 2):
        for s in (-0.2, 0.2):
            speeds: np.ndarray = wave_fan_curve(sys, base, family, s, numerics=numerics).fan_speeds
            monotone = monotone and bool(np.all(np.diff(speeds) >= -numerics.tol_contact))
    passed: bool = monotone and all(CONTACT_SLOPE[0] <= s <= CONTACT_SLOPE[1] for s in slopes)
    return SuiteItem(name="wave_curve_contact", passed=passed, detail={"slopes": slopes, "speeds_monotone": monotone})


def near_sonic_layer(delta: float, numerics: Numerics) -> Tuple[HyperbolicSystem, np.ndarray, BoundaryLayerProfile]:
    """
    p-system in the frame with drift -sqrt(2), where lambda_2 vanishes at v = 1.
    The equilibrium (v, 0) has lambda_2 = -delta; the boundary value sits
    delta away along the v axis, which excites both layer modes.
    """
    drift: float = -math.sqrt(2.0)
    sys: HyperbolicSystem = build_system("p-system", {"drift": drift})
    v: float = ((math.sqrt(2.0) - delta) ** 2 / 2.0) ** (-1.0 / 3.0)
    eq: np.ndarray = np.array([v, 0.0])
    return sys, eq, shoot_layer(sys, eq, eq + np.array([delta, 0.0]), numerics)


def _decay_item(numerics: Numerics) -> SuiteItem:
    perturbations: List[float] = []
    rates_ok: List[bool] = []
    for delta in DECAY_DELTAS:
        sys, eq, profile = near_sonic_layer(delta, numerics)
        split: LayerDecomposition = decompose_layer(sys, profile, eq, 2, numerics)
        perturbations.append(split.max_perturbation())
        rates_ok.append(split.rate_s is None or split.rate_s >= 0.8 * 0.5 * split.gap)
    slope: float = float(np.polyfit(np.log(DECAY_DELTAS), np.log(perturbations), 1)[0])
    passed: bool = all(rates_ok) and DECAY_SLOPE[0] <= slope <= DECAY_SLOPE[1]
    return SuiteItem(name="layer_decay", passed=passed,
                     detail={"deltas": list(DECAY_DELTAS), "max_perturbation": perturbations, "slope": slope,
                             "rates_ok": rates_ok})


# region viscous

def _limits_item(config: RunConfig, name: str, u0: np.ndarray, writer: ArtifactWriter) -> SuiteItem:
    sys: HyperbolicSystem = build_system(name)
    direction: np.ndarray = np.ones(sys.n) / math.sqrt(sys.n)
    table: ComparisonTable = compare_limits(sys, u0, u0 + config.suite.data_size * direction,
                                            config.suite.epsilons, config.simulation, config.numerics)
    writer.write_json(f"suite_limits_{name}.json", table.to_dict())
    d: np.ndarray = np.array([row.d_uz for row in table.rows])
    last = table.rows[-1]
    passed: bool = (table.failed_rows == 0 and bool(np.all(np.diff(d) < 0.0))
                    and (d.size < 2 or d[-1] <= 0.7 * d[-2])
                    and d[-1] <= 3.0 * max(last.d_ufan, last.d_zfan))
    return SuiteItem(name=f"limits_{name}", passed=passed, detail={"d_UZ": d.tolist()})


def _dependence_item(config: RunConfig) -> SuiteItem:
    sys: HyperbolicSystem = build_system("linear2")
    u0, ud = np.array([1.0, 2.0]), np.array([3.0, 4.0])
    identity: np.ndarray = np.eye(2)
    mixing: np.ndarray = np.array(MIXING_VISCOSITY)
    runs = [viscosity_dependence_experiment(sys, u0, ud, identity, mixing, epsilon, config.simulation, config.numerics)
            for epsilon in config.suite.epsilons[-2:]]
    control = viscosity_dependence_experiment(sys, u0, ud, identity, identity, config.suite.epsilons[-1],
                                              config.simulation, config.numerics)
    fan_gap: Optional[float] = runs[-1].fan_gap
    passed: bool = fan_gap is not None and fan_gap >= DEPENDENCE_GAP
    if passed:
        passed = all(result.gap >= 0.5 * fan_gap for result in runs)
        passed = passed and float(np.linalg.norm(runs[-1].trace_2 - runs[-1].fan_trace_2)) <= DEPENDENCE_TRACE_TOL
        passed = passed and runs[-1].gap >= 10.0 * control.gap
    return SuiteItem(name="viscosity_dependence", passed=passed,
                     detail={"fan_gap": fan_gap, "epsilons": list(config.suite.epsilons[-2:]),
                             "gaps": [result.gap for result in runs], "control_gap": control.gap,
                             "trace_2": runs[-1].trace_2.tolist()})

# endregion


def _guarded(name: str, build: Callable[[], SuiteItem]) -> SuiteItem:
    try:
        return build()
    except SOLVER_ERRORS as e:
        logging.warning(f"suite item {name} failed; Detail: {e}")
        return SuiteItem(name=name, passed=False, detail={"error": f"{type(e).__name__}: {e}"})


def run_suite(config: RunConfig, writer: ArtifactWriter) -> SuiteReport:
    """
    Runs the acceptance battery with the sizes of config.suite. Randomized
    items draw from one generator seeded with config.seed.

    :param config: Run configuration; system and data are not used.
    :type config: RunConfig
    :param writer: Receives the per-item documents.
    :type writer: ArtifactWriter
    :return: One item per check, never raises for a failed check.
    :rtype: SuiteReport
    """
    rng: np.random.Generator = np.random.default_rng(config.seed)
    numerics: Numerics = config.numerics
    report = SuiteReport()
    report.items.append(_guarded("envelopes", lambda: _envelope_item(config, rng)))
    report.items.append(_guarded("burgers_oracles", lambda: _burgers_item(numerics)))
    report.items.append(_guarded("linear_closed_form", lambda: _linear_item(numerics)))
    report.items.extend(_structural_items(config, rng))
    report.items.append(_guarded("signature_counts", lambda: _signature_item(config, rng)))
    report.items.append(_guarded("wave_curve_contact", lambda: _contact_item(numerics)))
    report.items.append(_guarded("layer_decay", lambda: _decay_item(numerics)))
    if config.suite.viscous:
        report.items.append(_guarded("limits_linear2", lambda: _limits_item(config, "linear2", np.array([1.0, 2.0]),
                                                                            writer)))
        report.items.append(_guarded("limits_p-system", lambda: _limits_item(config, "p-system",
                                                                             np.array([1.0, 0.0]), writer)))
        report.items.append(_guarded("viscosity_dependence", lambda: _dependence_item(config)))
    writer.write_json("suite.json", report.to_dict())
    for item in report.items:
        logging.info(f"suite {item.name}: passed={item.passed}")
    return report
