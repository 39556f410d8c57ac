import logging
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_core.spectral import eigen_decompose
from brkpyapi.brk_riemann.wave_fan import WaveFan, evaluate
from brkpyapi.brk_waves.hugoniot import shock_liu_margin
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_exception import WaveException
from brkpyapi.brk_waves.wave_kind import WaveKind


@dataclass
class ValidationCheck:
    name: str
    passed: bool
    residual: float = 0.0
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "residual": self.residual, "detail": self.detail}


@dataclass
class ValidationReport:
    """
    Pass/fail and residual of every solution condition of a fan.
    """
    checks: List[ValidationCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Optional[ValidationCheck]:
        return next((c for c in self.checks if c.name == name), None)

    def failures(self) -> List[str]:
        return [c.name for c in self.checks if not c.passed]

    def to_dict(self) -> dict:
        return {"passed": self.passed, "checks": [c.to_dict() for c in self.checks]}


@dataclass
class StructureReport:
    """
    Self-similar structure of a fan, wave by wave.

    :param plateau_defects: |right of wave j - left of wave j + 1| per junction.
    :param rh_residuals: |F(l) - F(r) - sigma (l - r)| per wave, zero for rarefactions.
    :param fan_residuals: max |lambda_i(V(xi)) - xi| per wave, zero for jumps.
    :param speed_order: Speeds weakly increase along the fan.
    """
    plateau_defects: List[float] = field(default_factory=list)
    rh_residuals: List[float] = field(default_factory=list)
    fan_residuals: List[float] = field(default_factory=list)
    contact_residuals: List[float] = field(default_factory=list)
    speed_order: bool = True


def _rh_residual(sys: HyperbolicSystem, wave: Wave) -> float:
    return float(np.linalg.norm(sys.F(wave.left) - sys.F(wave.right) - wave.speed * (wave.left - wave.right)))


def check_structure(sys: HyperbolicSystem, fan: WaveFan, numerics: Numerics = DEFAULT_NUMERICS) -> StructureReport:
    """
    Constant states between waves, Rankine-Hugoniot with each jump's own
    speed and lambda_i(V(xi)) = xi at the fan samples of rarefactions.
    """
    report = StructureReport()
    for a, b in zip(fan.waves[:-1], fan.waves[1:]):
        report.plateau_defects.append(float(np.linalg.norm(a.right - b.left)))
        if b.speed < a.speed_max - numerics.tol_fan:
            report.speed_order = False
    for wave in fan.waves:
        if wave.kind.is_jump:
            report.rh_residuals.append(_rh_residual(sys, wave))
            report.fan_residuals.append(0.0)
            if wave.kind is WaveKind.CONTACT:
                speeds = [eigen_decompose(sys, u, numerics).lam(wave.family) for u in (wave.left, wave.right)]
                report.contact_residuals.append(max(abs(s - wave.speed) for s in speeds))
            else:
                report.contact_residuals.append(0.0)
            continue
        report.rh_residuals.append(0.0)
        report.contact_residuals.append(0.0)
        worst: float = 0.0
        for xi, u in zip(wave.fan_speeds, wave.fan_states):
            worst = max(worst, abs(eigen_decompose(sys, u, numerics).lam(wave.family) - xi))
        if np.any(np.diff(wave.fan_speeds) < -numerics.tol_fan):
            worst = max(worst, float(-np.min(np.diff(wave.fan_speeds))))
        report.fan_residuals.append(worst)
    return report


def _liu_margins(sys: HyperbolicSystem, waves, numerics: Numerics) -> List[float]:
    margins: List[float] = []
    for wave in waves:
        if wave.kind is not WaveKind.SHOCK:
            margins.append(0.0)
            continue
        try:
            verdict = shock_liu_margin(sys, wave.left, wave.right, wave.family, wave.speed, numerics)
            margins.append(verdict.worst_margin)
        except WaveException as e:
            logging.warning(f"Liu check of {wave.kind.name} family {wave.family} failed; Detail: {e}")
            margins.append(float("-inf"))
    return margins


def _far_field(sys: HyperbolicSystem, fan: WaveFan, numerics: Numerics) -> ValidationCheck:
    states: List[np.ndarray] = fan.plateaus + [fan.right_state]
    bound: float = max(max(eigen_decompose(sys, u, numerics).eigenvalues[-1] for u in states), fan.max_speed)
    residual: float = float(np.linalg.norm(evaluate(fan, bound + 1.0) - fan.right_state))
    if not fan.is_boundary:
        low: float = min(min(eigen_decompose(sys, u, numerics).eigenvalues[0] for u in states), fan.min_speed)
        residual = max(residual, float(np.linalg.norm(evaluate(fan, low - 1.0) - fan.left_state)))
    return ValidationCheck(name="far_field", passed=residual == 0.0, residual=residual,
                           detail=f"V(xi) beyond xi={bound:.6g}")


def validate_solution(sys: HyperbolicSystem, fan: WaveFan, numerics: Numerics = DEFAULT_NUMERICS,
                      tv_budget: Optional[float] = None) -> ValidationReport:
    """
    Checks a fan against the solution conditions: far field, total
    variation, admissible jumps, rarefaction speeds, and for boundary fans
    the zero-speed connection and the layer.

    :param sys: Hyperbolic system.
    :type sys: HyperbolicSystem
    :param fan: Fan to check.
    :type fan: WaveFan
    :param numerics: Tolerances, tv_factor in particular.
    :type numerics: Numerics
    :param tv_budget: Total variation bound, tv_factor times the data jump when None.
    :type tv_budget: Optional[float]
    :return: Report, never raises for failed checks.
    :rtype: ValidationReport
    """
    report = ValidationReport()
    report.checks.append(_far_field(sys, fan, numerics))

    budget: float = numerics.tv_factor * fan.data_jump() if tv_budget is None else tv_budget
    tv: float = fan.total_variation
    report.checks.append(ValidationCheck(name="total_variation", passed=tv <= budget + numerics.tol_newton,
                                         residual=tv, detail=f"budget {budget:.6g}"))

    structure: StructureReport = check_structure(sys, fan, numerics)
    margins: List[float] = _liu_margins(sys, fan.waves, numerics)
    scale: float = max(1.0, float(np.max(np.abs(fan.right_state))))
    bad_jumps: List[int] = [
        j for j, wave in enumerate(fan.waves) if wave.kind.is_jump and (
            structure.rh_residuals[j] > numerics.tol_rh * scale or margins[j] < -numerics.tol_liu
            or structure.contact_residuals[j] > numerics.tol_ld)
    ]
    plateau: float = max(structure.plateau_defects, default=0.0)
    report.checks.append(ValidationCheck(
        name="jumps", passed=not bad_jumps and plateau == 0.0 and structure.speed_order,
        residual=max(structure.rh_residuals + [plateau], default=0.0),
        detail=f"inadmissible or inconsistent waves {bad_jumps}" if bad_jumps else
        ("" if structure.speed_order else "speeds not ordered")))

    bad_fans: List[int] = [j for j, r in enumerate(structure.fan_residuals) if r > numerics.tol_fan]
    report.checks.append(ValidationCheck(name="rarefactions", passed=not bad_fans,
                                         residual=max(structure.fan_residuals, default=0.0),
                                         detail=f"waves {bad_fans}" if bad_fans else ""))

    if fan.is_boundary:
        report.checks.extend(_boundary_checks(sys, fan, numerics))
    logging.info(f"validation of {fan.kind.name.lower()} fan: passed={report.passed}, failures {report.failures()}")
    return report


def _boundary_checks(sys: HyperbolicSystem, fan: WaveFan, numerics: Numerics) -> List[ValidationCheck]:
    group = fan.boundary_group
    if group is None:
        same: bool = fan.boundary_state is not None and bool(np.all(fan.boundary_state == fan.trace))
        return [ValidationCheck(name="zero_speed", passed=True),
                ValidationCheck(name="layer", passed=same, detail="" if same else "missing layer")]

    trace: np.ndarray = fan.trace
    underline: np.ndarray = group.underline_state
    scale: float = max(1.0, float(np.max(np.abs(trace))))
    flux_gap: float = float(np.linalg.norm(sys.F(underline) - sys.F(trace)))
    allowance: float = max(numerics.tol_rh, numerics.zero_speed_tol * float(np.linalg.norm(underline - trace)))
    margins: List[float] = _liu_margins(sys, group.zero_speed_waves, numerics)
    inadmissible: List[int] = [j for j, m in enumerate(margins) if m < -numerics.tol_liu]
    zero_speed = ValidationCheck(name="zero_speed", passed=flux_gap <= allowance * scale and not inadmissible,
                                 residual=flux_gap,
                                 detail=f"inadmissible zero-speed waves {inadmissible}" if inadmissible else "")

    layer = group.layer
    if layer is None:
        return [zero_speed, ValidationCheck(name="layer", passed=False, detail="missing layer")]
    residual_ok, tail_ok = layer.satisfies(numerics)
    anchored: bool = bool(np.all(layer.equilibrium == underline)) and (
        fan.boundary_state is None or bool(np.all(layer.boundary_value == fan.boundary_state)))
    problems: List[str] = [label for label, ok in (("residual", residual_ok), ("tail", tail_ok),
                                                   ("endpoints", anchored)) if not ok]
    return [zero_speed, ValidationCheck(name="layer", passed=not problems, residual=layer.residual,
                                        detail=f"failed: {problems}" if problems else "")]
