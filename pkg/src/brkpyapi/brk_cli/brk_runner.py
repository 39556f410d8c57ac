import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, Tuple

import numpy as np

from brkpyapi.__version__ import __version__
from brkpyapi.brk_cli.brk_artifacts import ArtifactWriter, state_header
from brkpyapi.brk_cli.brk_suite import SuiteReport, run_suite
from brkpyapi.brk_cli.cli_exception import CliException, ValidationError
from brkpyapi.brk_cli.problem_kind import ProblemKind, RunStatus
from brkpyapi.brk_cli.run_config import RunConfig, write_echo
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem, SamplingPlan
from brkpyapi.brk_core.spectral import HypothesisReport, check_hypotheses, classify_boundary
from brkpyapi.brk_core.system_exception import SystemException
from brkpyapi.brk_envelope.envelope_exception import EnvelopeException
from brkpyapi.brk_layers.layer_exception import LayerException
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.boundary_sensitivity import trace_continuity
from brkpyapi.brk_riemann.riemann_exception import RiemannException
from brkpyapi.brk_riemann.riemann_solver import solve_riemann
from brkpyapi.brk_riemann.validation import ValidationReport, validate_solution
from brkpyapi.brk_riemann.wave_fan import WaveFan
from brkpyapi.brk_viscous.classical_sim import simulate_classical, total_variation
from brkpyapi.brk_viscous.grid_solution import GridSolution
from brkpyapi.brk_viscous.limit_comparison import (CSV_HEADER, ComparisonTable, ViscosityDependence,
                                                   compare_limits, viscosity_dependence_experiment)
from brkpyapi.brk_viscous.selfsimilar_sim import simulate_selfsimilar
from brkpyapi.brk_viscous.viscous_exception import ViscousException
from brkpyapi.brk_waves.wave_exception import WaveException


SUMMARY_SCHEMA: int = 1
FAN_SAMPLES: int = 401
SOLVER_ERRORS = (SystemException, EnvelopeException, WaveException, LayerException, RiemannException,
                 ViscousException, ValueError)

Validations = Dict[str, dict]
Handler = Callable[[RunConfig, HyperbolicSystem, ArtifactWriter], Tuple[dict, Validations]]


@dataclass
class RunOutcome:
    """
    Exit status and summary of one run.
    """
    status: RunStatus
    directory: Path
    summary: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return self.status.value


def _check(passed: bool, **detail) -> dict:
    entry: dict = {"passed": bool(passed)}
    entry.update(detail)
    return entry


def _wave_rows(fan: WaveFan) -> list:
    return [{"kind": w.kind.name.lower(), "family": w.family, "speed": w.speed, "speed_max": w.speed_max,
             "strength": w.strength} for w in fan.waves]


def _fan_table(writer: ArtifactWriter, fan: WaveFan, lower: float, upper: float, n: int) -> None:
    xi: np.ndarray = np.linspace(lower, upper, FAN_SAMPLES)
    writer.write_csv("wave_fan.csv", fan.samples(xi), state_header("xi", n))
    writer.write_json("wave_fan.json", fan.to_dict())


# region handlers

def _riemann(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    fan: WaveFan = solve_riemann(sys, config.state("u_minus"), config.state("u_plus"), config.numerics,
                                 initial_guess=config.data.get("initial_guess"))
    report: ValidationReport = validate_solution(sys, fan, config.numerics)
    _fan_table(writer, fan, fan.min_speed - 0.5, fan.max_speed + 0.5, sys.n)
    results: dict = {"waves": _wave_rows(fan), "strengths": fan.strengths.tolist(),
                     "newton_residual": fan.newton_residual, "newton_iterations": fan.newton_iterations}
    return results, {"solution": _check(report.passed, checks=report.to_dict()["checks"])}


def _boundary_riemann(config: RunConfig, sys: HyperbolicSystem,
                      writer: ArtifactWriter) -> Tuple[dict, Validations]:
    u0: np.ndarray = config.state("u0")
    ud: np.ndarray = config.state("ud")
    fan: WaveFan = solve_boundary_riemann(sys, u0, ud, config.numerics,
                                          initial_guess=config.data.get("initial_guess"))
    report: ValidationReport = validate_solution(sys, fan, config.numerics)
    _fan_table(writer, fan, 0.0, max(fan.max_speed, 0.0) + 0.5, sys.n)
    layer = fan.boundary_group.layer if fan.boundary_group is not None else None
    if layer is not None and not layer.trivial:
        writer.write_csv("layer.csv", layer.table(), state_header("y", sys.n))
    results: dict = {"trace": fan.trace.tolist(), "waves": _wave_rows(fan), "strengths": fan.strengths.tolist(),
                     "regime": fan.regime.to_dict() if fan.regime is not None else None, "flags": fan.flags,
                     "newton_residual": fan.newton_residual}
    if "eta" in config.data:
        results["trace_continuity"] = trace_continuity(sys, u0, ud, config.data["eta"], config.numerics).to_dict()
    return results, {"solution": _check(report.passed, checks=report.to_dict()["checks"])}


def _slice_tables(writer: ArtifactWriter, solution: GridSolution, n: int) -> None:
    for index in range(solution.times.size):
        writer.write_csv(f"classical_t{index:03d}.csv", solution.table(index), state_header("x", n))


def _classical_sim(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    solution: GridSolution = simulate_classical(sys, config.state("u0"), config.state("ud"), config.data["epsilon"],
                                                config.simulation, config.numerics)
    _slice_tables(writer, solution, sys.n)
    results: dict = {"times": solution.times.tolist(), "total_variation": solution.total_variation.tolist(),
                     "config": solution.config, "diagnostics": solution.diagnostics}
    checks: Validations = {"total_variation": _check(solution.diagnostics["tv_ok"],
                                                     budget=solution.diagnostics["tv_budget"])}
    if solution.entropy is not None:
        results["entropy"] = solution.entropy.to_dict()
        checks["entropy"] = _check(solution.entropy.dissipative, max_increase=solution.entropy.max_increase,
                                   tolerance=solution.entropy.tolerance)
    return results, checks


def _selfsimilar_sim(config: RunConfig, sys: HyperbolicSystem,
                     writer: ArtifactWriter) -> Tuple[dict, Validations]:
    u0: np.ndarray = config.state("u0")
    ud: np.ndarray = config.state("ud")
    solution: GridSolution = simulate_selfsimilar(sys, u0, ud, config.data["epsilon"], config.simulation,
                                                  config.numerics)
    writer.write_csv("selfsimilar.csv", solution.table(), state_header("xi", sys.n))
    budget: float = config.numerics.tv_factor * float(np.linalg.norm(u0 - ud)) * config.simulation.tv_safety
    tv: float = total_variation(solution.values)
    results: dict = {"config": solution.config, "diagnostics": solution.diagnostics, "total_variation": tv}
    return results, {"total_variation": _check(tv <= budget + config.numerics.tol_newton, budget=budget)}


def _compare_limits(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    table: ComparisonTable = compare_limits(sys, config.state("u0"), config.state("ud"), config.data["epsilons"],
                                            config.simulation, config.numerics)
    writer.write_csv("comparison.csv", table.as_array(), CSV_HEADER)
    writer.write_json("comparison.json", table.to_dict())
    return table.to_dict(), {"rows": _check(table.failed_rows == 0, failed=table.failed_rows),
                             "monotone": _check(table.monotone)}


def _b_dependence(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    result: ViscosityDependence = viscosity_dependence_experiment(
        sys, config.state("u0"), config.state("ud"), config.matrix("b_1"), config.matrix("b_2"),
        config.data["epsilon"], config.simulation, config.numerics)
    writer.write_json("b_dependence.json", result.to_dict())
    return result.to_dict(), {"dissipative": _check(all(result.dissipative))}


def _validate(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    plan = SamplingPlan(seed=config.seed)
    hypotheses: HypothesisReport = check_hypotheses(sys, plan, config.numerics)
    results: dict = {"hypotheses": hypotheses.to_dict()}
    checks: Validations = {"hypotheses": _check(hypotheses.passed, failures=hypotheses.failures)}
    try:
        regime = classify_boundary(sys, sys.region, plan, config.numerics)
        results["regime"] = regime.to_dict()
        checks["regime"] = _check(True)
    except SystemException as e:
        results["regime"] = None
        checks["regime"] = _check(False, error=f"{type(e).__name__}: {e}")
    if "fan_file" in config.data:
        try:
            fan: WaveFan = WaveFan.load(config.data["fan_file"])
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise ValidationError(f"data.fan_file {config.data['fan_file']} cannot be loaded; Detail: {e}")
        report: ValidationReport = validate_solution(sys, fan, config.numerics)
        results["fan_file"] = config.data["fan_file"]
        checks["fan"] = _check(report.passed, checks=report.to_dict()["checks"])
    writer.write_json("validation.json", results)
    return results, checks


def _suite(config: RunConfig, sys: HyperbolicSystem, writer: ArtifactWriter) -> Tuple[dict, Validations]:
    report: SuiteReport = run_suite(config, writer)
    return report.to_dict(), {item.name: _check(item.passed, **item.detail) for item in report.items}

# endregion


HANDLERS: Dict[ProblemKind, Handler] = {
    ProblemKind.RIEMANN: _riemann,
    ProblemKind.BOUNDARY_RIEMANN: _boundary_riemann,
    ProblemKind.CLASSICAL_SIM: _classical_sim,
    ProblemKind.SELFSIMILAR_SIM: _selfsimilar_sim,
    ProblemKind.COMPARE_LIMITS: _compare_limits,
    ProblemKind.B_DEPENDENCE: _b_dependence,
    ProblemKind.VALIDATE: _validate,
    ProblemKind.SUITE: _suite,
}


def run(config: RunConfig) -> RunOutcome:
    """
    Dispatches a configuration to its problem, writes the result files,
    the effective configuration and summary.json.

    :param config: Validated configuration.
    :type config: RunConfig
    :return: Outcome; the status is PASSED iff every validation passed.
    :rtype: RunOutcome
    """
    directory: Path = config.run_dir
    writer = ArtifactWriter(directory, config.formats)
    writer.record(write_echo(config, directory))
    summary: dict = {"schema": SUMMARY_SCHEMA, "version": __version__, "problem": config.problem.value,
                     "system": config.system_name, "validations": {}, "results": {}, "error": None}
    logging.info(f"run {config.problem.value} on {config.system_name}, output {directory}")
    try:
        sys: HyperbolicSystem = config.system()
        results, validations = HANDLERS[config.problem](config, sys, writer)
        summary["results"] = results
        summary["validations"] = validations
        passed: bool = all(v["passed"] for v in validations.values())
        status: RunStatus = RunStatus.PASSED if passed else RunStatus.VALIDATION_FAILED
        if not passed:
            failed = [name for name, v in validations.items() if not v["passed"]]
            logging.warning(f"run {config.problem.value}: validations failed {failed}")
    except CliException as e:
        logging.error(f"run {config.problem.value} rejected its data; Detail: {e}")
        summary["error"] = {"type": type(e).__name__, "message": str(e)}
        status = RunStatus.CONFIG_ERROR
    except SOLVER_ERRORS as e:
        logging.error(f"run {config.problem.value} failed; Detail: {type(e).__name__}: {e}")
        summary["error"] = {"type": type(e).__name__, "message": str(e)}
        status = RunStatus.SOLVER_ERROR
    summary["status"] = status.name.lower()
    summary["exit_code"] = status.value
    writer.write_summary(summary)
    return RunOutcome(status=status, directory=directory, summary=summary)
