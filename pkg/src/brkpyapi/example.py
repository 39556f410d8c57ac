import logging

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS
from brkpyapi.brk_core.brk_models import build_system
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_riemann.boundary_riemann_solver import solve_boundary_riemann
from brkpyapi.brk_riemann.riemann_solver import solve_riemann
from brkpyapi.brk_riemann.validation import ValidationReport, validate_solution
from brkpyapi.brk_riemann.wave_fan import WaveFan, evaluate
from brkpyapi.brk_viscous.grid_solution import SimulationConfig
from brkpyapi.brk_viscous.limit_comparison import CSV_HEADER, ComparisonTable, compare_limits


if __name__ == "__main__":
    # Start logging
    logging.basicConfig(
        level=logging.INFO,
        format="%(asctime)s:%(module)s:%(levelname)s:%(message)s"
    )

    p_system: HyperbolicSystem = build_system("p-system")

    fan: WaveFan = solve_riemann(p_system, [1.0, 0.0], [1.1, 0.05], DEFAULT_NUMERICS)
    for wave in fan.waves:
        logging.info(f"{wave.kind.name} family {wave.family} : speed {wave.speed:.6f}, strength {wave.strength:.6f}")
    report: ValidationReport = validate_solution(p_system, fan, DEFAULT_NUMERICS)
    logging.info(f"riemann fan passed : {report.passed}")

    linear2: HyperbolicSystem = build_system("linear2")

    boundary_fan: WaveFan = solve_boundary_riemann(linear2, [1.0, 2.0], [3.0, 4.0], DEFAULT_NUMERICS)
    logging.info(f"regime : {boundary_fan.regime.kind.name}, p = {boundary_fan.regime.p}")
    logging.info(f"trace : {boundary_fan.trace}")  # boundary value seen by the inviscid solution
    logging.info(f"V(0.5) : {evaluate(boundary_fan, 0.5)}")

    table: ComparisonTable = compare_limits(linear2, [1.0, 2.0], [3.0, 4.0], [0.04, 0.02, 0.01],
                                            SimulationConfig(dx=0.01), DEFAULT_NUMERICS)
    distances: np.ndarray = table.as_array()
    logging.info(f"{', '.join(CSV_HEADER)} :\n{distances}")

    logging.info("Done...")
