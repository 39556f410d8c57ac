from enum import Enum


class ProblemKind(Enum):
    """
    Problem a run dispatches to; the value is the subcommand name.
    """
    RIEMANN = "riemann"
    BOUNDARY_RIEMANN = "boundary-riemann"
    CLASSICAL_SIM = "classical-sim"
    SELFSIMILAR_SIM = "selfsimilar-sim"
    COMPARE_LIMITS = "compare-limits"
    B_DEPENDENCE = "b-dependence"
    VALIDATE = "validate"
    SUITE = "suite"  # acceptance battery


class RunStatus(Enum):
    """
    Exit status of a run.
    """
    PASSED = 0  # every validation passed
    VALIDATION_FAILED = 1  # results written, some validation failed
    SOLVER_ERROR = 2  # a solver raised; the error is in the summary
    CONFIG_ERROR = 3  # the configuration could not be parsed or validated
