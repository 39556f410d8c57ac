from enum import Enum


class SolutionKind(Enum):
    """
    Discretization a GridSolution comes from.
    """
    TIME_DEPENDENT = 0  # U(t, x) of the classical viscous problem
    SELF_SIMILAR = 1  # V(xi) of the self-similar viscous problem
