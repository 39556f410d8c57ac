from enum import Enum


class FanKind(Enum):
    """
    Problem a wave fan solves.
    """
    RIEMANN = 0
    """
    Two-sided Riemann problem on the line.
    """
    BOUNDARY_RIEMANN = 1
    """
    Boundary Riemann problem on x > 0 with a boundary layer at x = 0.
    """
