from enum import Enum


class WaveKind(Enum):
    """
    Elementary wave of a self-similar solution.
    """
    SHOCK = 0
    """
    Admissible discontinuity satisfying the Rankine-Hugoniot conditions.
    """
    CONTACT = 1
    """
    Contact discontinuity: characteristic speed equals the jump speed on both sides.
    """
    RAREFACTION = 2
    """
    Centered fan on which the characteristic speed equals xi.
    """

    @property
    def is_jump(self) -> bool:
        return self is not WaveKind.RAREFACTION
