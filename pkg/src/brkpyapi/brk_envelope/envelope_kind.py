from enum import Enum


class EnvelopeKind(Enum):
    CONVEX = 0  # largest convex minorant
    CONCAVE = 1  # smallest concave majorant
    MONOTONE_CONVEX = 2  # largest convex nondecreasing minorant
    MONOTONE_CONCAVE = 3  # smallest concave nondecreasing majorant, constant after its first descent

    @property
    def is_convex(self) -> bool:
        return self in (EnvelopeKind.CONVEX, EnvelopeKind.MONOTONE_CONVEX)
