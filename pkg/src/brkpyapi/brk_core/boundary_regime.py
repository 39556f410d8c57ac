from enum import Enum
from dataclasses import dataclass
from typing import Optional


class RegimeKind(Enum):
    """
    Kind of boundary classified on a region of state space.
    """
    NON_CHARACTERISTIC = 0
    """
    Every characteristic speed is bounded away from zero.
    """
    CHARACTERISTIC = 1
    """
    Exactly one characteristic speed approaches or crosses zero.
    """


@dataclass(frozen=True)
class BoundaryRegime:
    """
    Result of classify_boundary.

    :param kind: Non-characteristic or characteristic boundary.
    :type kind: RegimeKind
    :param p: Number of positive speeds (non-characteristic regime only).
    :type p: Optional[int]
    :param k: 1-based index of the near-zero field (characteristic regime only).
    :type k: Optional[int]
    :param c: Speed gap kept by the remaining fields.
    :type c: float
    :param k_delta: Bound on |lambda_k| over the samples (characteristic regime only).
    :type k_delta: float
    """
    kind: RegimeKind
    p: Optional[int] = None
    k: Optional[int] = None
    c: float = 0.0
    k_delta: float = 0.0

    @property
    def is_characteristic(self) -> bool:
        return self.kind is RegimeKind.CHARACTERISTIC

    def outgoing_count(self, n: int) -> int:
        """
        Number of families that enter the self-similar fan with positive speed.

        :param n: System dimension.
        :type n: int
        :return: p for a non-characteristic regime, n - k for a characteristic one.
        :rtype: int
        """
        if self.is_characteristic:
            return n - self.k
        return self.p

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.name.lower(),
            "p": self.p,
            "k": self.k,
            "c": self.c,
            "k_delta": self.k_delta,
        }
