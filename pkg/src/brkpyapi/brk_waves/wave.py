from dataclasses import dataclass, field

import numpy as np

from brkpyapi.brk_waves.wave_kind import WaveKind


@dataclass(frozen=True, eq=False)
class Wave:
    """
    One elementary wave of a wave fan, listed with its left and right states.

    :param kind: Shock, contact or rarefaction.
    :type kind: WaveKind
    :param family: 1-based characteristic family.
    :type family: int
    :param left: State on the left.
    :type left: np.ndarray
    :param right: State on the right.
    :type right: np.ndarray
    :param speed: Jump speed, or the slowest fan speed of a rarefaction.
    :type speed: float
    :param speed_max: Equal to speed for jumps, fastest fan speed otherwise.
    :type speed_max: float
    :param fan_speeds: Nondecreasing speeds xi_j of the fan samples.
    :type fan_speeds: np.ndarray
    :param fan_states: States V(xi_j), one row per sample.
    :type fan_states: np.ndarray
    """
    kind: WaveKind
    family: int
    left: np.ndarray
    right: np.ndarray
    speed: float
    speed_max: float = float("nan")
    fan_speeds: np.ndarray = field(default_factory=lambda: np.empty(0))
    fan_states: np.ndarray = field(default_factory=lambda: np.empty((0, 0)))

    def __post_init__(self):
        if np.isnan(self.speed_max):
            object.__setattr__(self, "speed_max", float(self.speed))

    @property
    def strength(self) -> float:
        """
        Length of the path from left to right through the fan samples.
        """
        if self.kind.is_jump or self.fan_states.size == 0:
            return float(np.linalg.norm(self.right - self.left))
        path: np.ndarray = np.vstack((self.left, self.fan_states, self.right))
        return float(np.sum(np.linalg.norm(np.diff(path, axis=0), axis=1)))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.name.lower(),
            "family": self.family,
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "speed": float(self.speed),
            "speed_max": float(self.speed_max),
            "fan_speeds": self.fan_speeds.tolist(),
            "fan_states": self.fan_states.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Wave":
        n: int = len(data["left"])
        fan_states: np.ndarray = np.asarray(data.get("fan_states", []), dtype=float).reshape(-1, n)
        return cls(
            kind=WaveKind[data["kind"].upper()],
            family=int(data["family"]),
            left=np.asarray(data["left"], dtype=float),
            right=np.asarray(data["right"], dtype=float),
            speed=float(data["speed"]),
            speed_max=float(data.get("speed_max", data["speed"])),
            fan_speeds=np.asarray(data.get("fan_speeds", []), dtype=float),
            fan_states=fan_states,
        )
