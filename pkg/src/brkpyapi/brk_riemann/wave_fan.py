import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from brkpyapi.brk_core.boundary_regime import BoundaryRegime, RegimeKind
from brkpyapi.brk_layers.boundary_layer import BoundaryLayerProfile
from brkpyapi.brk_riemann.fan_kind import FanKind
from brkpyapi.brk_waves.wave import Wave


SCHEMA_VERSION: int = 1


@dataclass(frozen=True, eq=False)
class BoundaryGroup:
    """
    What a boundary fan carries at x = 0: the layer equilibrium, the
    zero-speed waves from it to the trace, and the layer itself.
    """
    underline_state: np.ndarray
    zero_speed_waves: tuple = ()
    layer: Optional[BoundaryLayerProfile] = None

    def to_dict(self) -> dict:
        return {
            "underline_state": self.underline_state.tolist(),
            "zero_speed_waves": [w.to_dict() for w in self.zero_speed_waves],
            "layer": self.layer.to_dict() if self.layer is not None else None,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BoundaryGroup":
        layer: Optional[dict] = data.get("layer")
        return cls(underline_state=np.asarray(data["underline_state"], dtype=float),
                   zero_speed_waves=tuple(Wave.from_dict(w) for w in data.get("zero_speed_waves", [])),
                   layer=BoundaryLayerProfile.from_dict(layer) if layer is not None else None)


@dataclass(frozen=True, eq=False)
class WaveFan:
    """
    Self-similar solution V(xi) assembled from elementary waves.

    For a Riemann fan, left_state is U- and right_state is U+. For a
    boundary fan, right_state is U_0 and boundary_state is U_D; the waves
    all have nonnegative speed.

    :param kind: Riemann or boundary Riemann.
    :type kind: FanKind
    :param left_state: State below the slowest wave.
    :type left_state: np.ndarray
    :param right_state: State above the fastest wave.
    :type right_state: np.ndarray
    :param waves: Waves with nondecreasing speeds.
    :type waves: tuple
    :param strengths: Signed strengths per family, 1-based family i at index i - 1.
    :type strengths: np.ndarray
    :param boundary_state: Boundary datum U_D.
    :type boundary_state: Optional[np.ndarray]
    :param boundary_group: Layer data of a boundary fan.
    :type boundary_group: Optional[BoundaryGroup]
    :param regime: Boundary regime the fan was solved in.
    :type regime: Optional[BoundaryRegime]
    """
    kind: FanKind
    left_state: np.ndarray
    right_state: np.ndarray
    waves: tuple = ()
    strengths: np.ndarray = field(default_factory=lambda: np.empty(0))
    boundary_state: Optional[np.ndarray] = None
    boundary_group: Optional[BoundaryGroup] = None
    regime: Optional[BoundaryRegime] = None
    newton_residual: float = 0.0
    newton_iterations: int = 0
    flags: dict = field(default_factory=dict)

    @property
    def is_boundary(self) -> bool:
        return self.kind is FanKind.BOUNDARY_RIEMANN

    @property
    def trace(self) -> np.ndarray:
        """
        V(0+) of a boundary fan: the left state of the slowest wave, U_0 without waves.
        """
        return self.waves[0].left.copy() if self.waves else self.right_state.copy()

    @property
    def plateaus(self) -> List[np.ndarray]:
        if not self.waves:
            return [self.left_state.copy()]
        return [self.waves[0].left] + [w.right for w in self.waves]

    @property
    def total_variation(self) -> float:
        return float(sum(w.strength for w in self.waves))

    @property
    def max_speed(self) -> float:
        return max((w.speed_max for w in self.waves), default=0.0)

    @property
    def min_speed(self) -> float:
        return min((w.speed for w in self.waves), default=0.0)

    def data_jump(self) -> float:
        other: np.ndarray = self.boundary_state if self.is_boundary else self.left_state
        return float(np.linalg.norm(self.right_state - other))

    def samples(self, xi: np.ndarray) -> np.ndarray:
        """
        Table of (xi, V(xi)) rows.
        """
        return np.array([np.concatenate(([x], evaluate(self, x))) for x in np.asarray(xi, dtype=float)])

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "kind": self.kind.name.lower(),
            "left_state": self.left_state.tolist(),
            "right_state": self.right_state.tolist(),
            "boundary_state": self.boundary_state.tolist() if self.boundary_state is not None else None,
            "strengths": self.strengths.tolist(),
            "waves": [w.to_dict() for w in self.waves],
            "plateaus": [p.tolist() for p in self.plateaus],
            "trace": self.trace.tolist(),
            "total_variation": self.total_variation,
            "boundary_group": self.boundary_group.to_dict() if self.boundary_group is not None else None,
            "regime": self.regime.to_dict() if self.regime is not None else None,
            "newton": {"residual": self.newton_residual, "iterations": self.newton_iterations},
            "flags": dict(self.flags),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "WaveFan":
        schema: int = int(data.get("schema", 0))
        if schema != SCHEMA_VERSION:
            raise ValueError(f"wave fan schema {schema} is not supported, expected {SCHEMA_VERSION}")
        regime: Optional[BoundaryRegime] = None
        if data.get("regime"):
            r: dict = data["regime"]
            regime = BoundaryRegime(kind=RegimeKind[r["kind"].upper()], p=r.get("p"), k=r.get("k"),
                                    c=float(r.get("c", 0.0)), k_delta=float(r.get("k_delta", 0.0)))
        group: Optional[dict] = data.get("boundary_group")
        boundary: Optional[list] = data.get("boundary_state")
        newton: dict = data.get("newton", {})
        return cls(
            kind=FanKind[data["kind"].upper()],
            left_state=np.asarray(data["left_state"], dtype=float),
            right_state=np.asarray(data["right_state"], dtype=float),
            waves=tuple(Wave.from_dict(w) for w in data.get("waves", [])),
            strengths=np.asarray(data.get("strengths", []), dtype=float),
            boundary_state=np.asarray(boundary, dtype=float) if boundary is not None else None,
            boundary_group=BoundaryGroup.from_dict(group) if group else None,
            regime=regime,
            newton_residual=float(newton.get("residual", 0.0)),
            newton_iterations=int(newton.get("iterations", 0)),
            flags=dict(data.get("flags", {})),
        )

    def save(self, path: Union[str, Path]) -> Path:
        target: Path = Path(path)
        target.write_text(json.dumps(self.to_dict(), indent=2))
        return target

    @classmethod
    def load(cls, path: Union[str, Path]) -> "WaveFan":
        return cls.from_dict(json.loads(Path(path).read_text()))


def evaluate(fan: WaveFan, xi: float) -> np.ndarray:
    """
    V(xi): plateau between waves, right state from a jump speed on, fan
    state interpolated inside a rarefaction.

    :param fan: Wave fan.
    :type fan: WaveFan
    :param xi: Similarity variable x / t.
    :type xi: float
    :return: State.
    :rtype: np.ndarray
    """
    state: np.ndarray = fan.left_state
    for wave in fan.waves:
        if xi < wave.speed:
            return state.copy()
        if wave.kind.is_jump or xi >= wave.speed_max:
            state = wave.right
            continue
        return np.array([np.interp(xi, wave.fan_speeds, wave.fan_states[:, j]) for j in range(state.size)])
    return state.copy()
