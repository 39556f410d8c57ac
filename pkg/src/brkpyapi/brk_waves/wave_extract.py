from typing import List, Optional, Tuple

import numpy as np

from brkpyapi.brk_core.brk_constants import DEFAULT_NUMERICS, Numerics
from brkpyapi.brk_core.hyperbolic_system import HyperbolicSystem
from brkpyapi.brk_waves.hugoniot import rh_speed
from brkpyapi.brk_waves.wave import Wave
from brkpyapi.brk_waves.wave_kind import WaveKind


JUMP: str = "jump"
FAN: str = "fan"

Segment = Tuple[str, int, int]


def segment_structure(contact: np.ndarray, min_cells: int = 2) -> List[Segment]:
    """
    Splits nodes 0..N into alternating jump and fan segments.

    A maximal run of detached nodes together with its two flanking contact
    nodes is a jump. Contact stretches of at most ``min_cells`` cells are
    absorbed into the neighbouring jump; longer ones are fans.

    :param contact: Contact flag per node, in construction order.
    :type contact: np.ndarray
    :param min_cells: Longest contact stretch absorbed into a jump.
    :type min_cells: int
    :return: Segments (kind, first node, last node) covering 0..N with shared endpoints.
    :rtype: List[Segment]
    """
    last: int = contact.size - 1
    if last < 1:
        return []
    flags: np.ndarray = contact.astype(bool).copy()
    flags[0] = flags[last] = True

    jumps: List[List[int]] = []
    j: int = 1
    while j < last:
        if flags[j]:
            j += 1
            continue
        start: int = j - 1
        while not flags[j]:
            j += 1
        if jumps and start - jumps[-1][1] <= min_cells:
            jumps[-1][1] = j
        else:
            jumps.append([start, j])
    if jumps and jumps[0][0] <= min_cells:
        jumps[0][0] = 0
    if jumps and last - jumps[-1][1] <= min_cells:
        jumps[-1][1] = last

    segments: List[Segment] = []
    position: int = 0
    for a, b in jumps:
        if a > position:
            segments.append((FAN, position, a))
        segments.append((JUMP, a, b))
        position = b
    if position < last:
        segments.append((FAN, position, last))
    return segments


def _trim_fan(speeds: np.ndarray, states: np.ndarray, lower: float, upper: float) -> Tuple[np.ndarray, np.ndarray]:
    keep: List[int] = []
    running: float = lower
    for idx, xi in enumerate(speeds):
        if running - 1e-14 <= xi <= upper + 1e-14:
            keep.append(idx)
            running = xi
    if not keep:
        middle: int = speeds.size // 2
        return np.array([min(max(speeds[middle], lower), upper)]), states[middle:middle + 1]
    return speeds[keep], states[keep]


def extract_waves(sys: HyperbolicSystem, family: int, states: np.ndarray, speeds_node: np.ndarray,
                  segments: List[Segment], numerics: Numerics = DEFAULT_NUMERICS,
                  speed_floor: float = -np.inf, first_left: Optional[Tuple[np.ndarray, float]] = None) -> List[Wave]:
    """
    Turns the segment structure of a converged curve into waves listed in
    fan order (from the far end of the curve toward its base).

    :param states: Curve states in construction order, row 0 is the base.
    :type states: np.ndarray
    :param speeds_node: lambda_i at every node.
    :type speeds_node: np.ndarray
    :param segments: Structure from segment_structure.
    :type segments: List[Segment]
    :param speed_floor: Lower bound for the speeds of the first wave.
    :type speed_floor: float
    :param first_left: Optional (state, speed) replacing the left end of the first fan.
    :type first_left: Optional[Tuple[np.ndarray, float]]
    :return: Waves with nondecreasing speeds.
    :rtype: List[Wave]
    """
    raw: List[dict] = []
    for kind, a, b in reversed(segments):
        left: np.ndarray = states[b]
        right: np.ndarray = states[a]
        if kind == JUMP:
            sigma: float = rh_speed(sys, left, right)
            contact_jump: bool = (abs(speeds_node[b] - sigma) <= numerics.tol_ld
                                  and abs(speeds_node[a] - sigma) <= numerics.tol_ld)
            raw.append({"kind": WaveKind.CONTACT if contact_jump else WaveKind.SHOCK,
                        "left": left, "right": right, "speed": sigma})
            continue
        lam: np.ndarray = speeds_node[a:b + 1][::-1]
        fan_states: np.ndarray = states[a:b + 1][::-1]
        if float(lam.max() - lam.min()) <= numerics.tol_ld:
            raw.append({"kind": WaveKind.CONTACT, "left": left, "right": right,
                        "speed": rh_speed(sys, left, right)})
        else:
            raw.append({"kind": WaveKind.RAREFACTION, "left": left, "right": right,
                        "fan_speeds": lam, "fan_states": fan_states})

    if first_left is not None and raw and raw[0]["kind"] is WaveKind.RAREFACTION:
        state, xi = first_left
        positive: np.ndarray = raw[0]["fan_speeds"] > xi
        raw[0]["left"] = state
        raw[0]["fan_speeds"] = np.concatenate(([xi], raw[0]["fan_speeds"][positive]))
        raw[0]["fan_states"] = np.vstack((state, raw[0]["fan_states"][positive]))

    waves: List[Wave] = []
    for idx, item in enumerate(raw):
        if item["kind"] is not WaveKind.RAREFACTION:
            waves.append(Wave(kind=item["kind"], family=family, left=item["left"], right=item["right"],
                              speed=item["speed"]))
            continue
        lower: float = waves[-1].speed_max if waves else speed_floor
        upper: float = np.inf
        if idx + 1 < len(raw) and raw[idx + 1]["kind"] is not WaveKind.RAREFACTION:
            upper = raw[idx + 1]["speed"]
        fan_speeds, fan_states = _trim_fan(item["fan_speeds"], item["fan_states"], lower, upper)
        waves.append(Wave(kind=WaveKind.RAREFACTION, family=family, left=item["left"], right=item["right"],
                          speed=float(fan_speeds[0]), speed_max=float(fan_speeds[-1]),
                          fan_speeds=fan_speeds, fan_states=fan_states))
    return waves
