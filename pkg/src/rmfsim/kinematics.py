"""Closed-form robot kinematics: acceleration-limited travel, turning, lifting.

All travel follows a trapezoidal (or triangular) velocity profile with a
symmetric acceleration/deceleration bound. Turning requires a full stop and
costs a fixed fraction of the full-turn time per quarter turn.
"""

from dataclasses import dataclass
from math import sqrt

CELL_PITCH = 1.0  # meters between adjacent waypoints


class InfeasibleSegment(ValueError):
    """Distance too short to change speed between the requested endpoints."""


@dataclass(frozen=True)
class KinematicParams:
    accel: float = 0.5        # m/s^2, symmetric accel/decel bound
    vmax: float = 1.5         # m/s
    full_turn_time: float = 2.5   # s for a 360 degree turn
    lift_set_time: float = 3.0    # s for lifting or setting down a pod

    def __post_init__(self):
        if min(self.accel, self.vmax, self.full_turn_time, self.lift_set_time) <= 0:
            raise ValueError("kinematic parameters must be positive")

    def turn_time(self, quarter_turns: int) -> float:
        """Time for a heading change of the given number of 90 degree steps."""
        return (quarter_turns % 4 if quarter_turns % 4 <= 2 else 4 - quarter_turns % 4) \
            * self.full_turn_time / 4.0


DEFAULT_PARAMS = KinematicParams()


def segment_time(distance, v_in=0.0, v_out=0.0, params=DEFAULT_PARAMS):
    """Minimal travel time over `distance` entering at v_in and leaving at v_out.

    Uses the standard trapezoidal profile: accelerate to a peak speed
    v_p = sqrt(a*d + (v_in^2 + v_out^2)/2), cruising at vmax when v_p would
    exceed it. Raises InfeasibleSegment when the distance cannot absorb the
    required speed change under the acceleration bound.
    """
    a, vmax = params.accel, params.vmax
    if distance < 0:
        raise ValueError("negative distance")
    if not (0 <= v_in <= vmax and 0 <= v_out <= vmax):
        raise ValueError("boundary speeds outside [0, vmax]")
    if abs(v_out * v_out - v_in * v_in) / (2 * a) > distance + 1e-12:
        raise InfeasibleSegment(
            f"cannot change {v_in} -> {v_out} m/s within {distance} m at |a| <= {a}")
    if distance == 0:
        return 0.0
    v_peak = sqrt(a * distance + (v_in * v_in + v_out * v_out) / 2.0)
    if v_peak <= vmax:
        return (2.0 * v_peak - v_in - v_out) / a
    t_ramp = (vmax - v_in) / a + (vmax - v_out) / a
    d_ramp = (vmax * vmax - v_in * v_in + vmax * vmax - v_out * v_out) / (2.0 * a)
    return t_ramp + (distance - d_ramp) / vmax


def run_time(cells, params=DEFAULT_PARAMS):
    """Rest-to-rest time for a straight run of `cells` grid cells."""
    return segment_time(cells * CELL_PITCH, 0.0, 0.0, params)


def time_at_distance(x, distance, params=DEFAULT_PARAMS):
    """Time at which a rest-to-rest profile over `distance` reaches position x."""
    a, vmax = params.accel, params.vmax
    if not 0 <= x <= distance:
        raise ValueError("x outside [0, distance]")
    v_peak = min(sqrt(a * distance), vmax)
    d_acc = v_peak * v_peak / (2.0 * a)
    if x <= d_acc:
        return sqrt(2.0 * x / a)
    t_acc = v_peak / a
    d_cruise_end = distance - d_acc
    if x <= d_cruise_end:
        return t_acc + (x - d_acc) / v_peak
    # deceleration phase: remaining distance r travelled from speed v_peak to 0
    r = distance - x
    return t_acc + (d_cruise_end - d_acc) / v_peak + (v_peak - sqrt(2.0 * a * r)) / a


def run_cell_crossings(cells, params=DEFAULT_PARAMS):
    """Boundary-crossing times of a rest-to-rest run over `cells` cells.

    Returns a list of `cells` times; entry j is when the robot center crosses
    from cell j to cell j+1 (distance (j + 0.5) * pitch from the start cell
    center). The run's total time is run_time(cells).
    """
    d = cells * CELL_PITCH
    return [time_at_distance((j + 0.5) * CELL_PITCH, d, params) for j in range(cells)]
