"""Random-waypoint motion stored as piecewise-linear traces.

Traces are generated once per run and queried lazily at transmission times,
which is exact for straight-line legs and keeps the event queue free of
per-step movement events.
"""

from bisect import bisect_right
from dataclasses import dataclass

from .core import RngStream, SimTime, us
from .errors import OutOfTraceRange
from .geometry import Position, dist


@dataclass(frozen=True)
class Leg:
    """One straight movement followed by an optional pause at its endpoint."""

    depart_at: SimTime
    start: Position
    end: Position
    speed: float        # m/s, > 0
    arrive_at: SimTime
    pause_after: SimTime  # microseconds spent at `end` before the next leg


class WaypointTrace:
    """Time-contiguous legs covering [0, duration] for one node."""

    def __init__(self, node: int, duration: SimTime, legs: list[Leg]):
        self.node = node
        self.duration = duration
        self.legs = legs
        self._departs = [leg.depart_at for leg in legs]

    def __eq__(self, other):
        return (isinstance(other, WaypointTrace)
                and self.node == other.node
                and self.duration == other.duration
                and self.legs == other.legs)


def random_waypoint_trace(area_width: float, area_height: float, speed: float,
                          pause_s: float, duration_s: float,
                          rng: RngStream, node: int = 0) -> WaypointTrace:
    """Build a trace: uniform waypoints, fixed speed, fixed pause at each stop.

    The node starts paused at a uniform initial position, then repeatedly
    travels to a fresh uniform waypoint at `speed`, pausing `pause_s` seconds
    on arrival, until the trace covers the full duration.
    """
    if area_width <= 0 or area_height <= 0:
        raise ValueError("area dimensions must be positive")
    if duration_s <= 0:
        raise ValueError("duration must be positive")
    if speed <= 0:
        raise ValueError("speed must be positive")
    duration = us(duration_s)
    pause = us(pause_s)
    legs: list[Leg] = []
    here = Position(rng.uniform(0.0, area_width), rng.uniform(0.0, area_height))
    t: SimTime = 0
    if pause > 0:  # initial rest at the starting position
        legs.append(Leg(t, here, here, speed, t, pause))
        t += pause
    while t < duration:
        target = Position(rng.uniform(0.0, area_width), rng.uniform(0.0, area_height))
        travel = us(dist(here, target) / speed)
        legs.append(Leg(t, here, target, speed, t + travel, pause))
        t += travel + pause
        here = target
    if not legs:  # duration shorter than the initial pause resolution
        legs.append(Leg(0, here, here, speed, 0, duration))
    return WaypointTrace(node, duration, legs)


def position_at(trace: WaypointTrace, t: SimTime) -> Position:
    """Position along the trace: linear on a leg, the endpoint during pauses."""
    if t < 0 or t > trace.duration:
        raise OutOfTraceRange(f"t={t} outside [0, {trace.duration}]")
    idx = bisect_right(trace._departs, t) - 1
    if idx < 0:
        idx = 0
    leg = trace.legs[idx]
    if t >= leg.arrive_at:
        return leg.end
    frac = (t - leg.depart_at) / (leg.arrive_at - leg.depart_at)
    return Position(leg.start.x + frac * (leg.end.x - leg.start.x),
                    leg.start.y + frac * (leg.end.y - leg.start.y))
