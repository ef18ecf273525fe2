"""Node geometry: piecewise-linear 3D trajectories, distance, radial speed, Doppler."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linkbudget import PHYS


class TrajectoryError(ValueError):
    pass


@dataclass(frozen=True)
class Trajectory:
    """Waypoints ``(t_seconds, (x, y, z) metres)``, linearly interpolated.

    Positions are held constant before the first and after the last waypoint.
    """

    waypoints: tuple

    def __post_init__(self):
        if len(self.waypoints) == 0:
            raise TrajectoryError("trajectory needs at least one waypoint")
        times = [float(t) for t, _ in self.waypoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise TrajectoryError("waypoint times must be strictly increasing")
        for _, p in self.waypoints:
            if len(p) != 3:
                raise TrajectoryError(f"waypoint position must have 3 coordinates, got {p!r}")
        object.__setattr__(self, "_t", np.array(times))
        object.__setattr__(self, "_p", np.array([p for _, p in self.waypoints], dtype=float))

    @classmethod
    def fixed(cls, position: Sequence[float]) -> "Trajectory":
        return cls(((0.0, tuple(position)),))

    @property
    def times(self) -> np.ndarray:
        return self._t

    def position(self, t: float) -> np.ndarray:
        if len(self._t) == 1 or t <= self._t[0]:
            return self._p[0].copy()
        if t >= self._t[-1]:
            return self._p[-1].copy()
        i = int(np.searchsorted(self._t, t, side="right")) - 1
        frac = (t - self._t[i]) / (self._t[i + 1] - self._t[i])
        return self._p[i] + frac * (self._p[i + 1] - self._p[i])

    def velocity(self, t: float) -> np.ndarray:
        # Right-continuous; zero outside the span.
        if len(self._t) == 1 or t < self._t[0] or t >= self._t[-1]:
            return np.zeros(3)
        i = int(np.searchsorted(self._t, t, side="right")) - 1
        return (self._p[i + 1] - self._p[i]) / (self._t[i + 1] - self._t[i])


@dataclass(frozen=True)
class NodeKinematics:
    node_id: str
    trajectory: Trajectory
    clock_offset: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.clock_offset):
            raise TrajectoryError(f"clock_offset of {self.node_id} must be finite")


def position_at(node: NodeKinematics, t: float) -> np.ndarray:
    return node.trajectory.position(t)


def distance_m(a: NodeKinematics, b: NodeKinematics, t: float) -> float:
    return float(np.linalg.norm(position_at(a, t) - position_at(b, t)))


def radial_speed_mps(a: NodeKinematics, b: NodeKinematics, t: float) -> float:
    """Rate of change of the a-b distance; positive when the nodes recede."""
    los = position_at(b, t) - position_at(a, t)
    d = float(np.linalg.norm(los))
    if d == 0.0:
        return 0.0
    rel_v = b.trajectory.velocity(t) - a.trajectory.velocity(t)
    return float(np.dot(rel_v, los) / d)


def doppler_shift_hz(v: float, carrier_freq: float) -> float:
    """One-way Doppler shift magnitude; v in m/s, carrier_freq in Hz."""
    return abs(v) / PHYS.c * carrier_freq


def max_speed_for_scs(scs: float, tolerable_fraction: float, carrier_freq: float) -> float:
    """Largest relative speed whose Doppler shift stays within a fraction of the SCS."""
    if not 0 < tolerable_fraction <= 1:
        raise ValueError(f"tolerable_fraction must be in (0, 1], got {tolerable_fraction}")
    return tolerable_fraction * scs * PHYS.c / carrier_freq


def doppler_ok(v: float, carrier_freq: float, scs: float, tolerable_fraction: float = 0.1) -> bool:
    return doppler_shift_hz(v, carrier_freq) <= tolerable_fraction * scs


def max_pairwise_distance(nodes: Sequence[NodeKinematics]) -> float:
    """Exact maximum pairwise distance over all time.

    Between consecutive breakpoints of two piecewise-linear trajectories the
    distance is convex in t, so the maximum sits on a breakpoint.
    """
    best = 0.0
    for i, a in enumerate(nodes):
        for b in nodes[i + 1:]:
            times = np.union1d(a.trajectory.times, b.trajectory.times)
            for t in times:
                best = max(best, distance_m(a, b, float(t)))
    return best
