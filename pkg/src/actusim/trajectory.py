"""Reference signals in tendon-length space: steps, staircases, and
rest-to-rest smooth segments whose first four derivatives vanish at both
ends (minimal 9th-order polynomial), plus time-composition of segments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ReferenceSignal:
    """A setpoint trajectory; evaluate() holds boundary values outside its span."""

    start_time: float = 0.0

    def evaluate(self, t: float) -> tuple[float, float]:
        """(position [mm], velocity [mm/s]) at time t >= 0."""
        raise NotImplementedError

    def validate(self) -> None:
        pass


def _profile_core(tau: float) -> float:
    return tau**5 * (126.0 + tau * (-420.0 + tau * (540.0 + tau * (-315.0 + tau * 70.0))))


def smooth_profile(tau: float) -> float:
    """Normalized rest-to-rest profile s(tau) on [0, 1].

    s = 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9; derivatives 1-4
    are zero at both ends, s(1/2) = 1/2 exactly. The polynomial is odd
    about the midpoint, so the upper half evaluates as 1 - s(1 - tau);
    the direct Horner form loses ~1e-14 to cancellation near tau = 1.
    """
    if tau <= 0.0:
        return 0.0
    if tau >= 1.0:
        return 1.0
    if tau <= 0.5:
        return _profile_core(tau)
    return 1.0 - _profile_core(1.0 - tau)


def smooth_profile_rate(tau: float) -> float:
    """ds/dtau = 630 tau^4 (1 - tau)^4; peaks at 315/128 at the midpoint."""
    if tau <= 0.0 or tau >= 1.0:
        return 0.0
    u = tau * (1.0 - tau)
    return 630.0 * u**4


@dataclass(frozen=True)
class Step(ReferenceSignal):
    height_mm: float
    at: float = 0.0  # [s]

    @property
    def start_time(self) -> float:
        return self.at

    def evaluate(self, t: float) -> tuple[float, float]:
        return (self.height_mm if t >= self.at else 0.0), 0.0


@dataclass(frozen=True)
class Staircase(ReferenceSignal):
    levels: tuple[float, ...]
    dwell: float  # [s] per level

    def validate(self) -> None:
        if self.dwell <= 0:
            raise ValueError(f"staircase dwell must be > 0, got {self.dwell}")
        if not self.levels:
            raise ValueError("staircase needs at least one level")

    def evaluate(self, t: float) -> tuple[float, float]:
        index = min(int(t / self.dwell), len(self.levels) - 1) if t > 0 else 0
        return self.levels[index], 0.0


@dataclass(frozen=True)
class Smooth(ReferenceSignal):
    """One rest-to-rest leg from start_mm to end_mm over [t0, t0+duration]."""

    start_mm: float
    end_mm: float
    t0: float = 0.0
    duration: float = 1.0

    @property
    def start_time(self) -> float:
        return self.t0

    def validate(self) -> None:
        if self.duration <= 0:
            raise ValueError(f"smooth duration must be > 0, got {self.duration}")

    def evaluate(self, t: float) -> tuple[float, float]:
        tau = (t - self.t0) / self.duration
        span = self.end_mm - self.start_mm
        position = self.start_mm + span * smooth_profile(tau)
        velocity = span * smooth_profile_rate(tau) / self.duration
        return position, velocity


@dataclass(frozen=True)
class Composite(ReferenceSignal):
    """Plays the part with the latest start_time <= t; parts hold their
    boundary values, so the composite is defined and left-continuous for
    all t >= 0."""

    parts: tuple[ReferenceSignal, ...]

    def validate(self) -> None:
        if not self.parts:
            raise ValueError("composite needs at least one part")
        starts = [p.start_time for p in self.parts]
        if starts != sorted(starts):
            raise ValueError("composite parts must be ordered by start time")
        for part in self.parts:
            part.validate()

    def evaluate(self, t: float) -> tuple[float, float]:
        active = self.parts[0]
        for part in self.parts:
            if part.start_time <= t:
                active = part
            else:
                break
        return active.evaluate(t)


def smooth_path(
    waypoints_mm: list[float], leg_duration: float, t0: float = 0.0
) -> Composite:
    """Chain of rest-to-rest legs visiting the waypoints back to back."""
    if len(waypoints_mm) < 2:
        raise ValueError("smooth path needs at least two waypoints")
    parts = []
    t = t0
    for a, b in zip(waypoints_mm, waypoints_mm[1:]):
        parts.append(Smooth(start_mm=a, end_mm=b, t0=t, duration=leg_duration))
        t += leg_duration
    return Composite(parts=tuple(parts))


def evaluate(ref: ReferenceSignal, t: float) -> tuple[float, float]:
    if t < 0 or not math.isfinite(t):
        raise ValueError(f"t must be finite and >= 0, got {t}")
    return ref.evaluate(t)
