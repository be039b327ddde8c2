"""External load models: tendon tension or joint torque as a function of state.

Gravity weights hang from the tendon via a pulley, so their tension is
displacement-invariant. The flexible beam acts as a linear spring in the
pulled tendon length, derived from constant-curvature bending energy.
Pulse schedules inject joint torque directly (disturbance experiments).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .actuator import ActuatorParams, JointView

GRAVITY = 9.81  # [m/s^2]


class LoadModel:
    """Base class; concrete loads override tension() and/or joint_torque()."""

    def tension(self, joint: JointView, t: float) -> float:
        """Tendon tension [N] at the given joint state and time."""
        raise NotImplementedError

    def joint_torque(self, joint: JointView, t: float, params: ActuatorParams) -> float:
        """Joint torque [N*m]; tension loads oppose the tendon pull."""
        return -self.tension(joint, t) * params.drum_radius

    def validate(self) -> None:
        pass


@dataclass(frozen=True)
class NullLoad(LoadModel):
    """Free output shaft."""

    def tension(self, joint: JointView, t: float) -> float:
        return 0.0


@dataclass(frozen=True)
class GravityLoad(LoadModel):
    """Hanging weight redirected by a pulley: tension = m*g at any displacement."""

    mass: float  # [kg]

    def validate(self) -> None:
        if not (math.isfinite(self.mass) and self.mass >= 0):
            raise ValueError(f"mass must be finite and >= 0, got {self.mass}")

    def tension(self, joint: JointView, t: float) -> float:
        return self.mass * GRAVITY

    def feedforward_current(self, params: ActuatorParams) -> float:
        """Constant current that exactly holds the weight at rest."""
        return self.mass * GRAVITY * params.drum_radius / (params.gear_ratio * params.kt)


@dataclass(frozen=True)
class BeamLoad(LoadModel):
    """Flexible flat-beam backbone bent by the tendon.

    Constant-curvature bending: pulled length dl = kappa*d*L, stored energy
    E = EI*L*kappa^2/2, so tension dE/ddl = EI/(d^2*L) * dl. A slack tendon
    (dl < 0) transmits nothing.
    """

    flexural_rigidity: float = 0.008   # EI [N*m^2]
    routing_offset: float = 0.02       # tendon distance from backbone d [m]
    length: float = 0.285              # beam length L [m]

    def validate(self) -> None:
        for name in ("flexural_rigidity", "routing_offset", "length"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")

    @property
    def stiffness(self) -> float:
        """Spring constant [N/m] in pulled tendon length."""
        return self.flexural_rigidity / (self.routing_offset**2 * self.length)

    def tension(self, joint: JointView, t: float) -> float:
        pulled_m = joint.tendon_length / 1000.0
        if pulled_m <= 0.0:
            return 0.0
        return self.stiffness * pulled_m


@dataclass(frozen=True)
class PulseLoad(LoadModel):
    """Scheduled joint-torque pulses (start [s], duration [s], torque [N*m])."""

    schedule: tuple[tuple[float, float, float], ...] = field(default_factory=tuple)

    def validate(self) -> None:
        starts = [s for s, _, _ in self.schedule]
        if starts != sorted(starts):
            raise ValueError("pulse schedule must be sorted by start time")
        for start, duration, _ in self.schedule:
            if duration <= 0:
                raise ValueError(f"pulse duration must be > 0, got {duration}")

    def tension(self, joint: JointView, t: float) -> float:
        return 0.0

    def joint_torque(self, joint: JointView, t: float, params: ActuatorParams) -> float:
        total = 0.0
        for start, duration, torque in self.schedule:
            if start <= t < start + duration:
                total += torque
        return total


def torque_closure(load: LoadModel, params: ActuatorParams):
    """Fast (theta, omega, t) -> joint torque closure for the physics loop.

    Avoids per-step JointView construction for the common load shapes; the
    generic fallback goes through the public joint_torque contract.
    """
    if isinstance(load, NullLoad):
        return lambda theta, omega, t: 0.0
    if isinstance(load, GravityLoad):
        torque = -load.mass * GRAVITY * params.drum_radius
        return lambda theta, omega, t: torque
    if isinstance(load, BeamLoad):
        factor = -load.stiffness * params.drum_radius
        meters_per_rad = params.drum_radius / params.gear_ratio
        def beam(theta, omega, t):
            pulled = theta * meters_per_rad
            return factor * pulled if pulled > 0.0 else 0.0
        return beam
    if isinstance(load, PulseLoad):
        schedule = load.schedule
        def pulses(theta, omega, t):
            total = 0.0
            for start, duration, torque in schedule:
                if start <= t < start + duration:
                    total += torque
            return total
        return pulses

    from .actuator import joint_view

    return lambda theta, omega, t: load.joint_torque(joint_view(theta, omega, params), t, params)
