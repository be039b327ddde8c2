"""High-level position controllers operating in tendon millimetres at the
high-level rate and emitting current commands in amperes.

Four kinds: P, PD, PID, and PD-g (a PD with a constant feedforward current
that cancels a known gravity load). The derivative acts on the filtered
velocity error to survive encoder quantization; the integral term is
clamped for anti-windup.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .actuator import ActuatorParams, Measurement, tendon_from_counts


class ControllerKind(str, Enum):
    P = "p"
    PD = "pd"
    PID = "pid"
    PDG = "pdg"


@dataclass(frozen=True)
class GainSet:
    kp: float = 0.0                        # [A/mm]
    ki: float = 0.0                        # [A/(mm*s)]
    kd: float = 0.0                        # [A*s/mm]
    feedforward_current: float = 0.0       # [A], the g(theta) term
    derivative_filter_alpha: float = 0.5   # EMA weight on the new velocity error

    def validate(self) -> None:
        for name in ("kp", "ki", "kd"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")
        if not (0.0 <= self.derivative_filter_alpha <= 1.0):
            raise ValueError(
                f"derivative_filter_alpha must be in [0, 1], got {self.derivative_filter_alpha}"
            )
        if not math.isfinite(self.feedforward_current):
            raise ValueError("feedforward_current must be finite")


@dataclass(frozen=True)
class ControllerSpec:
    kind: ControllerKind
    gains: GainSet
    integrator_limit: float = 6.0  # [A] clamp on the integral term

    def validate(self) -> None:
        self.gains.validate()
        if self.kind == ControllerKind.PDG and self.gains.feedforward_current == 0.0:
            raise ValueError("PD-g controller requires a feedforward current")
        if self.effective_ki > 0 and self.integrator_limit <= 0:
            raise ValueError("integrator_limit must be > 0 when ki > 0")

    @property
    def effective_ki(self) -> float:
        return self.gains.ki if self.kind == ControllerKind.PID else 0.0

    @property
    def effective_kd(self) -> float:
        if self.kind == ControllerKind.P:
            return 0.0
        return self.gains.kd

    @property
    def effective_feedforward(self) -> float:
        return self.gains.feedforward_current if self.kind == ControllerKind.PDG else 0.0


class PositionController:
    """Controller memory for one scenario run (integral state, filter state)."""

    def __init__(self, spec: ControllerSpec, params: ActuatorParams):
        spec.validate()
        self.spec = spec
        self.params = params
        self.integral = 0.0         # integral TERM [A], clamped
        self.derivative = 0.0       # filtered velocity error [mm/s]
        self.saturated = False      # last command hit the current limit

    def step(
        self,
        setpoint_mm: float,
        setpoint_velocity_mm_s: float,
        measurement: Measurement,
        dt: float,
    ) -> float:
        """One control update; returns the commanded current [A]."""
        spec = self.spec
        gains = spec.gains
        position = tendon_from_counts(measurement.encoder_count, self.params)
        velocity = measurement.velocity_estimate * self.params.mm_per_count
        error = setpoint_mm - position
        error_rate = setpoint_velocity_mm_s - velocity
        alpha = gains.derivative_filter_alpha
        self.derivative = alpha * error_rate + (1.0 - alpha) * self.derivative

        ki = spec.effective_ki
        if ki > 0.0:
            limit = spec.integrator_limit
            self.integral = _clamp(self.integral + ki * error * dt, limit)

        command = (
            gains.kp * error
            + self.integral
            + spec.effective_kd * self.derivative
            + spec.effective_feedforward
        )
        clamped = _clamp(command, self.params.current_limit)
        self.saturated = clamped != command
        return clamped


def control_step(
    spec: ControllerSpec,
    setpoint_mm: float,
    setpoint_velocity_mm_s: float,
    measurement: Measurement,
    dt: float,
    state: PositionController,
) -> float:
    """Functional wrapper over the controller memory held in `state`."""
    assert state.spec is spec or state.spec == spec
    return state.step(setpoint_mm, setpoint_velocity_mm_s, measurement, dt)


def steady_state_error_pd(
    mass: float, gains: GainSet, params: ActuatorParams
) -> float:
    """Closed-form steady-state error [mm] of a plain PD under a hanging mass.

    At rest the proportional term alone must supply the holding current:
    e_ss = m*g*r / (N*kt*kp). The simulated PD approaches this within the
    friction-induced deadband.
    """
    if gains.kp <= 0:
        raise ValueError("steady-state error prediction requires kp > 0")
    if gains.ki != 0:
        raise ValueError("prediction applies to PD (ki = 0) only")
    from .loads import GRAVITY

    holding = mass * GRAVITY * params.drum_radius / (params.gear_ratio * params.kt)
    return holding / gains.kp


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))
