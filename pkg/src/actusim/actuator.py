"""Plant model of one actuation module.

A brushless motor with sinusoidal cogging ripple, viscous plus Coulomb
friction, a 4:1 gear stage, an incremental optical encoder on the motor
shaft, and a drum winch that converts motor angle into pulled tendon
length.  The torque path is transparent: external joint torque divided by
the gear ratio appears directly at the motor shaft, which is what makes
current-based load sensing possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

TWO_PI = 2.0 * math.pi

# Velocity scale of the smoothed Coulomb friction, rad/s. Below this the
# friction torque ramps linearly through zero instead of switching sign.
OMEGA_EPS = 1e-3


@dataclass(frozen=True)
class ActuatorParams:
    """Motor, transmission, encoder, and winch constants.

    kt is calibrated so that 1 kg hanging on the tendon is held by
    exactly 1.0 A: kt = m*g*r/N per kg. The theoretical constant of a
    KV300 motor (~0.0318 N*m/A) is deliberately not used.
    """

    kt: float = 0.022071            # torque constant [N*m/A]
    inertia: float = 1e-5           # rotor+gear inertia at motor shaft [kg*m^2]
    viscous: float = 1e-5           # viscous friction [N*m*s/rad]
    tau_coulomb: float = 5e-4       # Coulomb friction magnitude [N*m]
    cog_amplitude: float = 2e-4     # cogging ripple amplitude [N*m]
    pole_pairs: int = 12            # cogging spatial frequency [per motor rev]
    gear_ratio: float = 4.0         # motor:joint reduction N
    drum_radius: float = 0.009      # winch drum radius r [m]
    encoder_cpr: int = 5000         # encoder counts per motor revolution
    current_limit: float = 6.0      # winding current clamp [A]
    current_loop_tau: float = 5e-4  # first-order current tracking constant [s]

    def validate(self) -> None:
        positive = {
            "kt": self.kt,
            "inertia": self.inertia,
            "gear_ratio": self.gear_ratio,
            "drum_radius": self.drum_radius,
            "encoder_cpr": self.encoder_cpr,
            "current_limit": self.current_limit,
        }
        for name, value in positive.items():
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be finite and > 0, got {value}")
        nonneg = {
            "viscous": self.viscous,
            "tau_coulomb": self.tau_coulomb,
            "cog_amplitude": self.cog_amplitude,
            "current_loop_tau": self.current_loop_tau,
        }
        for name, value in nonneg.items():
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @property
    def mm_per_count(self) -> float:
        """Tendon millimetres pulled per encoder count."""
        return TWO_PI / self.encoder_cpr * self.drum_radius / self.gear_ratio * 1000.0

    @property
    def mm_per_rad(self) -> float:
        """Tendon millimetres pulled per radian of motor angle."""
        return self.drum_radius / self.gear_ratio * 1000.0


@dataclass(frozen=True)
class PlantState:
    """Continuous plant truth plus the quantized encoder view of it."""

    theta: float = 0.0          # motor shaft angle [rad]
    omega: float = 0.0          # motor shaft velocity [rad/s]
    current: float = 0.0        # actual winding current [A]
    encoder_count: int = 0      # floor(theta / 2pi * cpr)
    time: float = 0.0           # [s]


@dataclass(frozen=True)
class JointView:
    """Output-side kinematics derived from the motor state."""

    joint_angle: float          # [rad], theta / N
    joint_velocity: float       # [rad/s]
    tendon_length: float        # [mm], pulled length positive
    tendon_velocity: float      # [mm/s]


@dataclass(frozen=True)
class Measurement:
    """What the sensors report at one high-level tick."""

    encoder_count: int
    velocity_estimate: float    # [counts/s], differenced + moving average
    sensed_current: float       # [A], true current + sensing noise


def quantize_encoder(theta: float, params: ActuatorParams) -> int:
    """Edge-counting code wheel: floor quantization of the motor angle."""
    return math.floor(theta / TWO_PI * params.encoder_cpr)


def joint_view(theta: float, omega: float, params: ActuatorParams) -> JointView:
    scale = params.mm_per_rad
    return JointView(
        joint_angle=theta / params.gear_ratio,
        joint_velocity=omega / params.gear_ratio,
        tendon_length=theta * scale,
        tendon_velocity=omega * scale,
    )


def torque_balance(
    state: PlantState,
    current: float,
    external_joint_torque: float,
    params: ActuatorParams,
) -> float:
    """Angular acceleration [rad/s^2] from the instantaneous torque balance.

    Motor torque kt*i, viscous and tanh-smoothed Coulomb friction, cogging
    ripple sin(pole_pairs*theta), and the external joint torque reflected
    through the gear ratio.
    """
    torque = (
        params.kt * current
        - params.viscous * state.omega
        - params.tau_coulomb * math.tanh(state.omega / OMEGA_EPS)
        - params.cog_amplitude * math.sin(params.pole_pairs * state.theta)
        + external_joint_torque / params.gear_ratio
    )
    return torque / params.inertia


def current_loop(
    command: float, state: PlantState, params: ActuatorParams, dt: float
) -> float:
    """Winding current after one low-level step of the abstracted FOC loop.

    First-order tracking of the clamped command; exact exponential update
    so the 63.2% point lands on current_loop_tau. tau = 0 tracks instantly.
    """
    target = _clamp(command, params.current_limit)
    if params.current_loop_tau <= 0.0:
        return target
    return target + (state.current - target) * math.exp(-dt / params.current_loop_tau)


def step_physics(
    state: PlantState,
    command_current: float,
    load_torque: float,
    params: ActuatorParams,
    dt: float,
) -> PlantState:
    """One semi-implicit Euler step of the plant at dt.

    Current relaxes first, then the velocity update uses the new current,
    then the position update uses the new velocity (symplectic ordering).
    The Coulomb term is momentum-limited: within one step friction may
    stop the rotor but never reverse it, so a freely spinning rotor decays
    to rest without the sign-chatter an explicit step would produce.
    """
    if dt <= 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    current = current_loop(command_current, state, params, dt)
    conservative = (
        params.kt * current
        - params.viscous * state.omega
        - params.cog_amplitude * math.sin(params.pole_pairs * state.theta)
        + load_torque / params.gear_ratio
    ) / params.inertia
    omega = state.omega + conservative * dt
    friction = params.tau_coulomb * math.tanh(omega / OMEGA_EPS) * dt / params.inertia
    if abs(friction) >= abs(omega):
        omega = 0.0
    else:
        omega -= friction
    theta = state.theta + omega * dt
    return PlantState(
        theta=theta,
        omega=omega,
        current=current,
        encoder_count=quantize_encoder(theta, params),
        time=state.time + dt,
    )


def counts_from_tendon(delta_mm: float, params: ActuatorParams) -> int:
    """Encoder counts equivalent to a tendon displacement (1 mm ~ 354)."""
    motor_rad = delta_mm / 1000.0 / params.drum_radius * params.gear_ratio
    return round(motor_rad / TWO_PI * params.encoder_cpr)


def tendon_from_counts(counts: float, params: ActuatorParams) -> float:
    """Tendon millimetres for an encoder count (inverse of counts_from_tendon)."""
    return counts * params.mm_per_count


def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))


class SensorModel:
    """Low-level-side sensing: exact counts, differenced velocity, noisy current.

    The velocity estimate is the backward difference of counts over the
    high-level period smoothed by a moving average of window samples. The
    average of backward differences telescopes, so it is computed exactly
    from integer counts at the window ends.
    """

    def __init__(self, params: ActuatorParams, current_sigma: float, rng, window: int = 16):
        self.params = params
        self.current_sigma = current_sigma
        self.rng = rng
        self.window = window
        self._counts: list[int] = []

    def sample(self, state: PlantState, dt_high: float) -> Measurement:
        count = state.encoder_count
        history = self._counts
        if history:
            span = min(len(history), self.window)
            velocity = (count - history[-span]) / (span * dt_high)
        else:
            velocity = 0.0
        history.append(count)
        if len(history) > self.window:
            del history[0]
        sensed = state.current
        if self.current_sigma > 0.0:
            sensed += self.current_sigma * float(self.rng.standard_normal())
        return Measurement(
            encoder_count=count,
            velocity_estimate=velocity,
            sensed_current=sensed,
        )
