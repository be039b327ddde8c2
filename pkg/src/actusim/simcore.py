"""Deterministic fixed-step two-rate simulation engine.

The physics advances at dt_low (10 kHz by default); the position controller
runs every rate_ratio-th step (1 kHz) and talks to the plant through the
frame codec and a fixed-latency transport, mirroring the microcontroller /
realtime-PC split. All randomness flows from one seeded counter-based
generator with per-channel substreams, and noise touches only measurements,
never the true state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .actuator import ActuatorParams, Measurement, PlantState, SensorModel
from .bus import (
    FLAG_ENABLE,
    VELOCITY_SCALE,
    CommandFrame,
    StatusFrame,
    TransportQueue,
    clamp_i16,
    decode_command,
    decode_status,
    encode_command,
    encode_status,
)
from .control import ControllerSpec, PositionController
from .loads import LoadModel, torque_closure
from .record import RunMeta, RunRecord
from .trajectory import ReferenceSignal

# RNG substream channel ids; adding a channel must not perturb the others.
CHANNEL_CURRENT_SENSE = 0
CHANNEL_TORQUE_DISTURBANCE = 1

VELOCITY_WINDOW = 16  # moving-average length of the velocity estimator


class SimulationDiverged(RuntimeError):
    """Plant state became non-finite; usually an unstable gain set."""


@dataclass(frozen=True)
class NoiseConfig:
    current_sense_sigma: float = 0.05       # [A] on the sensed current
    torque_disturbance_sigma: float = 0.0   # [N*m] on the joint torque

    def validate(self) -> None:
        for name in ("current_sense_sigma", "torque_disturbance_sigma"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")


@dataclass(frozen=True)
class SimConfig:
    duration: float                 # [s]
    dt_low: float = 1e-4            # physics / low-level step [s]
    rate_ratio: int = 10            # low-level ticks per high-level tick
    seed: int = 0
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    latency_ticks: int = 1          # command latency in high-level ticks

    def validate(self) -> None:
        if not (math.isfinite(self.dt_low) and self.dt_low > 0):
            raise ValueError(f"dt_low must be finite and > 0, got {self.dt_low}")
        if self.rate_ratio < 1:
            raise ValueError(f"rate_ratio must be >= 1, got {self.rate_ratio}")
        if not (math.isfinite(self.duration) and self.duration >= 0):
            raise ValueError(f"duration must be finite and >= 0, got {self.duration}")
        if self.latency_ticks < 0:
            raise ValueError(f"latency_ticks must be >= 0, got {self.latency_ticks}")
        self.noise.validate()

    @property
    def dt_high(self) -> float:
        return self.dt_low * self.rate_ratio

    @property
    def n_low_steps(self) -> int:
        return round(self.duration / self.dt_low)


def substream(seed: int, channel: int) -> np.random.Generator:
    """Independent generator derived from (seed, channel-id)."""
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, channel], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def run_scenario(
    config: SimConfig,
    plant: ActuatorParams,
    load: LoadModel,
    controller: ControllerSpec,
    reference: ReferenceSignal,
    scenario: str = "",
    config_hash: str = "",
    module_id: int = 1,
) -> RunRecord:
    """Run one closed-loop scenario; returns a log with one row per high tick.

    Bitwise deterministic for fixed inputs and seed. Raises
    SimulationDiverged if the plant state becomes non-finite.
    """
    config.validate()
    plant.validate()
    load.validate()
    controller.validate()
    reference.validate()

    dt = config.dt_low
    ratio = config.rate_ratio
    dt_high = config.dt_high
    n_low = config.n_low_steps
    n_high = -(-n_low // ratio) if n_low else 0

    sensor = SensorModel(
        plant,
        config.noise.current_sense_sigma,
        substream(config.seed, CHANNEL_CURRENT_SENSE),
        window=VELOCITY_WINDOW,
    )
    ctrl = PositionController(controller, plant)
    queue = TransportQueue(config.latency_ticks)
    load_torque = torque_closure(load, plant)

    disturbance = None
    if config.noise.torque_disturbance_sigma > 0.0:
        gen = substream(config.seed, CHANNEL_TORQUE_DISTURBANCE)
        disturbance = config.noise.torque_disturbance_sigma * gen.standard_normal(n_low)

    # Hoisted plant constants for the inner loop.
    kt = plant.kt
    inertia = plant.inertia
    viscous = plant.viscous
    cog = plant.cog_amplitude
    pole_pairs = plant.pole_pairs
    gear = plant.gear_ratio
    ilim = plant.current_limit
    cpr = plant.encoder_cpr
    mm_per_count = plant.mm_per_count
    two_pi = 2.0 * math.pi
    omega_eps_inv = 1.0 / 1e-3
    fric_scale = plant.tau_coulomb * dt / inertia
    if plant.current_loop_tau > 0.0:
        current_relax = 1.0 - math.exp(-dt / plant.current_loop_tau)
    else:
        current_relax = 1.0
    tanh = math.tanh
    sin = math.sin
    floor = math.floor

    theta = 0.0
    omega = 0.0
    current = 0.0
    effective_a = 0.0  # command in effect at the plant [A]

    cols: dict[str, list] = {
        "t": [], "setpoint_mm": [], "setpoint_vel_mm_s": [], "position_mm": [],
        "velocity_mm_s": [], "true_current_A": [], "sensed_current_A": [],
        "command_current_A": [], "load_torque_Nm": [], "encoder_count": [],
    }

    for k in range(n_high):
        t = k * dt_high
        count = floor(theta / two_pi * cpr)
        raw = sensor.sample(
            PlantState(theta, omega, current, count, t), dt_high
        )
        status = StatusFrame(
            module_id=module_id,
            sequence=k & 0xFFFF,
            position_counts=count,
            velocity_fixed=clamp_i16(raw.velocity_estimate / 1000.0 * VELOCITY_SCALE),
            current_ma=clamp_i16(raw.sensed_current * 1000.0),
        )
        decoded = decode_status(*encode_status(status))
        measurement = Measurement(
            encoder_count=decoded.position_counts,
            velocity_estimate=decoded.velocity_fixed / VELOCITY_SCALE * 1000.0,
            sensed_current=decoded.current_ma / 1000.0,
        )

        setpoint, setpoint_vel = reference.evaluate(t)
        command_a = ctrl.step(setpoint, setpoint_vel, measurement, dt_high)
        wire = encode_command(
            CommandFrame(module_id, k & 0xFFFF, round(command_a * 1000.0), FLAG_ENABLE)
        )
        queue.push(wire, k)
        for payload in queue.pop(k):
            effective_a = decode_command(payload).current_setpoint_ma / 1000.0

        cols["t"].append(t)
        cols["setpoint_mm"].append(setpoint)
        cols["setpoint_vel_mm_s"].append(setpoint_vel)
        cols["position_mm"].append(decoded.position_counts * mm_per_count)
        cols["velocity_mm_s"].append(measurement.velocity_estimate * mm_per_count)
        cols["true_current_A"].append(current)
        cols["sensed_current_A"].append(measurement.sensed_current)
        cols["command_current_A"].append(command_a)
        cols["load_torque_Nm"].append(load_torque(theta, omega, t))
        cols["encoder_count"].append(count)

        target = max(-ilim, min(ilim, effective_a))
        base = k * ratio
        for j in range(min(ratio, n_low - base)):
            t_low = t + j * dt
            external = load_torque(theta, omega, t_low)
            if disturbance is not None:
                external += disturbance[base + j]
            current += (target - current) * current_relax
            accel = (
                kt * current
                - viscous * omega
                - cog * sin(pole_pairs * theta)
                + external / gear
            ) / inertia
            omega += accel * dt
            friction = fric_scale * tanh(omega * omega_eps_inv)
            if abs(friction) >= abs(omega):
                omega = 0.0
            else:
                omega -= friction
            theta += omega * dt

        if not math.isfinite(theta + omega + current):
            raise SimulationDiverged(
                f"plant state non-finite at t={t:.4f} s "
                f"(theta={theta}, omega={omega}, current={current}); "
                "this usually means an unstable gain set"
            )

    meta = RunMeta(
        scenario=scenario,
        seed=config.seed,
        config_hash=config_hash,
        code_version=__version__,
        dt_low=dt,
        rate_ratio=ratio,
        n_low_steps=n_low,
        n_high_ticks=n_high,
    )
    arrays = {
        name: np.array(values, dtype=np.int64 if name == "encoder_count" else float)
        for name, values in cols.items()
    }
    return RunRecord(meta=meta, **arrays)
