"""Closed-loop Ziegler-Nichols tuning on the simulated plant.

Sweeps the proportional gain upward on a geometric grid, running a step
response per candidate, until the position exhibits a sustained oscillation:
the last eight response peaks have near-unity amplitude decay, regular
spacing, and macroscopic amplitude. Responses that grow past the amplitude
cap bracket the critical gain and are bisected. The ultimate gain and
oscillation period feed the classic tuning table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .actuator import ActuatorParams
from .control import ControllerKind, ControllerSpec, GainSet
from .loads import LoadModel, NullLoad
from .simcore import NoiseConfig, SimConfig, SimulationDiverged, run_scenario
from .trajectory import Step

PEAKS_REQUIRED = 8          # tail peaks examined for sustained oscillation
DECAY_BAND = (0.9, 1.1)     # mean peak-to-peak amplitude ratio for "sustained"
AMPLITUDE_FLOOR = 0.05      # of the step height; rejects quantization chatter
AMPLITUDE_CAP = 20.0        # of the step height; beyond this the probe is unstable
INTERVAL_SPREAD = 1.5       # max/min peak spacing; rejects friction-creep wiggles


class TuningFailed(RuntimeError):
    pass


class NoOscillation(TuningFailed):
    """Gain sweep exhausted its ceiling without sustained oscillation."""


class Unstable(TuningFailed):
    """Response diverged and bisection could not bracket an oscillation."""


@dataclass(frozen=True)
class ZnResult:
    ultimate_gain: float    # Ku [A/mm]
    ultimate_period: float  # Tu [s]

    def gain_table(self) -> dict[str, GainSet]:
        """Classic Ziegler-Nichols table for P, PD, and PID."""
        ku, tu = self.ultimate_gain, self.ultimate_period
        kp_pd = 0.8 * ku
        kp_pid = 0.6 * ku
        return {
            "p": GainSet(kp=0.5 * ku),
            "pd": GainSet(kp=kp_pd, kd=kp_pd * tu / 8.0),
            "pid": GainSet(kp=kp_pid, ki=2.0 * kp_pid / tu, kd=kp_pid * tu / 8.0),
        }

    def spec(self, kind: ControllerKind, feedforward: float = 0.0) -> ControllerSpec:
        gains = self.gain_table()[kind.value if kind != ControllerKind.PDG else "pd"]
        if feedforward:
            gains = GainSet(
                kp=gains.kp, ki=gains.ki, kd=gains.kd, feedforward_current=feedforward
            )
        return ControllerSpec(kind=kind, gains=gains)


def _positive_peaks(t: np.ndarray, y: np.ndarray, level: float):
    """Local maxima of (y - level) above zero; plateau-tolerant on the left."""
    d = y - level
    inner = d[1:-1]
    mask = (inner > 0) & (inner >= d[:-2]) & (inner > d[2:])
    idx = np.nonzero(mask)[0] + 1
    return t[idx], d[idx]


def _classify(
    kp: float,
    plant: ActuatorParams,
    load: LoadModel,
    step_mm: float,
    probe: SimConfig,
    step_at: float,
):
    """One P-control probe: 'stable' | 'sustained' | 'unstable' (+ period)."""
    spec = ControllerSpec(kind=ControllerKind.P, gains=GainSet(kp=kp))
    try:
        record = run_scenario(
            probe, plant, load, spec, Step(height_mm=step_mm, at=step_at)
        )
    except SimulationDiverged:
        return "unstable", None
    pos = record.position_mm
    if np.max(np.abs(pos - step_mm)) > AMPLITUDE_CAP * step_mm:
        return "unstable", None
    peak_t, peak_a = _positive_peaks(record.t, pos, step_mm)
    if len(peak_a) < PEAKS_REQUIRED + 1:
        return "stable", None
    amps = peak_a[-PEAKS_REQUIRED:]
    times = peak_t[-PEAKS_REQUIRED:]
    intervals = np.diff(times)
    if np.mean(amps) < AMPLITUDE_FLOOR * step_mm:
        return "stable", None
    if np.max(intervals) > INTERVAL_SPREAD * np.min(intervals):
        return "stable", None
    mean_ratio = float(np.mean(amps[1:] / amps[:-1]))
    if DECAY_BAND[0] <= mean_ratio <= DECAY_BAND[1]:
        period = float((times[-1] - times[0]) / (PEAKS_REQUIRED - 1))
        return "sustained", period
    if mean_ratio > DECAY_BAND[1]:
        return "unstable", None
    return "stable", None


def ziegler_nichols_tune(
    plant: ActuatorParams,
    load: LoadModel | None = None,
    step_mm: float = 1.0,
    *,
    kp_start: float = 0.05,
    kp_ceiling: float = 100.0,
    sweep_factor: float = 1.1,
    probe_duration: float = 4.0,
    step_at: float = 0.1,
    seed: int = 0,
    max_bisections: int = 60,
) -> ZnResult:
    """Find the ultimate gain and period for P control of the given plant.

    Raises NoOscillation if the sweep exhausts kp_ceiling, Unstable if a
    diverging response cannot be bisected down to a sustained oscillation.
    """
    if step_mm <= 0:
        raise ValueError(f"step_mm must be > 0, got {step_mm}")
    load = load if load is not None else NullLoad()
    probe = SimConfig(
        duration=probe_duration,
        seed=seed,
        noise=NoiseConfig(current_sense_sigma=0.0, torque_disturbance_sigma=0.0),
    )

    kp = kp_start
    last_stable = None
    while kp <= kp_ceiling:
        status, period = _classify(kp, plant, load, step_mm, probe, step_at)
        if status == "sustained":
            return ZnResult(ultimate_gain=kp, ultimate_period=period)
        if status == "unstable":
            if last_stable is None:
                raise Unstable(
                    f"response diverges already at kp={kp:.4g}; no stable gain below it"
                )
            lo, hi = last_stable, kp
            for _ in range(max_bisections):
                mid = math.sqrt(lo * hi)
                status, period = _classify(mid, plant, load, step_mm, probe, step_at)
                if status == "sustained":
                    return ZnResult(ultimate_gain=mid, ultimate_period=period)
                if status == "unstable":
                    hi = mid
                else:
                    lo = mid
                if hi / lo < 1.0 + 1e-9:
                    break
            raise Unstable(
                f"no sustained oscillation bracketed between kp={lo:.6g} and {hi:.6g}"
            )
        last_stable = kp
        kp *= sweep_factor
    raise NoOscillation(f"no oscillation up to kp={kp_ceiling}")
