"""Load estimation from sensed current and disturbance detection from the
measured velocity, exploiting the transparent drivetrain: tendon tension
maps to holding current as T = i * kt * N / r.

Detection runs offline over completed run records. The velocity channel
thresholds the encoder-derived velocity estimate; the current channel
thresholds the window-averaged sensed current against a baseline taken
as the median of the first half second. Events use hysteresis (close at
half the open threshold) and nearby events are merged, because the
quantized velocity chatters around the threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actuator import ActuatorParams
from .record import RunRecord

BASELINE_SECONDS = 0.5      # head of the record used for the current baseline
CLOSE_FRACTION = 0.5        # event close threshold relative to open threshold


@dataclass(frozen=True)
class DetectorConfig:
    velocity_threshold: float = 250.0   # [counts/s]
    min_consecutive: int = 5            # samples above threshold to open
    current_threshold: float = 0.15     # [A] deviation from baseline
    window: int = 16                    # moving-average length for current
    merge_gap: float = 0.5              # [s] events closer than this merge

    def validate(self) -> None:
        if self.velocity_threshold <= 0 or self.current_threshold <= 0:
            raise ValueError("detector thresholds must be > 0")
        if self.window < 1:
            raise ValueError(f"window must be >= 1, got {self.window}")
        if self.min_consecutive < 1:
            raise ValueError(f"min_consecutive must be >= 1, got {self.min_consecutive}")
        if self.merge_gap < 0:
            raise ValueError(f"merge_gap must be >= 0, got {self.merge_gap}")


@dataclass(frozen=True)
class DetectionEvent:
    t_start: float
    t_end: float
    peak: float       # peak |signal| in channel units
    channel: str      # "velocity" | "current"


@dataclass(frozen=True)
class LoadEstimate:
    tension: float          # [N]
    mass_equivalent: float  # [kg]
    reliable: bool          # False while the plant is moving


def estimate_load(
    sensed_current: float,
    params: ActuatorParams,
    velocity_estimate: float = 0.0,
    velocity_threshold: float = 250.0,
) -> LoadEstimate:
    """Tendon tension implied by the (filtered) sensed current at rest.

    T = i * kt * N / r; flagged unreliable when the velocity estimate says
    the plant is moving, since dynamic current then pollutes the estimate.
    """
    from .loads import GRAVITY

    tension = sensed_current * params.kt * params.gear_ratio / params.drum_radius
    return LoadEstimate(
        tension=tension,
        mass_equivalent=tension / GRAVITY,
        reliable=abs(velocity_estimate) < velocity_threshold,
    )


def windowed_mean_current(record: RunRecord, window: int = 16) -> np.ndarray:
    """Trailing moving average of the sensed current (partial head windows)."""
    sensed = record.sensed_current_A
    out = np.empty_like(sensed)
    cumulative = np.cumsum(sensed)
    for i in range(len(sensed)):
        j = max(0, i - window + 1)
        total = cumulative[i] - (cumulative[j - 1] if j > 0 else 0.0)
        out[i] = total / (i - j + 1)
    return out


def _threshold_events(
    t: np.ndarray,
    signal: np.ndarray,
    threshold: float,
    min_consecutive: int,
    channel: str,
) -> list[DetectionEvent]:
    close = CLOSE_FRACTION * threshold
    events = []
    open_since = None
    consecutive = 0
    peak = 0.0
    for i in range(len(signal)):
        magnitude = abs(float(signal[i]))
        if open_since is None:
            if magnitude > threshold:
                consecutive += 1
                if consecutive >= min_consecutive:
                    open_since = i - consecutive + 1
                    peak = magnitude
            else:
                consecutive = 0
        else:
            if magnitude > peak:
                peak = magnitude
            if magnitude < close:
                events.append(
                    DetectionEvent(float(t[open_since]), float(t[i]), peak, channel)
                )
                open_since = None
                consecutive = 0
    if open_since is not None:
        events.append(DetectionEvent(float(t[open_since]), float(t[-1]), peak, channel))
    return events


def _merge_events(events: list[DetectionEvent], gap: float) -> list[DetectionEvent]:
    merged: list[DetectionEvent] = []
    for event in events:
        if merged and event.t_start - merged[-1].t_end <= gap:
            last = merged[-1]
            merged[-1] = DetectionEvent(
                last.t_start, event.t_end, max(last.peak, event.peak), last.channel
            )
        else:
            merged.append(event)
    return merged


def detect_disturbances(
    record: RunRecord,
    cfg: DetectorConfig | None = None,
    params: ActuatorParams | None = None,
) -> list[DetectionEvent]:
    """Velocity- and current-channel events over a stationary-setpoint record.

    The record stores the velocity estimate in mm/s; thresholds are in
    encoder counts/s, converted through the plant geometry.
    """
    cfg = cfg or DetectorConfig()
    cfg.validate()
    params = params or ActuatorParams()
    t = record.t

    velocity_counts = record.velocity_mm_s / params.mm_per_count
    velocity_events = _threshold_events(
        t, velocity_counts, cfg.velocity_threshold, cfg.min_consecutive, "velocity"
    )

    head = t <= (t[0] + BASELINE_SECONDS) if len(t) else np.array([], dtype=bool)
    smoothed = windowed_mean_current(record, cfg.window)
    baseline = float(np.median(smoothed[head])) if head.any() else 0.0
    current_events = _threshold_events(
        t, smoothed - baseline, cfg.current_threshold, cfg.min_consecutive, "current"
    )

    merged = _merge_events(velocity_events, cfg.merge_gap)
    merged += _merge_events(current_events, cfg.merge_gap)
    return merged


def events_csv(events: list[DetectionEvent]) -> str:
    lines = ["t_start,t_end,channel,peak"]
    for e in events:
        lines.append(f"{e.t_start:.9g},{e.t_end:.9g},{e.channel},{e.peak:.9g}")
    return "\n".join(lines) + "\n"
