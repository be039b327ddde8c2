"""Deterministic metric extraction from run records.

Step metrics (overshoot, rise, settling) are defined relative to the single
setpoint change inside the analysed segment; when the response never
crosses the relevant band the metric is reported as absent (None), not
as zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .record import RunRecord

STEADY_STATE_FRACTION = 0.2   # tail share of the segment used for e_ss
SETTLING_BAND = 0.02          # +/- fraction of the step magnitude


class UndefinedMetric(ValueError):
    """Requested a metric on a segment where it has no definition."""


@dataclass(frozen=True)
class Metrics:
    overshoot_percent: float | None
    rise_time_s: float | None
    settling_time_s: float | None
    steady_state_error_mm: float
    rms_tracking_error_mm: float

    def as_dict(self) -> dict:
        return {
            "overshoot_percent": self.overshoot_percent,
            "rise_time_s": self.rise_time_s,
            "settling_time_s": self.settling_time_s,
            "steady_state_error_mm": self.steady_state_error_mm,
            "rms_tracking_error_mm": self.rms_tracking_error_mm,
        }


def _crossing_time(t: np.ndarray, y: np.ndarray, level: float, rising: bool) -> float | None:
    """First time y crosses level, linearly interpolated between samples."""
    above = y >= level if rising else y <= level
    if not above.any():
        return None
    i = int(np.argmax(above))
    if i == 0:
        return float(t[0])
    y0, y1 = y[i - 1], y[i]
    if y1 == y0:
        return float(t[i])
    frac = (level - y0) / (y1 - y0)
    return float(t[i - 1] + frac * (t[i] - t[i - 1]))


def compute_metrics(record: RunRecord, segment: tuple[float, float] | None = None) -> Metrics:
    """Metrics over the [t0, t1] segment (whole record when omitted).

    Step metrics are produced when the setpoint changes exactly once inside
    the segment; otherwise they are absent.
    """
    t = record.t
    if segment is None:
        mask = np.ones(len(t), dtype=bool)
    else:
        t0, t1 = segment
        if t0 > t1:
            raise UndefinedMetric(f"empty segment ({t0}, {t1})")
        mask = (t >= t0) & (t <= t1)
    if not mask.any():
        raise UndefinedMetric("segment contains no samples")

    ts = t[mask]
    sp = record.setpoint_mm[mask]
    pos = record.position_mm[mask]
    err = sp - pos

    rms = float(np.sqrt(np.mean(err**2)))

    changes = np.nonzero(np.diff(sp) != 0)[0]
    overshoot = rise = settling = None
    tail = err
    if len(changes) == 1:
        j = int(changes[0]) + 1          # first sample at the new level
        sp_before, sp_after = float(sp[j - 1]), float(sp[j])
        step = sp_after - sp_before
        rt, rp = ts[j:], pos[j:]
        rising = step > 0
        peak = float(rp.max()) if rising else float(rp.min())
        overshoot = max(0.0, (peak - sp_after) / step * 100.0)
        t10 = _crossing_time(rt, rp, sp_before + 0.1 * step, rising)
        t90 = _crossing_time(rt, rp, sp_before + 0.9 * step, rising)
        if t10 is not None and t90 is not None and t90 >= t10:
            rise = t90 - t10
        inside = np.abs(rp - sp_after) <= SETTLING_BAND * abs(step)
        if inside[-1]:
            outside = np.nonzero(~inside)[0]
            last_out = int(outside[-1]) if len(outside) else -1
            settling = float(rt[last_out + 1] - ts[j])
        tail = err[j:]

    n_tail = max(1, int(round(len(tail) * STEADY_STATE_FRACTION)))
    steady_state = float(abs(np.mean(tail[-n_tail:])))

    return Metrics(
        overshoot_percent=overshoot,
        rise_time_s=rise,
        settling_time_s=settling,
        steady_state_error_mm=steady_state,
        rms_tracking_error_mm=rms,
    )


def level_windows(levels: int, dwell: float, dt_high: float) -> list[tuple[float, float]]:
    """Last-20%-of-dwell windows for each level of a staircase reference."""
    windows = []
    for i in range(levels):
        start = i * dwell + (1.0 - STEADY_STATE_FRACTION) * dwell
        end = (i + 1) * dwell - dt_high / 2
        windows.append((start, end))
    return windows


def steady_state_per_level(record: RunRecord, levels: int, dwell: float) -> list[float]:
    """|mean error| over the tail window of each staircase level."""
    dt_high = record.meta.dt_low * record.meta.rate_ratio
    err = record.error_mm()
    out = []
    for start, end in level_windows(levels, dwell, dt_high):
        mask = (record.t >= start) & (record.t <= end)
        if not mask.any():
            raise UndefinedMetric(f"no samples in level window ({start}, {end})")
        out.append(float(abs(np.mean(err[mask]))))
    return out
