import math

import numpy as np
import pytest

from actusim.metrics import Metrics, UndefinedMetric, compute_metrics, steady_state_per_level
from actusim.record import RunMeta, RunRecord


def synthetic(t, setpoint, position):
    t = np.asarray(t, dtype=float)
    zeros = np.zeros_like(t)
    return RunRecord(
        t=t,
        setpoint_mm=np.asarray(setpoint, dtype=float),
        setpoint_vel_mm_s=zeros,
        position_mm=np.asarray(position, dtype=float),
        velocity_mm_s=zeros,
        true_current_A=zeros,
        sensed_current_A=zeros,
        command_current_A=zeros,
        load_torque_Nm=zeros,
        encoder_count=np.zeros_like(t, dtype=np.int64),
        meta=RunMeta(dt_low=1e-4, rate_ratio=10),
    )


def step_record(response, t_step=0.1, duration=2.0, height=1.0):
    t = np.arange(0.0, duration, 1e-3)
    sp = np.where(t >= t_step, height, 0.0)
    pos = np.array([response(max(0.0, x - t_step)) if x >= t_step else 0.0 for x in t])
    return synthetic(t, sp, pos)


class TestStepMetrics:
    def test_first_order_rise_time_is_tau_ln9(self):
        tau = 0.1
        record = step_record(lambda x: 1.0 - math.exp(-x / tau))
        metrics = compute_metrics(record)
        assert metrics.rise_time_s == pytest.approx(tau * math.log(9.0), abs=1e-4)

    def test_overshoot_thirty_percent(self):
        # peak 1.3 on a unit step
        record = step_record(lambda x: 1.0 + 0.3 * math.sin(min(x, 0.05) / 0.05 * math.pi / 2))
        metrics = compute_metrics(record)
        assert metrics.overshoot_percent == pytest.approx(30.0, abs=1e-6)

    def test_no_overshoot_reports_zero(self):
        record = step_record(lambda x: 1.0 - math.exp(-x / 0.05))
        assert compute_metrics(record).overshoot_percent == 0.0

    def test_settling_after_rise(self):
        record = step_record(lambda x: 1.0 - math.exp(-x / 0.1))
        metrics = compute_metrics(record)
        assert metrics.settling_time_s is not None
        assert metrics.settling_time_s >= metrics.rise_time_s
        # 2% band of a first-order response: tau*ln(50)
        assert metrics.settling_time_s == pytest.approx(0.1 * math.log(50.0), abs=2e-3)

    def test_perfect_tracking_is_all_zero(self):
        t = np.arange(0.0, 1.0, 1e-3)
        sp = np.where(t >= 0.2, 1.0, 0.0)
        record = synthetic(t, sp, sp)
        metrics = compute_metrics(record)
        assert metrics.rms_tracking_error_mm == 0.0
        assert metrics.steady_state_error_mm == 0.0
        assert metrics.overshoot_percent == 0.0

    def test_never_rising_reports_absent(self):
        record = step_record(lambda x: 0.0)  # response never moves
        metrics = compute_metrics(record)
        assert metrics.rise_time_s is None
        assert metrics.settling_time_s is None
        assert metrics.steady_state_error_mm == pytest.approx(1.0)

    def test_downward_step(self):
        record = step_record(lambda x: -2.0 * (1.0 - math.exp(-x / 0.05)), height=-2.0)
        metrics = compute_metrics(record)
        assert metrics.rise_time_s is not None
        assert metrics.overshoot_percent == 0.0


class TestSegments:
    def test_constant_setpoint_has_no_step_metrics(self):
        t = np.arange(0.0, 1.0, 1e-3)
        record = synthetic(t, np.ones_like(t), np.full_like(t, 0.9))
        metrics = compute_metrics(record)
        assert metrics.overshoot_percent is None
        assert metrics.rise_time_s is None
        assert metrics.steady_state_error_mm == pytest.approx(0.1)
        assert metrics.rms_tracking_error_mm == pytest.approx(0.1)

    def test_steady_state_uses_last_fifth(self):
        t = np.arange(0.0, 1.0, 1e-3)
        pos = np.where(t < 0.8, 0.0, 0.5)  # error 1.0 early, 0.5 in the tail
        record = synthetic(t, np.ones_like(t), pos)
        assert compute_metrics(record).steady_state_error_mm == pytest.approx(0.5)

    def test_segment_restricts_window(self):
        t = np.arange(0.0, 2.0, 1e-3)
        sp = np.where(t >= 1.0, 1.0, 0.0)
        record = synthetic(t, sp, np.zeros_like(t))
        early = compute_metrics(record, segment=(0.0, 0.9))
        assert early.rms_tracking_error_mm == 0.0
        assert early.overshoot_percent is None

    def test_empty_segment_raises(self):
        t = np.arange(0.0, 1.0, 1e-3)
        record = synthetic(t, np.zeros_like(t), np.zeros_like(t))
        with pytest.raises(UndefinedMetric):
            compute_metrics(record, segment=(5.0, 6.0))

    def test_per_level_steady_state(self):
        t = np.arange(0.0, 2.0, 1e-3)
        sp = np.where(t < 1.0, 2.0, 4.0)
        pos = sp - np.where(t < 1.0, 0.2, 0.4)
        record = synthetic(t, sp, pos)
        per = steady_state_per_level(record, 2, 1.0)
        assert per[0] == pytest.approx(0.2)
        assert per[1] == pytest.approx(0.4)


class TestMetricsContainer:
    def test_as_dict_keys(self):
        metrics = Metrics(None, None, None, 0.0, 0.0)
        assert set(metrics.as_dict()) == {
            "overshoot_percent",
            "rise_time_s",
            "settling_time_s",
            "steady_state_error_mm",
            "rms_tracking_error_mm",
        }
