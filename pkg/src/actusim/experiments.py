"""Named experiment scenarios: each paper-style evaluation as a configured
set of runs emitting run.csv, metrics.csv, events.csv, and a config echo.

Layout of an artifact directory:

    out/
      config.txt            scenario-level echo (fully resolved)
      metrics.csv           one row per variant
      gains.txt             tune scenario only
      runs/<variant>/
        run.csv  metrics.csv  events.csv  config.txt

Every per-variant config.txt is a standalone `single` scenario whose rerun
reproduces that run.csv byte for byte.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass

from .configio import (
    ConfigError,
    apply_overrides,
    build_controller,
    build_detector,
    build_load,
    build_plant,
    build_reference,
    build_sim,
    config_hash,
    merge_config,
    save_config,
    validate_finite,
)
from .loads import GRAVITY
from .metrics import Metrics, compute_metrics
from .proprioception import detect_disturbances, events_csv
from .record import RunRecord
from .simcore import run_scenario
from .tuning import ZnResult, ziegler_nichols_tune

# Ultimate gain/period produced by ziegler_nichols_tune on the default
# plant; presets below derive their gain sets from this table so the same
# gains drive every scenario. test_tuning keeps these in sync with a
# fresh tune.
TUNED_ULTIMATE_GAIN = 0.43587310301590654    # Ku [A/mm]
TUNED_ULTIMATE_PERIOD = 0.13514285714285718  # Tu [s]

TUNED = ZnResult(TUNED_ULTIMATE_GAIN, TUNED_ULTIMATE_PERIOD)

SCENARIOS = (
    "single",
    "tune",
    "step",
    "staircase",
    "trajectory",
    "beam-step",
    "beam-trajectory",
    "disturbance",
)

METRIC_COLUMNS = (
    "overshoot_percent",
    "rise_time_s",
    "settling_time_s",
    "steady_state_error_mm",
    "rms_tracking_error_mm",
)


@dataclass
class VariantResult:
    name: str
    record: RunRecord
    metrics: Metrics
    events: list


def _controller_section(kind: str, gains, feedforward: float = 0.0) -> dict:
    return {
        "kind": kind,
        "kp": gains.kp,
        "ki": gains.ki,
        "kd": gains.kd,
        "feedforward_current": feedforward,
        "derivative_filter_alpha": gains.derivative_filter_alpha,
        "integrator_limit": 6.0,
    }


def feedforward_for_mass(mass: float, plant_section: dict) -> float:
    """Holding current m*g*r/(N*kt) from the configured plant constants."""
    kt = plant_section.get("kt", 0.022071)
    gear = plant_section.get("gear_ratio", 4.0)
    radius = plant_section.get("drum_radius", 0.009)
    return mass * GRAVITY * radius / (gear * kt)


def default_config(scenario: str) -> dict:
    """Fully-resolved default configuration of a scenario preset."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}; pick one of {SCENARIOS}")
    plant: dict = {}  # default ActuatorParams
    sim = {
        "duration": 3.0,
        "dt_low": 1e-4,
        "rate_ratio": 10,
        "seed": 42,
        "latency_ticks": 1,
        "current_sense_sigma": 0.05,
        "torque_disturbance_sigma": 0.0,
    }
    table = TUNED.gain_table()
    pd = table["pd"]
    config: dict = {"scenario": {"name": scenario}, "sim": sim, "plant": plant}

    if scenario == "single":
        config["scenario"]["variant"] = "run"
        config["load"] = {"kind": "null"}
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {"kind": "step", "height_mm": 1.0, "at": 0.1}
    elif scenario in ("tune", "step"):
        config["scenario"].update(
            {"height_mm": 1.0, "at": 0.1, "controllers": ["p", "pd", "pid"]}
        )
        if scenario == "tune":
            config["scenario"].update(
                {"probe_duration": 4.0, "kp_start": 0.05, "kp_ceiling": 100.0}
            )
        config["load"] = {"kind": "null"}
    elif scenario == "staircase":
        sim["duration"] = 32.0
        config["scenario"]["masses"] = [0.2, 0.54, 1.0]
        config["load"] = {"kind": "gravity", "mass": 1.0}
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {
            "kind": "staircase",
            "levels": [1.0, -1.0, 2.0, -2.0, 3.0, -3.0, 4.0, -4.0,
                       5.0, -5.0, 6.0, -6.0, 7.0, -7.0, -8.0, 0.0],
            "dwell": 2.0,
        }
    elif scenario == "trajectory":
        sim["duration"] = 8.0
        config["scenario"]["mass"] = 1.1
        config["load"] = {"kind": "gravity", "mass": 1.1}
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {
            "kind": "smooth_path",
            "waypoints": [0.0, 7.0, -8.0, 0.0],
            "leg_duration": 2.0,
            "t0": 1.0,
        }
    elif scenario == "beam-step":
        sim["duration"] = 2.5
        config["scenario"]["heights"] = [2.0, 3.0]
        config["load"] = {
            "kind": "beam",
            "flexural_rigidity": 0.008,
            "routing_offset": 0.02,
            "length": 0.285,
        }
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {"kind": "step", "height_mm": 2.0, "at": 0.5}
    elif scenario == "beam-trajectory":
        sim["duration"] = 10.0
        config["load"] = {
            "kind": "beam",
            "flexural_rigidity": 0.008,
            "routing_offset": 0.02,
            "length": 0.285,
        }
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {
            "kind": "smooth_path",
            "waypoints": [0.0, 16.0, 0.0, 10.0, 0.0],
            "leg_duration": 2.0,
            "t0": 1.0,
        }
    elif scenario == "disturbance":
        sim["duration"] = 5.5
        config["load"] = {
            "kind": "pulses",
            "pulses": [(1.0, 0.3, 0.05), (2.5, 0.3, 0.005), (4.0, 0.3, 0.008)],
        }
        config["controller"] = _controller_section("pd", pd)
        config["reference"] = {"kind": "step", "height_mm": 0.0, "at": 0.0}
        config["detector"] = {
            "velocity_threshold": 250.0,
            "min_consecutive": 5,
            "current_threshold": 0.15,
            "window": 16,
            "merge_gap": 0.5,
        }
    return config


def _variant_config(base: dict, scenario: str, variant: str, **sections) -> dict:
    config = {
        "scenario": {"name": "single", "variant": variant,
                     "run_name": f"{scenario}/{variant}"},
        "sim": dict(base["sim"]),
        "plant": dict(base["plant"]),
    }
    for key in ("load", "controller", "reference", "detector"):
        if key in sections:
            config[key] = sections[key]
        elif key in base:
            config[key] = dict(base[key])
    return config


def scenario_variants(scenario: str, config: dict, gains: ZnResult | None = None):
    """(variant name, standalone single-run config) pairs for a scenario."""
    table = (gains or TUNED).gain_table()
    pd = table["pd"]
    meta = config.get("scenario", {})

    if scenario == "single":
        variant = meta.get("variant", "run")
        single = {k: dict(v) for k, v in config.items()}
        single.setdefault("scenario", {})
        single["scenario"].setdefault("run_name", f"single/{variant}")
        return [(variant, single)]

    if scenario in ("tune", "step"):
        height = meta.get("height_mm", 1.0)
        at = meta.get("at", 0.1)
        reference = {"kind": "step", "height_mm": height, "at": at}
        out = []
        for kind in meta.get("controllers", ["p", "pd", "pid"]):
            out.append(
                (
                    kind,
                    _variant_config(
                        config, scenario, kind,
                        controller=_controller_section(kind, table[kind]),
                        reference=reference,
                    ),
                )
            )
        return out

    if scenario == "staircase":
        out = []
        for mass in meta.get("masses", [0.2, 0.54, 1.0]):
            load = {"kind": "gravity", "mass": mass}
            ff = feedforward_for_mass(mass, config.get("plant", {}))
            out.append(
                (
                    f"pd_m{mass:g}",
                    _variant_config(
                        config, scenario, f"pd_m{mass:g}",
                        load=load, controller=_controller_section("pd", pd),
                    ),
                )
            )
            out.append(
                (
                    f"pdg_m{mass:g}",
                    _variant_config(
                        config, scenario, f"pdg_m{mass:g}",
                        load=load, controller=_controller_section("pdg", pd, ff),
                    ),
                )
            )
        return out

    if scenario == "trajectory":
        mass = meta.get("mass", 1.1)
        load = {"kind": "gravity", "mass": mass}
        ff = feedforward_for_mass(mass, config.get("plant", {}))
        return [
            (
                "pd_unloaded",
                _variant_config(
                    config, scenario, "pd_unloaded",
                    load={"kind": "null"}, controller=_controller_section("pd", pd),
                ),
            ),
            (
                "pd_loaded",
                _variant_config(
                    config, scenario, "pd_loaded",
                    load=load, controller=_controller_section("pd", pd),
                ),
            ),
            (
                "pdg_loaded",
                _variant_config(
                    config, scenario, "pdg_loaded",
                    load=load, controller=_controller_section("pdg", pd, ff),
                ),
            ),
        ]

    if scenario == "beam-step":
        out = []
        for height in meta.get("heights", [2.0, 3.0]):
            reference = dict(config["reference"])
            reference["height_mm"] = height
            out.append(
                (
                    f"step_{height:g}mm",
                    _variant_config(
                        config, scenario, f"step_{height:g}mm", reference=reference
                    ),
                )
            )
        return out

    if scenario in ("beam-trajectory", "disturbance"):
        return [(scenario, _variant_config(config, scenario, scenario))]

    raise ConfigError(f"unknown scenario {scenario!r}")


def run_single(config: dict) -> VariantResult:
    """Run one standalone single-run config; no files written."""
    validate_finite(config)
    sim = build_sim(config)
    plant = build_plant(config)
    load = build_load(config)
    controller = build_controller(config)
    reference = build_reference(config)
    detector = build_detector(config)
    run_name = config.get("scenario", {}).get("run_name", "single/run")
    record = run_scenario(
        sim, plant, load, controller, reference,
        scenario=run_name, config_hash=config_hash(config),
    )
    metrics = compute_metrics(record)
    events = detect_disturbances(record, detector, plant)
    return VariantResult(
        name=config.get("scenario", {}).get("variant", "run"),
        record=record, metrics=metrics, events=events,
    )


def metrics_csv(rows: list[tuple[str, Metrics]]) -> str:
    out = io.StringIO()
    out.write("variant," + ",".join(METRIC_COLUMNS) + "\n")
    for name, metrics in rows:
        values = metrics.as_dict()
        cells = [name]
        for column in METRIC_COLUMNS:
            value = values[column]
            cells.append("" if value is None else "%.9g" % value)
        out.write(",".join(cells) + "\n")
    return out.getvalue()


def run(
    scenario: str,
    config_file: str | None = None,
    out_dir: str | None = None,
    overrides: list[str] | None = None,
) -> list[VariantResult]:
    """Run a scenario and write its artifact directory (when out_dir given)."""
    from .configio import load_config

    config = default_config(scenario)
    if config_file:
        loaded = load_config(config_file)
        if scenario == "single":
            # single-run configs (and every config echo) are complete;
            # merging preset defaults would leak unrelated keys into them
            config = loaded
        else:
            config = merge_config(config, loaded)
    if overrides:
        config = apply_overrides(config, overrides)
    config.setdefault("scenario", {})["name"] = scenario
    validate_finite(config)

    gains = TUNED
    zn_lines = None
    if scenario == "tune":
        meta = config["scenario"]
        plant = build_plant(config)
        zn = ziegler_nichols_tune(
            plant,
            build_load(config),
            step_mm=meta.get("height_mm", 1.0),
            kp_start=meta.get("kp_start", 0.05),
            kp_ceiling=meta.get("kp_ceiling", 100.0),
            probe_duration=meta.get("probe_duration", 4.0),
            step_at=meta.get("at", 0.1),
            seed=config["sim"].get("seed", 0),
        )
        gains = zn
        zn_lines = _gains_echo(zn)

    results = []
    variant_rows = []
    for name, variant_config in scenario_variants(scenario, config, gains):
        result = run_single(variant_config)
        results.append(result)
        variant_rows.append((name, result.metrics, variant_config))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        save_config(config, os.path.join(out_dir, "config.txt"))
        with open(os.path.join(out_dir, "metrics.csv"), "w", newline="\n") as fh:
            fh.write(metrics_csv([(n, m) for n, m, _ in variant_rows]))
        if zn_lines is not None:
            with open(os.path.join(out_dir, "gains.txt"), "w", newline="\n") as fh:
                fh.write(zn_lines)
        for result, (_, _, variant_config) in zip(results, variant_rows):
            run_dir = os.path.join(out_dir, "runs", result.name)
            os.makedirs(run_dir, exist_ok=True)
            result.record.save(os.path.join(run_dir, "run.csv"))
            save_config(variant_config, os.path.join(run_dir, "config.txt"))
            with open(os.path.join(run_dir, "metrics.csv"), "w", newline="\n") as fh:
                fh.write(metrics_csv([(result.name, result.metrics)]))
            with open(os.path.join(run_dir, "events.csv"), "w", newline="\n") as fh:
                fh.write(events_csv(result.events))
    return results


def _gains_echo(zn: ZnResult) -> str:
    table = zn.gain_table()
    out = io.StringIO()
    out.write("[zn]\n")
    out.write(f"ultimate_gain = {zn.ultimate_gain!r}\n")
    out.write(f"ultimate_period = {zn.ultimate_period!r}\n")
    for kind in ("p", "pd", "pid"):
        gains = table[kind]
        out.write(f"\n[{kind}]\n")
        out.write(f"kp = {gains.kp!r}\n")
        out.write(f"ki = {gains.ki!r}\n")
        out.write(f"kd = {gains.kd!r}\n")
    return out.getvalue()
