"""Flat, human-editable scenario config files.

Sections per module (scenario, sim, plant, load, controller, reference,
detector); values are Python literals (numbers, quoted strings, lists).
The canonical dump is deterministic, so an echoed config reruns the exact
same scenario and hashes stably.
"""

from __future__ import annotations

import ast
import configparser
import hashlib
import io
import math

from .actuator import ActuatorParams
from .control import ControllerKind, ControllerSpec, GainSet
from .loads import BeamLoad, GravityLoad, LoadModel, NullLoad, PulseLoad
from .proprioception import DetectorConfig
from .simcore import NoiseConfig, SimConfig
from .trajectory import ReferenceSignal, Smooth, Staircase, Step, smooth_path

SECTION_ORDER = ("scenario", "sim", "plant", "load", "controller", "reference", "detector")


class ConfigError(ValueError):
    pass


def parse_config(text: str) -> dict:
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc
    config: dict = {}
    for section in parser.sections():
        config[section] = {}
        for key, raw in parser.items(section):
            try:
                config[section][key] = ast.literal_eval(raw)
            except (ValueError, SyntaxError) as exc:
                raise ConfigError(
                    f"[{section}] {key}: not a Python literal: {raw!r}"
                ) from exc
    return config


def load_config(path) -> dict:
    with open(path) as fh:
        return parse_config(fh.read())


def dump_config(config: dict) -> str:
    out = io.StringIO()
    sections = [s for s in SECTION_ORDER if s in config]
    sections += [s for s in config if s not in SECTION_ORDER]
    for index, section in enumerate(sections):
        if index:
            out.write("\n")
        out.write(f"[{section}]\n")
        for key, value in config[section].items():
            out.write(f"{key} = {value!r}\n")
    return out.getvalue()


def save_config(config: dict, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dump_config(config))


def config_hash(config: dict) -> str:
    return hashlib.sha256(dump_config(config).encode()).hexdigest()


def merge_config(base: dict, override: dict) -> dict:
    merged = {section: dict(values) for section, values in base.items()}
    for section, values in override.items():
        merged.setdefault(section, {})
        merged[section].update(values)
    return merged


def apply_overrides(config: dict, overrides: list[str]) -> dict:
    """Apply CLI --set SECTION.key=value entries."""
    result = {section: dict(values) for section, values in config.items()}
    for entry in overrides:
        target, _, raw = entry.partition("=")
        if not raw:
            raise ConfigError(f"--set needs SECTION.key=value, got {entry!r}")
        section, _, key = target.partition(".")
        if not key:
            raise ConfigError(f"--set needs SECTION.key=value, got {entry!r}")
        try:
            value = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            value = raw
        result.setdefault(section, {})[key] = value
    return result


def _take(section: dict, key: str, default):
    return section[key] if key in section else default


def build_sim(config: dict) -> SimConfig:
    sim = config.get("sim", {})
    try:
        return SimConfig(
            duration=float(sim["duration"]),
            dt_low=float(_take(sim, "dt_low", 1e-4)),
            rate_ratio=int(_take(sim, "rate_ratio", 10)),
            seed=int(_take(sim, "seed", 0)),
            latency_ticks=int(_take(sim, "latency_ticks", 1)),
            noise=NoiseConfig(
                current_sense_sigma=float(_take(sim, "current_sense_sigma", 0.05)),
                torque_disturbance_sigma=float(
                    _take(sim, "torque_disturbance_sigma", 0.0)
                ),
            ),
        )
    except KeyError as exc:
        raise ConfigError(f"[sim] missing key: {exc}") from exc


def build_plant(config: dict) -> ActuatorParams:
    plant = config.get("plant", {})
    defaults = ActuatorParams()
    kwargs = {}
    for name in defaults.__dataclass_fields__:
        value = _take(plant, name, getattr(defaults, name))
        field_type = type(getattr(defaults, name))
        kwargs[name] = field_type(value)
    return ActuatorParams(**kwargs)


def build_load(config: dict) -> LoadModel:
    load = config.get("load", {})
    kind = _take(load, "kind", "null")
    if kind == "null":
        return NullLoad()
    if kind == "gravity":
        return GravityLoad(mass=float(load["mass"]))
    if kind == "beam":
        return BeamLoad(
            flexural_rigidity=float(_take(load, "flexural_rigidity", 0.008)),
            routing_offset=float(_take(load, "routing_offset", 0.02)),
            length=float(_take(load, "length", 0.285)),
        )
    if kind == "pulses":
        schedule = tuple(tuple(float(x) for x in pulse) for pulse in load["pulses"])
        return PulseLoad(schedule=schedule)
    raise ConfigError(f"[load] unknown kind {kind!r}")


def build_controller(config: dict) -> ControllerSpec:
    ctrl = config.get("controller", {})
    try:
        kind = ControllerKind(_take(ctrl, "kind", "pd"))
    except ValueError as exc:
        raise ConfigError(f"[controller] unknown kind {ctrl.get('kind')!r}") from exc
    gains = GainSet(
        kp=float(_take(ctrl, "kp", 0.0)),
        ki=float(_take(ctrl, "ki", 0.0)),
        kd=float(_take(ctrl, "kd", 0.0)),
        feedforward_current=float(_take(ctrl, "feedforward_current", 0.0)),
        derivative_filter_alpha=float(_take(ctrl, "derivative_filter_alpha", 0.5)),
    )
    return ControllerSpec(
        kind=kind,
        gains=gains,
        integrator_limit=float(_take(ctrl, "integrator_limit", 6.0)),
    )


def build_reference(config: dict) -> ReferenceSignal:
    ref = config.get("reference", {})
    kind = _take(ref, "kind", "step")
    if kind == "step":
        return Step(height_mm=float(ref["height_mm"]), at=float(_take(ref, "at", 0.0)))
    if kind == "staircase":
        return Staircase(
            levels=tuple(float(x) for x in ref["levels"]),
            dwell=float(ref["dwell"]),
        )
    if kind == "smooth":
        return Smooth(
            start_mm=float(ref["start_mm"]),
            end_mm=float(ref["end_mm"]),
            t0=float(_take(ref, "t0", 0.0)),
            duration=float(ref["duration"]),
        )
    if kind == "smooth_path":
        return smooth_path(
            [float(x) for x in ref["waypoints"]],
            leg_duration=float(ref["leg_duration"]),
            t0=float(_take(ref, "t0", 0.0)),
        )
    raise ConfigError(f"[reference] unknown kind {kind!r}")


def build_detector(config: dict) -> DetectorConfig:
    det = config.get("detector", {})
    return DetectorConfig(
        velocity_threshold=float(_take(det, "velocity_threshold", 250.0)),
        min_consecutive=int(_take(det, "min_consecutive", 5)),
        current_threshold=float(_take(det, "current_threshold", 0.15)),
        window=int(_take(det, "window", 16)),
        merge_gap=float(_take(det, "merge_gap", 0.5)),
    )


def validate_finite(config: dict) -> None:
    """Reject non-finite numeric leaves early with a readable message."""
    for section, values in config.items():
        for key, value in values.items():
            leaves = value if isinstance(value, (list, tuple)) else [value]
            for leaf in _flatten(leaves):
                if isinstance(leaf, float) and not math.isfinite(leaf):
                    raise ConfigError(f"[{section}] {key}: non-finite value {leaf}")


def _flatten(values):
    for value in values:
        if isinstance(value, (list, tuple)):
            yield from _flatten(value)
        else:
            yield value
