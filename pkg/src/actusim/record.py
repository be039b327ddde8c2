"""Time-series log of one scenario run and its deterministic CSV form.

One row per high-level tick. Floats are written with 9 significant digits
(%.9g) so byte-identical goldens survive across platforms; the metadata
header carries everything needed to rerun the scenario bit-identically.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

COLUMNS = (
    "t",
    "setpoint_mm",
    "setpoint_vel_mm_s",
    "position_mm",
    "velocity_mm_s",
    "true_current_A",
    "sensed_current_A",
    "command_current_A",
    "load_torque_Nm",
    "encoder_count",
)

FLOAT_FMT = "%.9g"


@dataclass
class RunMeta:
    scenario: str = ""
    seed: int = 0
    config_hash: str = ""
    code_version: str = ""
    dt_low: float = 1e-4
    rate_ratio: int = 10
    n_low_steps: int = 0
    n_high_ticks: int = 0


@dataclass
class RunRecord:
    t: np.ndarray
    setpoint_mm: np.ndarray
    setpoint_vel_mm_s: np.ndarray
    position_mm: np.ndarray
    velocity_mm_s: np.ndarray
    true_current_A: np.ndarray
    sensed_current_A: np.ndarray
    command_current_A: np.ndarray
    load_torque_Nm: np.ndarray
    encoder_count: np.ndarray
    meta: RunMeta = field(default_factory=RunMeta)

    def __len__(self) -> int:
        return len(self.t)

    def column(self, name: str) -> np.ndarray:
        if name not in COLUMNS:
            raise KeyError(f"unknown column {name!r}")
        return getattr(self, name)

    def error_mm(self) -> np.ndarray:
        return self.setpoint_mm - self.position_mm

    def to_csv(self) -> str:
        out = io.StringIO()
        meta = self.meta
        out.write(f"# scenario: {meta.scenario}\n")
        out.write(f"# seed: {meta.seed}\n")
        out.write(f"# config_hash: {meta.config_hash}\n")
        out.write(f"# code_version: {meta.code_version}\n")
        out.write(f"# dt_low: {FLOAT_FMT % meta.dt_low}\n")
        out.write(f"# rate_ratio: {meta.rate_ratio}\n")
        out.write(f"# n_low_steps: {meta.n_low_steps}\n")
        out.write(f"# n_high_ticks: {meta.n_high_ticks}\n")
        out.write(",".join(COLUMNS) + "\n")
        floats = [self.column(c) for c in COLUMNS[:-1]]
        counts = self.encoder_count
        for i in range(len(self.t)):
            cells = [FLOAT_FMT % col[i] for col in floats]
            cells.append(str(int(counts[i])))
            out.write(",".join(cells) + "\n")
        return out.getvalue()

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv(cls, text: str) -> "RunRecord":
        meta = RunMeta()
        lines = text.splitlines()
        i = 0
        for i, line in enumerate(lines):
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            key = key.strip()
            value = value.strip()
            if key == "scenario":
                meta.scenario = value
            elif key == "seed":
                meta.seed = int(value)
            elif key == "config_hash":
                meta.config_hash = value
            elif key == "code_version":
                meta.code_version = value
            elif key == "dt_low":
                meta.dt_low = float(value)
            elif key == "rate_ratio":
                meta.rate_ratio = int(value)
            elif key == "n_low_steps":
                meta.n_low_steps = int(value)
            elif key == "n_high_ticks":
                meta.n_high_ticks = int(value)
        header = lines[i].split(",")
        if tuple(header) != COLUMNS:
            missing = set(COLUMNS) - set(header)
            raise ValueError(f"run record is missing columns: {sorted(missing)}")
        data = [line.split(",") for line in lines[i + 1:] if line]
        cols = {name: [] for name in COLUMNS}
        for row in data:
            for name, cell in zip(COLUMNS, row):
                cols[name].append(cell)
        arrays = {
            name: np.array([float(v) for v in cols[name]], dtype=float)
            for name in COLUMNS[:-1]
        }
        arrays["encoder_count"] = np.array([int(v) for v in cols["encoder_count"]], dtype=np.int64)
        return cls(meta=meta, **arrays)

    @classmethod
    def load(cls, path) -> "RunRecord":
        with open(path) as fh:
            return cls.from_csv(fh.read())
