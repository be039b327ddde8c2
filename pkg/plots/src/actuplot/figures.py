"""Figure layouts for the experiment CSVs.

Each figure overlays the dashed setpoint with the measured traces of its
runs, mirroring the usual panels for these evaluations:

  fig3  step responses of the P / PD / PID controllers
  fig4  staircase under hanging weights, PD (top) vs PD-g (bottom)
  fig5  smooth trajectory: position traces plus tracking error
  fig6  flexible beam: step responses (top) and trajectory (bottom)
  fig8  disturbance timeline: position, velocity, sensed current, with
        detected events shaded

Rendering is deterministic: identical inputs produce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

FIGURES = ("fig3", "fig4", "fig5", "fig6", "fig8")

BASE_COLUMNS = ("t", "setpoint_mm", "position_mm")
TIMELINE_COLUMNS = BASE_COLUMNS + ("velocity_mm_s", "sensed_current_A")

DPI = 120


class RenderError(ValueError):
    pass


class MissingColumn(RenderError):
    def __init__(self, column: str, path: str):
        super().__init__(f"column {column!r} missing from {path}")
        self.column = column


@dataclass
class FigureSpec:
    figure_id: str
    run_paths: list[str]
    out_path: str
    events_path: str | None = None   # fig8 only: shade detected events
    title: str | None = None
    style: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.figure_id not in FIGURES:
            raise RenderError(
                f"unknown figure {self.figure_id!r}; expected one of {FIGURES}"
            )
        if not self.run_paths:
            raise RenderError("at least one run.csv is required")


@dataclass
class Run:
    label: str
    frame: pd.DataFrame

    @property
    def is_step_like(self) -> bool:
        """Setpoint takes at most two distinct values (a step, not a path)."""
        return self.frame["setpoint_mm"].nunique() <= 2


def load_run(path: str, required: tuple[str, ...] = BASE_COLUMNS) -> Run:
    """Read one run.csv; the '#' metadata header carries the run label."""
    label = Path(path).stem
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            if key.strip() == "scenario" and value.strip():
                label = value.strip()
    frame = pd.read_csv(path, comment="#")
    for column in required:
        if column not in frame.columns:
            raise MissingColumn(column, path)
    if frame.empty:
        raise RenderError(f"{path} contains no data rows")
    return Run(label=label, frame=frame)


def load_events(path: str) -> pd.DataFrame:
    events = pd.read_csv(path)
    for column in ("t_start", "t_end", "channel"):
        if column not in events.columns:
            raise MissingColumn(column, path)
    return events


def _plot_runs(ax, runs: list[Run], with_setpoint: bool = True) -> None:
    if with_setpoint:
        first = runs[0].frame
        ax.plot(first["t"], first["setpoint_mm"], "k--", lw=1.0, label="setpoint")
    for run in runs:
        ax.plot(run.frame["t"], run.frame["position_mm"], lw=1.0, label=run.label)
    ax.set_ylabel("tendon length [mm]")
    ax.legend(fontsize=7, loc="best")
    ax.grid(True, alpha=0.3)


def _render_fig3(runs: list[Run], fig) -> None:
    ax = fig.subplots(1, 1)
    _plot_runs(ax, runs)
    ax.set_xlabel("time [s]")
    ax.set_title("Step responses")


def _render_fig4(runs: list[Run], fig) -> None:
    plain = [r for r in runs if "pdg" not in r.label.lower()]
    compensated = [r for r in runs if "pdg" in r.label.lower()]
    if not plain or not compensated:
        # nothing to split on; draw everything in one panel
        ax = fig.subplots(1, 1)
        _plot_runs(ax, runs)
        ax.set_xlabel("time [s]")
    else:
        axes = fig.subplots(2, 1, sharex=True)
        _plot_runs(axes[0], plain)
        axes[0].set_title("PD")
        _plot_runs(axes[1], compensated)
        axes[1].set_title("PD-g (gravity compensation)")
        axes[1].set_xlabel("time [s]")


def _render_fig5(runs: list[Run], fig) -> None:
    axes = fig.subplots(2, 1, sharex=True)
    _plot_runs(axes[0], runs)
    axes[0].set_title("Smooth trajectory under load")
    for run in runs:
        error = run.frame["setpoint_mm"] - run.frame["position_mm"]
        axes[1].plot(run.frame["t"], error, lw=1.0, label=run.label)
    axes[1].set_ylabel("tracking error [mm]")
    axes[1].set_xlabel("time [s]")
    axes[1].legend(fontsize=7, loc="best")
    axes[1].grid(True, alpha=0.3)


def _render_fig6(runs: list[Run], fig) -> None:
    steps = [r for r in runs if r.is_step_like]
    paths = [r for r in runs if not r.is_step_like]
    if steps and paths:
        axes = fig.subplots(2, 1)
        _plot_runs(axes[0], steps)
        axes[0].set_title("Beam step responses")
        _plot_runs(axes[1], paths)
        axes[1].set_title("Beam trajectory")
        axes[1].set_xlabel("time [s]")
    else:
        ax = fig.subplots(1, 1)
        _plot_runs(ax, runs)
        ax.set_title("Flexible beam response")
        ax.set_xlabel("time [s]")


def _render_fig8(runs: list[Run], fig, events: pd.DataFrame | None) -> None:
    run = runs[0]
    axes = fig.subplots(3, 1, sharex=True)
    frame = run.frame
    axes[0].plot(frame["t"], frame["position_mm"], lw=1.0)
    axes[0].set_ylabel("position [mm]")
    axes[0].set_title("Proprioceptive disturbance measurement")
    axes[1].plot(frame["t"], frame["velocity_mm_s"], lw=1.0)
    axes[1].set_ylabel("velocity [mm/s]")
    axes[2].plot(frame["t"], frame["sensed_current_A"], lw=0.7)
    axes[2].set_ylabel("sensed current [A]")
    axes[2].set_xlabel("time [s]")
    for ax in axes:
        ax.grid(True, alpha=0.3)
    if events is not None:
        shades = {"velocity": (1, "tab:orange"), "current": (2, "tab:red")}
        for _, event in events.iterrows():
            index_color = shades.get(str(event["channel"]))
            if index_color is None:
                continue
            index, color = index_color
            axes[index].axvspan(
                event["t_start"], event["t_end"], color=color, alpha=0.25, lw=0
            )


def render(spec: FigureSpec) -> str:
    """Render one figure to spec.out_path; returns the output path.

    All inputs are loaded and validated before anything is written, so a
    bad input never leaves a partial image behind.
    """
    spec.validate()
    required = TIMELINE_COLUMNS if spec.figure_id == "fig8" else BASE_COLUMNS
    runs = [load_run(path, required) for path in spec.run_paths]
    events = load_events(spec.events_path) if spec.events_path else None

    width = spec.style.get("width", 7.0)
    height = spec.style.get("height", 4.5 if spec.figure_id == "fig3" else 6.0)
    fig = plt.figure(figsize=(width, height), dpi=DPI)
    try:
        if spec.figure_id == "fig3":
            _render_fig3(runs, fig)
        elif spec.figure_id == "fig4":
            _render_fig4(runs, fig)
        elif spec.figure_id == "fig5":
            _render_fig5(runs, fig)
        elif spec.figure_id == "fig6":
            _render_fig6(runs, fig)
        else:
            _render_fig8(runs, fig, events)
        if spec.title:
            fig.suptitle(spec.title)
        fig.tight_layout()
        fig.savefig(spec.out_path, dpi=DPI, metadata={"Software": "actuplot"})
    finally:
        plt.close(fig)
    return spec.out_path
