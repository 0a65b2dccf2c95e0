from __future__ import annotations

from .csv_formats import (
    read_dataset_csv,
    read_trace_csv,
    read_trajectory_csv,
    write_dataset_csv,
    write_trace_csv,
    write_trajectory_csv,
)
from .report import ReportPaths, generate_report
from .scenario import Scenario, ScenarioKind, load_feedback, load_game, load_scenario, save_scenario

__all__ = [
    "ReportPaths",
    "Scenario",
    "ScenarioKind",
    "generate_report",
    "load_feedback",
    "load_game",
    "load_scenario",
    "read_dataset_csv",
    "read_trace_csv",
    "read_trajectory_csv",
    "save_scenario",
    "write_dataset_csv",
    "write_trace_csv",
    "write_trajectory_csv",
]
