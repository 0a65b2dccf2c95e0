"""CSV encodings of trajectory logs, convergence traces and integral datasets.

Numbers are written with 17 significant digits so that reading a file back
reproduces the original doubles exactly.
"""

from __future__ import annotations

import csv
import re
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Tuple

import numpy as np

from invgame.data.integrals import IntegralDataset
from invgame.data.simulation import TrajectoryLog
from invgame.errors import DimensionError, ScenarioError
from invgame.irl.results import ConvergenceTrace

_INPUT_COLUMN = re.compile(r"^u(\d+)_(\d+)$")


def format_number(value: float) -> str:
    return format(float(value), ".17g")


def _write_rows(path: Path, header: Sequence[str], rows: Iterable[Sequence[float]]) -> None:
    with Path(path).open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_number(value) for value in row])


def _read_rows(path: Path) -> Tuple[List[str], np.ndarray]:
    try:
        with Path(path).open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader)
            rows = [[float(cell) for cell in row] for row in reader if row]
        if any(len(row) != len(header) for row in rows):
            raise ValueError("row length differs from the header")
    except StopIteration as exc:
        raise ScenarioError("CSV file is empty", path=str(path)) from exc
    except ValueError as exc:
        raise ScenarioError(f"malformed row ({exc})", path=str(path)) from exc
    data = np.asarray(rows, dtype=float).reshape(len(rows), len(header))
    return header, data


def trajectory_header(n: int, input_dims: Sequence[int]) -> List[str]:
    header = ["t"] + [f"x{k + 1}" for k in range(n)]
    for i, mi in enumerate(input_dims):
        header.extend(f"u{i + 1}_{k + 1}" for k in range(mi))
    return header


def write_trajectory_csv(log: TrajectoryLog, path: Path) -> None:
    table = np.column_stack((log.times, log.states, *log.inputs))
    _write_rows(path, trajectory_header(log.n, log.m), table)


def read_trajectory_csv(path: Path) -> TrajectoryLog:
    header, data = _read_rows(path)
    if not header or header[0] != "t":
        raise ScenarioError("first column must be 't'", path=str(path))
    state_columns = [k for k, name in enumerate(header) if re.fullmatch(r"x\d+", name)]
    players: Dict[int, List[int]] = {}
    for k, name in enumerate(header):
        match = _INPUT_COLUMN.match(name)
        if match:
            players.setdefault(int(match.group(1)), []).append(k)
    if not state_columns or not players:
        raise ScenarioError("needs x and u columns", path=str(path))
    if sorted(players) != list(range(1, len(players) + 1)):
        raise ScenarioError("player numbering in u columns must start at 1 without gaps", path=str(path))
    inputs = tuple(data[:, players[i]] for i in sorted(players))
    return TrajectoryLog(data[:, 0], data[:, state_columns], inputs)


def write_trace_csv(trace: ConvergenceTrace, path: Path, *, every: int = 1) -> None:
    """One row per recorded iteration ``p``; with ``every > 1`` the last row is always kept.

    Traces of data-driven runs carry ``condition_i`` columns: the condition
    estimate of player i's least-squares system, fixed by the initial solve.
    """
    if every < 1:
        raise ValueError("Trace stride must be at least 1.")
    players = trace.players
    header = ["p"] + [f"D_{i + 1}" for i in range(players)] + [f"gapnorm_{i + 1}" for i in range(players)]
    header.append("spectral_abscissa")
    header += [f"condition_{i + 1}" for i in range(len(trace.conditions))]
    last = len(trace) - 1
    rows = (
        [p, *trace.D[p], *trace.gap_norms[p], trace.spectral_abscissa[p], *trace.conditions]
        for p in range(len(trace))
        if p % every == 0 or p == last
    )
    _write_rows(path, header, rows)


def read_trace_csv(path: Path) -> ConvergenceTrace:
    header, data = _read_rows(path)
    players = sum(1 for name in header if name.startswith("D_"))
    conditions = sum(1 for name in header if name.startswith("condition_"))
    if header[:1] != ["p"] or len(header) != 2 * players + 2 + conditions:
        raise ScenarioError("unexpected trace header", path=str(path))
    trace = ConvergenceTrace(players)
    column = 1 + 2 * players
    for row in data:
        trace.D.append(tuple(float(v) for v in row[1 : 1 + players]))
        trace.gap_norms.append(tuple(float(v) for v in row[1 + players : column]))
        trace.spectral_abscissa.append(float(row[column]))
    if conditions and len(data):
        trace.conditions = tuple(float(v) for v in data[0, column + 1 :])
    return trace


def dataset_header(dataset: IntegralDataset) -> List[str]:
    header = ["t_start", "t_end"]
    header += [f"dxx_{k + 1}" for k in range(dataset.delta_xx.shape[1])]
    header += [f"ixx_{k + 1}" for k in range(dataset.I_xx.shape[1])]
    for i, block in enumerate(dataset.I_xu):
        header += [f"ixu{i + 1}_{k + 1}" for k in range(block.shape[1])]
    header += [f"iqx_{k + 1}" for k in range(dataset.I_qx.shape[1])]
    return header


def write_dataset_csv(dataset: IntegralDataset, path: Path) -> None:
    bounds = dataset.boundaries
    table = np.column_stack(
        (bounds[:-1], bounds[1:], dataset.delta_xx, dataset.I_xx, *dataset.I_xu, dataset.I_qx)
    )
    _write_rows(path, dataset_header(dataset), table)


def read_dataset_csv(path: Path) -> IntegralDataset:
    header, data = _read_rows(path)

    def columns(prefix: str) -> List[int]:
        return [k for k, name in enumerate(header) if re.fullmatch(rf"{prefix}_\d+", name)]

    players = sorted({int(m.group(1)) for m in (re.match(r"^ixu(\d+)_\d+$", name) for name in header) if m})
    if header[:2] != ["t_start", "t_end"] or not players:
        raise ScenarioError("unexpected dataset header", path=str(path))
    boundaries = np.append(data[:, 0], data[-1, 1]) if data.size else np.zeros(1)
    try:
        return IntegralDataset(
            delta_xx=data[:, columns("dxx")],
            I_xx=data[:, columns("ixx")],
            I_xu=tuple(data[:, columns(f"ixu{i}")] for i in players),
            I_qx=data[:, columns("iqx")],
            boundaries=boundaries,
        )
    except DimensionError as exc:
        raise ScenarioError(str(exc), path=str(path)) from exc
