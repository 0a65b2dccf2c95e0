from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Sequence

import numpy as np

from invgame.data.integrals import IntegralDataset
from invgame.data.simulation import TrajectoryLog
from invgame.irl.equivalence import FamilyMember, VerificationReport
from invgame.irl.results import SynthesizedGame
from invgame.model.game import FeedbackSet, GameSpec, Matrix, ValueSet

from .csv_formats import write_dataset_csv, write_trace_csv, write_trajectory_csv


@dataclass
class ReportPaths:
    base_dir: Path
    trajectory_path: Optional[Path]
    trace_path: Optional[Path]
    game_path: Optional[Path]
    verification_path: Optional[Path]
    summary_path: Path
    probe_path: Optional[Path] = None
    dataset_path: Optional[Path] = None


def _matrix(matrix: Matrix) -> list:
    return np.asarray(matrix, dtype=float).tolist()


def _matrices(matrices: Optional[Sequence[Matrix]]) -> Optional[list]:
    if matrices is None:
        return None
    return [_matrix(m) for m in matrices]


def _finite(value: float) -> Optional[float]:
    return float(value) if math.isfinite(value) else None


def game_to_payload(spec: GameSpec, values: Optional[ValueSet] = None, fb: Optional[FeedbackSet] = None) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "A": _matrix(spec.A),
        "B": _matrices(spec.B),
        "Q": _matrices(spec.Q),
        "R": [_matrices(row) for row in spec.R],
    }
    if values is not None:
        payload["K"] = _matrices(values.K)
    if fb is not None:
        payload["F"] = _matrices(fb.F)
    return payload


def synthesized_to_payload(result: SynthesizedGame) -> Dict[str, Any]:
    payload: Dict[str, Any] = {}
    if result.spec is not None:
        payload["A"] = _matrix(result.spec.A)
        payload["B"] = _matrices(result.spec.B)
    payload.update(
        {
            "Q": _matrices(result.Q_star),
            "R": [_matrices(row) for row in result.R],
            "K": _matrices(result.K_star.K),
            "F_star": _matrices(result.F_star.F),
            "target": _matrices(result.target.F),
            "converged": result.converged,
            "iterations": result.iterations,
            "feedback_gap": result.F_star.distance(result.target),
        }
    )
    if result.B_estimate is not None:
        payload["B_estimate"] = _matrices(result.B_estimate)
    if result.initial_values is not None:
        payload["initial_K"] = _matrices(result.initial_values.K)
    if result.initial_feedback is not None:
        payload["initial_F"] = _matrices(result.initial_feedback.F)
    if result.trace.conditions:
        payload["condition_estimates"] = [_finite(c) for c in result.trace.conditions]
    return payload


def verification_to_payload(report: VerificationReport, family: Sequence[FamilyMember] = ()) -> Dict[str, Any]:
    payload = report.to_payload()
    payload["spectral_abscissa"] = _finite(report.spectral_abscissa)
    payload["feedback_gap"] = _finite(report.feedback_gap)
    if family:
        members = []
        for member in family:
            entry: Dict[str, Any] = {
                "R_offdiag": [
                    {"i": i + 1, "j": j + 1, "value": _matrix(np.atleast_2d(value))}
                    for (i, j), value in member.request.new_R_offdiag.items()
                ]
            }
            if member.spec is not None:
                entry["Q"] = _matrices(member.spec.Q)
            if member.report is not None:
                entry["verdict"] = member.report.verdict.value
                entry["residual_norms"] = list(member.report.residual_norms)
            if member.error:
                entry["error"] = member.error
            members.append(entry)
        payload["adjusted_games"] = members
    return payload


def write_json(payload: Dict[str, Any], path: Path) -> None:
    path.write_text(json.dumps(payload, indent=2))


def generate_report(
    name: str,
    summary: Dict[str, Any],
    *,
    root_dir: Path,
    demonstration: Optional[TrajectoryLog] = None,
    probe: Optional[TrajectoryLog] = None,
    dataset: Optional[IntegralDataset] = None,
    result: Optional[SynthesizedGame] = None,
    game_payload: Optional[Dict[str, Any]] = None,
    verification: Optional[Dict[str, Any]] = None,
    trace_every: int = 1,
) -> ReportPaths:
    """
    Write the run artifacts under ``root_dir/name``. File contents depend only on the inputs.
    """

    report_dir = Path(root_dir) / name
    report_dir.mkdir(parents=True, exist_ok=True)

    trajectory_path = trace_path = game_path = verification_path = probe_path = dataset_path = None
    if demonstration is not None:
        trajectory_path = report_dir / "trajectory.csv"
        write_trajectory_csv(demonstration, trajectory_path)
    if probe is not None:
        probe_path = report_dir / "probe.csv"
        write_trajectory_csv(probe, probe_path)
    if dataset is not None:
        dataset_path = report_dir / "integral_dataset.csv"
        write_dataset_csv(dataset, dataset_path)
    if result is not None:
        trace_path = report_dir / "trace.csv"
        write_trace_csv(result.trace, trace_path, every=trace_every)
        game_payload = synthesized_to_payload(result)
    if game_payload is not None:
        game_path = report_dir / "game.json"
        write_json(game_payload, game_path)
    if verification is not None:
        verification_path = report_dir / "verification.json"
        write_json(verification, verification_path)

    summary_path = report_dir / "summary.json"
    write_json(summary, summary_path)
    return ReportPaths(
        base_dir=report_dir,
        trajectory_path=trajectory_path,
        trace_path=trace_path,
        game_path=game_path,
        verification_path=verification_path,
        summary_path=summary_path,
        probe_path=probe_path,
        dataset_path=dataset_path,
    )
