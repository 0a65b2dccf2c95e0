"""Scenario execution behind the ``run``, ``demo`` and ``verify`` commands.

Exit codes: 0 for a converged run (or an equivalent game), 1 for input
errors, 2 for numerical failures and runs that did not converge. Input errors
are detected before any artifact is written.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np

from invgame.data.estimation import estimate_feedback
from invgame.data.integrals import IntegralDataset, build_integral_dataset, uniform_boundaries
from invgame.data.simulation import TrajectoryLog, sample_every, simulate_closed_loop
from invgame.errors import DefinitenessError, DimensionError, GameError, ScenarioError
from invgame.io.csv_formats import read_trajectory_csv, write_trajectory_csv
from invgame.io.report import ReportPaths, game_to_payload, generate_report, verification_to_payload, write_json
from invgame.io.scenario import Scenario, ScenarioKind, load_feedback, load_game, load_scenario
from invgame.irl.equivalence import AdjustmentRequest, enumerate_equivalent_family, verify_equivalent
from invgame.irl.model_based import run_algorithm1
from invgame.irl.model_free import run_algorithm2
from invgame.irl.results import SynthesizedGame
from invgame.model.game import GameSpec
from invgame.solver.riccati import LyapunovIterationResult, are_residual, evaluate_cost, solve_game

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILURE = 2

_INPUT_ERRORS = (ScenarioError, DimensionError, DefinitenessError)


@dataclass
class RunOutcome:
    scenario: Scenario
    exit_code: int
    summary: Dict[str, Any]
    demonstration: Optional[TrajectoryLog] = None
    probe: Optional[TrajectoryLog] = None
    dataset: Optional[IntegralDataset] = None
    result: Optional[SynthesizedGame] = None
    game_payload: Optional[Dict[str, Any]] = None
    verification: Optional[Dict[str, Any]] = None

    def write(self, out_dir: Path, *, trace_every: int = 1) -> ReportPaths:
        return generate_report(
            self.scenario.name,
            self.summary,
            root_dir=out_dir,
            demonstration=self.demonstration,
            probe=self.probe,
            dataset=self.dataset,
            result=self.result,
            game_payload=self.game_payload,
            verification=self.verification,
            trace_every=trace_every,
        )


def _check_log_matches(log: TrajectoryLog, dynamics: GameSpec, source: Path) -> None:
    if log.n != dynamics.n or log.m != dynamics.m:
        raise ScenarioError(
            f"log has n={log.n}, m={log.m}; the dynamics need n={dynamics.n}, m={dynamics.m}",
            path=str(source),
        )


def solve_demonstrated(scenario: Scenario) -> LyapunovIterationResult:
    if scenario.demonstrated is None:
        raise ScenarioError("needs demonstrated costs", path="demonstrated")
    return solve_game(scenario.demonstrated, scenario.initial_feedback, eps=1e-10, max_iter=1000)


def demonstration(scenario: Scenario) -> Tuple[TrajectoryLog, Optional[LyapunovIterationResult]]:
    """Demonstrated trajectory, read from CSV or simulated from the demonstrated game.

    A model-free scenario without a probe section excites the demonstration
    itself with the scenario noise.
    """
    if scenario.demonstration_csv is not None:
        log = read_trajectory_csv(scenario.demonstration_csv)
        _check_log_matches(log, scenario.dynamics, scenario.demonstration_csv)
        return log, None
    solved = solve_demonstrated(scenario)
    return simulate_demonstration(scenario, solved), solved


def simulate_demonstration(scenario: Scenario, solved: LyapunovIterationResult) -> TrajectoryLog:
    excite = scenario.kind is ScenarioKind.MODEL_FREE and scenario.probe is None
    settings = scenario.simulation
    log = simulate_closed_loop(
        scenario.demonstrated,
        solved.feedback,
        settings.x0,
        step=settings.step,
        horizon=settings.horizon,
        noise=scenario.noise if excite else None,
    )
    if log.diverged:
        logger.warning("Demonstration diverged; only %d samples kept", len(log))
    return log


def _verify(scenario: Scenario, result: SynthesizedGame) -> Dict[str, Any]:
    if result.spec is None:
        return {"verdict": "undetermined", "message": "Synthesised game carries no dynamics."}
    report = verify_equivalent(result.spec, result.F_star, scenario.verify_tolerance)
    family = ()
    if scenario.adjustments:
        requests = [AdjustmentRequest(result, change) for change in scenario.adjustments]
        family = enumerate_equivalent_family(result, requests, tol=scenario.verify_tolerance)
    if not report.equivalent:
        logger.warning("Synthesised game failed its equivalence check: %s", report.message)
    return verification_to_payload(report, family)


def _forward(scenario: Scenario) -> RunOutcome:
    spec = scenario.demonstrated
    if spec is None:
        spec = scenario.dynamics.with_costs(scenario.initial_Q, scenario.initial_R)
    solved = solve_game(spec, scenario.initial_feedback, eps=scenario.config.epsilons(spec.N), max_iter=scenario.config.max_inner)
    settings = scenario.simulation
    log = simulate_closed_loop(spec, solved.feedback, settings.x0, step=settings.step, horizon=settings.horizon)
    payload = game_to_payload(spec, solved.values, solved.feedback)
    payload["costs"] = evaluate_cost(solved.values, settings.x0)
    payload["are_residual"] = list(are_residual(spec, solved.values, solved.feedback).norms)
    summary = {
        "scenario": scenario.name,
        "algorithm": scenario.kind.value,
        "status": "converged",
        "iterations": solved.iterations,
    }
    return RunOutcome(scenario, EXIT_OK, summary, demonstration=log, game_payload=payload)


def execute_scenario(scenario: Scenario) -> RunOutcome:
    """Run one scenario in memory; nothing is written here."""
    if scenario.kind is ScenarioKind.FORWARD:
        return _forward(scenario)

    log, solved = demonstration(scenario)
    indices = sample_every(log, scenario.simulation.sample_interval)
    probe_log = dataset = None
    if scenario.kind is ScenarioKind.MODEL_BASED:
        result = run_algorithm1(
            scenario.dynamics, log, scenario.initial_Q, scenario.initial_R, scenario.config, sample_indices=indices
        )
    else:
        target = estimate_feedback(log, indices)
        interval = scenario.simulation.sample_interval
        source = log
        if scenario.probe is not None:
            probe = scenario.probe
            probe_log = simulate_closed_loop(
                scenario.dynamics,
                target,
                probe.x0 if probe.x0 is not None else scenario.simulation.x0,
                step=probe.step,
                horizon=probe.horizon,
                noise=scenario.noise,
            )
            interval, source = probe.interval, probe_log
        dataset = build_integral_dataset(source, uniform_boundaries(source, interval))
        result = run_algorithm2(
            log,
            scenario.initial_Q,
            scenario.initial_R,
            scenario.config,
            target=target,
            dataset=dataset,
            reference_dynamics=scenario.dynamics,
        )

    summary: Dict[str, Any] = {
        "scenario": scenario.name,
        "algorithm": scenario.kind.value,
        "status": "converged" if result.converged else "not_converged",
        "iterations": result.iterations,
        "final_D": list(result.trace.D[-1]) if len(result.trace) else [],
        "stable_throughout": result.trace.stable_throughout,
        "samples": len(log),
    }
    if scenario.noise is not None:
        summary["seed"] = scenario.noise.seed
    if solved is not None:
        summary["demonstrated_F"] = [np.asarray(f).tolist() for f in solved.feedback]
        summary["gap_to_demonstrated"] = result.F_star.distance(solved.feedback)
    verification = _verify(scenario, result)
    exit_code = EXIT_OK if result.converged else EXIT_FAILURE
    return RunOutcome(
        scenario,
        exit_code,
        summary,
        demonstration=log,
        probe=probe_log,
        dataset=dataset,
        result=result,
        verification=verification,
    )


def _load(path: Path, seed: Optional[int]) -> Optional[Scenario]:
    try:
        scenario = load_scenario(path)
    except _INPUT_ERRORS as exc:
        logger.error("%s: %s", path, exc)
        return None
    return scenario if seed is None else scenario.with_seed(seed)


def run_scenario(path: Path, *, out_dir: Path, seed: Optional[int] = None, trace_every: int = 1) -> int:
    """Load, run and report one scenario.

    Errors while loading exit 1. During the run only a bad demonstration file
    counts as an input error; every other failure exits 2 with a failure summary.
    """
    scenario = _load(path, seed)
    if scenario is None:
        return EXIT_INPUT
    try:
        outcome = execute_scenario(scenario)
    except ScenarioError as exc:
        logger.error("%s: %s", path, exc)
        return EXIT_INPUT
    except (GameError, ValueError) as exc:
        logger.error("%s: %s failed: %s", path, type(exc).__name__, exc)
        failure = {"scenario": scenario.name, "status": "failed", "error": type(exc).__name__, "message": str(exc)}
        generate_report(scenario.name, failure, root_dir=out_dir)
        return EXIT_FAILURE

    paths = outcome.write(out_dir, trace_every=trace_every)
    logger.info("%s: %s, artifacts in %s", scenario.name, outcome.summary["status"], paths.base_dir)
    print(f"{scenario.name}: {outcome.summary['status']} ({outcome.summary.get('iterations', 0)} iterations)")
    return outcome.exit_code


def _format_matrix(matrix: np.ndarray) -> str:
    return np.array2string(np.asarray(matrix), precision=4, suppress_small=True)


def generate_demo(path: Path, *, out_dir: Path, seed: Optional[int] = None) -> int:
    """Solve the demonstrated game, write its trajectory and print ``F_i,d`` and ``K_i,d``."""
    scenario = _load(path, seed)
    if scenario is None:
        return EXIT_INPUT
    if scenario.demonstrated is None:
        logger.error("%s: needs demonstrated costs", path)
        return EXIT_INPUT
    try:
        solved = solve_demonstrated(scenario)
    except (GameError, ValueError) as exc:
        logger.error("%s: demonstrated game could not be solved: %s", path, exc)
        return EXIT_FAILURE

    log = simulate_demonstration(scenario, solved)
    target = Path(out_dir) / scenario.name
    target.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(log, target / "demonstration.csv")

    print(f"=== {scenario.name}: demonstrated equilibrium ===")
    for i, (f, k) in enumerate(zip(solved.feedback, solved.values)):
        print(f"F_{i + 1},d = {_format_matrix(f)}")
        print(f"K_{i + 1},d =\n{_format_matrix(k)}")
    print(f"Trajectory written to {target / 'demonstration.csv'}")
    return EXIT_OK


def verify(game_path: Path, feedback_path: Path, *, out_dir: Path, tol: float = 1e-8) -> int:
    """Check that the gains in ``feedback_path`` are an equilibrium of the game in ``game_path``."""
    try:
        game = load_game(game_path)
        feedback = load_feedback(feedback_path)
        feedback.check_against(game)
    except _INPUT_ERRORS as exc:
        logger.error("%s", exc)
        return EXIT_INPUT
    try:
        report = verify_equivalent(game, feedback, tol)
    except (GameError, ValueError) as exc:
        logger.error("Verification failed: %s", exc)
        return EXIT_FAILURE

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(verification_to_payload(report), out / "verification.json")
    print(f"Verdict: {report.verdict.value} (max relative residual {max(report.residual_norms, default=float('nan')):.3e})")
    return EXIT_OK if report.equivalent else EXIT_FAILURE
