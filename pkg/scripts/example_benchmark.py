#!/usr/bin/env python3

"""Ad-hoc benchmark that replays the two worked examples without the CLI.

It solves the three-player game forward, synthesises an equivalent game with
the model-based solver, then repeats the two-player example with the
model-free solver on probing data. Printed gains can be compared by eye with
the published values kept in ``invgame.model.catalog``.
"""

from __future__ import annotations

import time
from typing import Sequence

import numpy as np

from invgame.data import NoiseSpec, build_integral_dataset, simulate_closed_loop, uniform_boundaries
from invgame.irl import Algorithm1Config, SynthesizedGame, run_algorithm1, run_algorithm2, verify_equivalent
from invgame.model import FeedbackSet, GameSpec, catalog
from invgame.solver import solve_game


# --------------------------------------------------------------------------- helpers


def print_gains(label: str, gains: FeedbackSet, reference: FeedbackSet) -> None:
    print(f"\n=== {label} ===")
    for i, (f, f_ref) in enumerate(zip(gains, reference)):
        worst = float(np.max(np.abs(f - f_ref)))
        print(f"  F_{i + 1} = {np.array2string(f, precision=4)}   (max dev {worst:.2e})")


def print_result(label: str, result: SynthesizedGame, reference: FeedbackSet, seconds: float) -> None:
    print_gains(label, result.F_star, reference)
    print(f"  iterations = {result.iterations}, converged = {result.converged}, {seconds:.2f} s")
    for i, q in enumerate(result.Q_star):
        print(f"  Q_{i + 1}* = {np.array2string(q, precision=4).replace(chr(10), ' ')}")
    if result.spec is not None:
        report = verify_equivalent(result.spec, result.F_star, 1e-6)
        print(f"  equivalence: {report.verdict.value}")


def three_player() -> None:
    start = time.perf_counter()
    solved = solve_game(catalog.THREE_PLAYER_DEMONSTRATED, eps=1e-12)
    print_gains("Three players, forward solve", solved.feedback, catalog.THREE_PLAYER_FEEDBACK)
    print(f"  {solved.iterations} Lyapunov iterations, {time.perf_counter() - start:.3f} s")

    config = Algorithm1Config(learning_rates=catalog.THREE_PLAYER_LEARNING_RATES, delta=1e-8)
    dynamics = GameSpec.dynamics_only(catalog.THREE_PLAYER_A, catalog.THREE_PLAYER_B)
    start = time.perf_counter()
    result = run_algorithm1(
        dynamics,
        None,
        catalog.THREE_PLAYER_INITIAL_Q,
        catalog.THREE_PLAYER_INITIAL_R,
        config,
        target=solved.feedback,
    )
    print_result("Three players, model-based synthesis", result, catalog.THREE_PLAYER_FEEDBACK, time.perf_counter() - start)


def two_player(seeds: Sequence[int] = (0, 1, 2, 3, 4)) -> None:
    demonstrated = catalog.TWO_PLAYER_DEMONSTRATED
    target = solve_game(demonstrated, eps=1e-12).feedback
    config = Algorithm1Config(learning_rates=catalog.TWO_PLAYER_LEARNING_RATES, delta=1e-8)
    for seed in seeds:
        noise = NoiseSpec(seed=seed)
        start = time.perf_counter()
        probe = simulate_closed_loop(demonstrated, target, [1.0, -1.0], step=1e-4, horizon=2.0, noise=noise)
        dataset = build_integral_dataset(probe, uniform_boundaries(probe, 0.01))
        result = run_algorithm2(
            None,
            catalog.TWO_PLAYER_INITIAL_Q,
            catalog.TWO_PLAYER_INITIAL_R,
            config,
            target=target,
            dataset=dataset,
            reference_dynamics=demonstrated,
        )
        print_result(f"Two players, model-free synthesis (seed {seed})", result, catalog.TWO_PLAYER_FEEDBACK, time.perf_counter() - start)
        if result.B_estimate is not None:
            for i, b in enumerate(result.B_estimate):
                print(f"  B_{i + 1} estimate = {np.array2string(b.ravel(), precision=4)}")


def main() -> None:
    three_player()
    two_player()


if __name__ == "__main__":
    main()
