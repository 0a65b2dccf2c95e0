"""Inverse game synthesis with known dynamics.

Gradient descent on each player's value matrix pulls ``F_i = R_ii^-1 B_i^T K_i``
toward the demonstrated gains; the state weights are then read off the
coupled Riccati equations so that the synthesised game has ``K_i`` as its
solution.
"""

from __future__ import annotations

import logging
from typing import Callable, Optional, Sequence, Tuple

import numpy as np

from invgame.errors import DimensionError, DivergenceError, StabilityError, StallError
from invgame.model.game import FeedbackSet, GameSpec, Matrix, MatrixLike, ValueSet, symmetrize
from invgame.solver.riccati import (
    are_residual,
    check_admissible_costs,
    closed_loop_matrix,
    feedback_from_value,
    lyapunov_iterations,
    spectral_abscissa,
)
from invgame.data.estimation import estimate_feedback
from invgame.data.simulation import TrajectoryLog

from .results import Algorithm1Config, ConvergenceTrace, GapState, QUpdateMode, SynthesizedGame

logger = logging.getLogger(__name__)


def feedback_gap(current: FeedbackSet, target: FeedbackSet) -> GapState:
    if len(current) != len(target):
        raise DimensionError(f"Comparing {len(current)} gains against {len(target)} targets.")
    gaps = []
    for i, (f, f_hat) in enumerate(zip(current, target)):
        if f.shape != f_hat.shape:
            raise DimensionError(f"F_{i + 1} has shape {f.shape}, target has {f_hat.shape}.")
        gaps.append(f - f_hat)
    return GapState(tuple(gaps))


def input_direction(spec: GameSpec, player: int) -> Matrix:
    """``R_ii^-1 B_i^T``, the linear map from ``K_i`` to ``F_i``."""
    return np.linalg.solve(spec.R[player][player], spec.B[player].T)


def symmetric_gradient(direction: Matrix, gap: Matrix) -> Matrix:
    return gap.T @ direction + direction.T @ gap


def gap_gradient(spec: GameSpec, gap_i: MatrixLike, player: int) -> Matrix:
    """Gradient of ``tr(d_i^T d_i)`` over symmetric ``K_i``: ``d^T R^-1 B^T + B R^-1 d``."""
    gap_i = np.atleast_2d(np.asarray(gap_i, dtype=float))
    return symmetric_gradient(input_direction(spec, player), gap_i)


def descend(
    direction: Matrix,
    value: Matrix,
    target: Matrix,
    rate: float,
    *,
    line_search: bool,
    max_halvings: int,
    player: int,
    iteration: int,
) -> Matrix:
    """One gradient step on ``K`` for the objective ``||direction @ K - target||_F^2``.

    With ``line_search`` the rate is halved until the objective strictly drops.
    """
    gap = direction @ value - target
    objective = float(np.sum(gap * gap))
    if objective == 0.0:
        return value
    gradient = symmetric_gradient(direction, gap)
    candidate = symmetrize(value - rate * gradient)
    if not line_search:
        return candidate
    for _ in range(max_halvings + 1):
        trial = direction @ candidate - target
        if float(np.sum(trial * trial)) < objective:
            return candidate
        rate *= 0.5
        candidate = symmetrize(value - rate * gradient)
    raise StallError(
        f"Player {player + 1}: no decreasing step after {max_halvings} halvings at iteration {iteration} "
        f"(gap {objective:.3e}).",
        player=player,
        iteration=iteration,
        gap=objective,
    )


def gradient_step(
    spec: GameSpec,
    vals: ValueSet,
    target: FeedbackSet,
    config: Algorithm1Config,
    *,
    iteration: int = 0,
) -> Tuple[ValueSet, FeedbackSet, GapState]:
    """Move every ``K_i`` against its gap gradient; returns the new values, gains and gap."""
    rates = config.rates(spec.N)
    updated = []
    for i in range(spec.N):
        updated.append(
            descend(
                input_direction(spec, i),
                vals[i],
                target[i],
                rates[i],
                line_search=config.line_search,
                max_halvings=config.max_halvings,
                player=i,
                iteration=iteration,
            )
        )
    values = ValueSet(tuple(updated))
    fb = feedback_from_value(spec, values)
    return values, fb, feedback_gap(fb, target)


def inverse_q_update(spec: GameSpec, vals: ValueSet) -> Tuple[Matrix, ...]:
    """State weights that make ``vals`` an exact solution of the coupled AREs of ``spec``."""
    fb = feedback_from_value(spec, vals)
    closed = closed_loop_matrix(spec, fb)
    weights = []
    for i, k in enumerate(vals):
        coupling = sum(f.T @ spec.R[i][j] @ f for j, f in enumerate(fb))
        weights.append(symmetrize(-closed.T @ k - k @ closed - coupling))
    return tuple(weights)


def _safe_abscissa(spec: GameSpec, fb: FeedbackSet) -> float:
    try:
        return spectral_abscissa(closed_loop_matrix(spec, fb))
    except ValueError:
        return float("nan")


StepFunction = Callable[[ValueSet, int], Tuple[ValueSet, FeedbackSet]]
QFunction = Callable[[ValueSet, FeedbackSet], Tuple[Matrix, ...]]


def gradient_loop(
    values: ValueSet,
    fb: FeedbackSet,
    target: FeedbackSet,
    config: Algorithm1Config,
    *,
    step: StepFunction,
    abscissa: Callable[[FeedbackSet], float],
    q_weights: QFunction,
) -> Tuple[ValueSet, FeedbackSet, ConvergenceTrace, bool]:
    """Repeat ``step`` until every ``D_i < delta_i`` or ``max_outer`` steps ran.

    Records one trace entry per visited iterate, the starting point included.
    Without convergence the visited iterate with the smallest ``sum(D_i)`` is returned.
    """
    players = len(target)
    deltas = config.deltas(players)
    trace = ConvergenceTrace(players)
    gap = feedback_gap(fb, target)
    start = gap.D
    best = (sum(gap.D), values, fb)
    converged = False
    for p in range(config.max_outer + 1):
        trace.record(gap, abscissa(fb))
        if config.q_update_mode is QUpdateMode.EVERY_STEP or (config.snapshot_every and p % config.snapshot_every == 0):
            trace.snapshot(q_weights(values, fb), values.K)
        if gap.converged(deltas):
            converged = True
            break
        if p == config.max_outer:
            break
        for i, (now, first) in enumerate(zip(gap.D, start)):
            if now > config.divergence_factor * max(first, deltas[i]):
                raise DivergenceError(
                    f"Player {i + 1} gap grew from {first:.3e} to {now:.3e}; reduce its learning rate.",
                    player=i,
                    iteration=p,
                )
        values, fb = step(values, p)
        gap = feedback_gap(fb, target)
        if sum(gap.D) < best[0]:
            best = (sum(gap.D), values, fb)
        logger.debug("Iteration %d: D = %s", p + 1, ", ".join(f"{v:.3e}" for v in gap.D))

    if converged:
        logger.info("Gradient loop converged after %d iterations", len(trace) - 1)
    else:
        logger.warning("Gradient loop stopped after %d iterations without meeting delta", len(trace) - 1)
        _, values, fb = best
        logger.info("Returning the iterate with the smallest total gap %.3e", best[0])
    return values, fb, trace, converged


def run_algorithm1(
    spec_dynamics: GameSpec,
    log: Optional[TrajectoryLog],
    init_Q: Sequence[MatrixLike],
    R: Sequence[Sequence[MatrixLike]],
    config: Algorithm1Config = Algorithm1Config(),
    *,
    target: Optional[FeedbackSet] = None,
    sample_indices: Optional[Sequence[int]] = None,
) -> SynthesizedGame:
    """Synthesise an equivalent game from demonstrations under known ``A`` and ``B_i``.

    ``target`` replaces the estimation from ``log`` when given.
    """
    config.check(spec_dynamics.N)
    spec = spec_dynamics.with_costs(init_Q, R)
    check_admissible_costs(spec)
    if target is None:
        if log is None:
            raise ValueError("A trajectory log or an explicit target feedback is required.")
        target = estimate_feedback(log, sample_indices)
    target.check_against(spec)

    if config.skip_initial_solve:
        if spectral_abscissa(spec.A) >= 0.0:
            raise StabilityError("Skipping the initial solve needs a stable open loop.", iteration=0)
        values, fb = ValueSet.zeros(spec), FeedbackSet.zeros(spec)
        logger.info("Open loop is stable; starting the gradient loop from K = 0")
    else:
        initial = lyapunov_iterations(spec, target, eps=config.epsilons(spec.N), max_iter=config.max_inner)
        values, fb = initial.values, initial.feedback
        logger.info("Initialised game solved in %d Lyapunov iterations", initial.iterations)
    initial_values, initial_feedback = values, fb

    def step(current: ValueSet, iteration: int) -> Tuple[ValueSet, FeedbackSet]:
        new_values, new_fb, _ = gradient_step(spec, current, target, config, iteration=iteration)
        return new_values, new_fb

    values, fb, trace, converged = gradient_loop(
        values,
        fb,
        target,
        config,
        step=step,
        abscissa=lambda gains: _safe_abscissa(spec, gains),
        q_weights=lambda current, _gains: inverse_q_update(spec, current),
    )

    Q_star = inverse_q_update(spec, values)
    synthesized = spec.with_state_weights(Q_star)
    logger.info("Synthesised game ARE residual %.2e", are_residual(synthesized, values, fb).max_norm)
    return SynthesizedGame(
        Q_star=Q_star,
        R=spec.R,
        K_star=values,
        F_star=fb,
        trace=trace,
        converged=converged,
        target=target,
        spec=synthesized,
        initial_values=initial_values,
        initial_feedback=initial_feedback,
    )
