"""Inverse game synthesis from trajectory data alone.

Every step of the model-based solver that touches ``A`` or ``B_i`` is
replaced by a least-squares fit on interval integrals:

* the initialised game is solved from the integral form of its Lyapunov
  iterations, which also yields ``B_j^T K_i`` for every opponent,
* gradient steps use ``F_i^0 (K_i^0)^-1`` in place of ``R_ii^-1 B_i^T``,
* the final state weights come from the integral form of the Riccati
  equations with the recovered input matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.typing import NDArray
from scipy import linalg

from invgame.data.estimation import estimate_feedback
from invgame.data.integrals import IntegralDataset, build_integral_dataset, uniform_boundaries
from invgame.data.simulation import TrajectoryLog
from invgame.errors import ConvergenceError, DefinitenessError, DimensionError, ExcitationError, RankError
from invgame.model.game import FeedbackSet, GameSpec, Matrix, MatrixLike, ValueSet, as_matrix, min_eigenvalue, per_player, symmetrize
from invgame.model.packing import packed_size, smat_pack, smat_unpack, unvec, vec
from invgame.solver.riccati import check_cost_definiteness, closed_loop_matrix, spectral_abscissa

from .model_based import descend, gradient_loop
from .results import Algorithm1Config, SynthesizedGame

logger = logging.getLogger(__name__)

MAX_CONDITION = 1e10

CostGrid = Tuple[Tuple[Matrix, ...], ...]


def _cost_arrays(Q: Sequence[MatrixLike], R: Sequence[Sequence[MatrixLike]]) -> Tuple[Tuple[Matrix, ...], CostGrid]:
    weights = tuple(symmetrize(q) for q in Q)
    grid = tuple(tuple(as_matrix(r) for r in row) for row in R)
    if len(weights) != len(grid) or any(len(row) != len(grid) for row in grid):
        raise DimensionError(f"{len(weights)} state weights do not match an R grid of {len(grid)} rows.")
    return weights, grid


def _input_dims(R: CostGrid) -> List[int]:
    return [R[j][j].shape[0] for j in range(len(R))]


def _equilibrated_condition(matrix: Matrix) -> float:
    """Condition number after scaling every column to unit norm."""
    norms = np.linalg.norm(matrix, axis=0)
    if matrix.shape[0] < matrix.shape[1] or np.any(norms == 0.0):
        return float("inf")
    return float(np.linalg.cond(matrix / norms))


@dataclass(frozen=True, eq=False)
class PackedUnknowns:
    """Stacked unknowns of one player's system: packed ``K_i``, ``vec(F_i)`` and ``vec(Y_ji)`` per opponent."""

    K_hat: NDArray[np.float64]
    F_vec: NDArray[np.float64]
    Y_vec: Dict[int, NDArray[np.float64]]

    @classmethod
    def split(cls, solution: NDArray[np.float64], n: int, input_dims: Sequence[int], player: int) -> "PackedUnknowns":
        cursor = packed_size(n)
        K_hat = solution[:cursor]
        F_vec = solution[cursor : cursor + n * input_dims[player]]
        cursor += n * input_dims[player]
        Y_vec = {}
        for j, mj in enumerate(input_dims):
            if j == player:
                continue
            Y_vec[j] = solution[cursor : cursor + n * mj]
            cursor += n * mj
        return cls(K_hat, F_vec, Y_vec)

    def value(self) -> Matrix:
        return smat_unpack(self.K_hat)

    def gain(self, rows: int, n: int) -> Matrix:
        return unvec(self.F_vec, rows, n)

    def coupling(self, opponent: int, rows: int, n: int) -> Matrix:
        """``Y_ji = B_j^T K_i`` for opponent ``j``."""
        return unvec(self.Y_vec[opponent], rows, n)


@dataclass(frozen=True, eq=False)
class LeastSquaresSystem:
    H: Matrix
    Xi: NDArray[np.float64]
    condition_estimate: float
    player: int

    def solve(self) -> NDArray[np.float64]:
        solution, *_ = linalg.lstsq(self.H, self.Xi)
        return solution


class InitialSolution(NamedTuple):
    values: ValueSet
    feedback: FeedbackSet
    couplings: Tuple[Dict[int, Matrix], ...]
    B_estimate: Tuple[Matrix, ...]
    iterations: int
    conditions: Tuple[float, ...]


def _check_rows(data: IntegralDataset, input_dims: Sequence[int]) -> None:
    if data.m != list(input_dims):
        raise DimensionError(f"Dataset input sizes {data.m} do not match the R grid sizes {list(input_dims)}.")
    if data.s < data.required_rows:
        raise ExcitationError(
            f"Dataset has {data.s} intervals; at least {data.required_rows} are needed.",
            rank=data.s,
        )


def assemble_initial_system(
    data: IntegralDataset,
    init_Q: Sequence[MatrixLike],
    R: Sequence[Sequence[MatrixLike]],
    fb_k: FeedbackSet,
    player: int,
) -> LeastSquaresSystem:
    """One player's integral system for the next Lyapunov iterate.

    Unknowns are ``(packed K_i, vec F_i, vec Y_ji for j != i)``; every row is
    one data interval of
    ``d(x^T K_i x) - 2 int (u_i + F_i x)^T R_ii F_i' x - 2 sum_j int (u_j + F_j x)^T Y_ji x
    = -int x^T (Q_i + sum_j F_j^T R_ij F_j) x``.
    """
    Q, grid = _cost_arrays(init_Q, R)
    dims = _input_dims(grid)
    _check_rows(data, dims)
    n = data.n
    eye = np.eye(n)
    f_i, r_ii = fb_k[player], grid[player][player]

    blocks = [data.delta_xx, -2.0 * (data.I_xu[player] @ np.kron(eye, r_ii) + data.I_xx @ np.kron(eye, f_i.T @ r_ii))]
    for j, f_j in enumerate(fb_k):
        if j != player:
            blocks.append(-2.0 * (data.I_xu[j] + data.I_xx @ np.kron(eye, f_j.T)))
    H = np.hstack(blocks)
    weight = Q[player] + sum(f.T @ grid[player][j] @ f for j, f in enumerate(fb_k))
    Xi = -data.I_xx @ vec(weight)

    condition = _equilibrated_condition(H)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise ExcitationError(
            f"Player {player + 1} data system is rank deficient (condition {condition:.3g}); add probing noise.",
            condition=condition,
            rank=int(np.linalg.matrix_rank(H)),
        )
    return LeastSquaresSystem(H, Xi, condition, player)


def recover_input_matrices(
    values: ValueSet,
    feedback: FeedbackSet,
    couplings: Sequence[Dict[int, Matrix]],
    R: CostGrid,
    player: int = 0,
) -> Tuple[Matrix, ...]:
    """``B_i = (R_ii F_i K_i^-1)^T`` and ``B_j = (Y_ji K_i^-1)^T`` from one player's system."""
    k_inv = np.linalg.inv(values[player])
    recovered = []
    for j in range(len(feedback)):
        if j == player:
            recovered.append((R[player][player] @ feedback[player] @ k_inv).T)
        else:
            recovered.append((couplings[player][j] @ k_inv).T)
    return tuple(recovered)


def solve_initial_model_free(
    data: IntegralDataset,
    init_Q: Sequence[MatrixLike],
    R: Sequence[Sequence[MatrixLike]],
    fb0: FeedbackSet,
    *,
    eps: Union[float, Sequence[float]] = 1e-9,
    max_iter: int = 500,
    b_player: int = 0,
) -> InitialSolution:
    """Solve the initialised game from data, starting at the estimated gains ``fb0``."""
    Q, grid = _cost_arrays(init_Q, R)
    check_cost_definiteness(Q, grid)
    dims = _input_dims(grid)
    _check_rows(data, dims)
    thresholds = per_player(eps, len(Q), "eps")
    n = data.n

    fb = fb0
    previous: Optional[ValueSet] = None
    change = float("inf")
    for iteration in range(1, max_iter + 1):
        values, gains, couplings, conditions = [], [], [], []
        for i in range(len(Q)):
            system = assemble_initial_system(data, Q, grid, fb, i)
            unknowns = PackedUnknowns.split(system.solve(), n, dims, i)
            values.append(unknowns.value())
            gains.append(unknowns.gain(dims[i], n))
            couplings.append({j: unknowns.coupling(j, dims[j], n) for j in unknowns.Y_vec})
            conditions.append(system.condition_estimate)
        value_set = ValueSet(tuple(values))
        fb = FeedbackSet(tuple(gains))
        if previous is not None:
            changes = [float(np.linalg.norm(k - k_old)) for k, k_old in zip(value_set, previous)]
            change = max(changes)
            logger.debug("Model-free iteration %d: max change %.3e", iteration, change)
            if all(c < t for c, t in zip(changes, thresholds)):
                for i, k in enumerate(value_set):
                    if min_eigenvalue(k) <= 0.0:
                        raise DefinitenessError(
                            f"K_{i + 1} from data is not positive definite; the data disagree with the initialised game."
                        )
                B_estimate = recover_input_matrices(value_set, fb, couplings, grid, b_player)
                if max(conditions) > 1e6:
                    logger.warning("Data systems are poorly conditioned (worst %.3g)", max(conditions))
                logger.info("Initialised game solved from data in %d iterations", iteration)
                return InitialSolution(value_set, fb, tuple(couplings), B_estimate, iteration, tuple(conditions))
        previous = value_set

    raise ConvergenceError(
        f"Model-free iterations did not converge in {max_iter} iterations (last change {change:.3e}).",
        iterations=max_iter,
        last_change=change,
    )


def anchor_direction(f0: Matrix, k0: Matrix) -> Matrix:
    """``F_i^0 (K_i^0)^-1``, equal to ``R_ii^-1 B_i^T`` for the initialised game."""
    try:
        return np.linalg.solve(k0, f0.T).T
    except np.linalg.LinAlgError as exc:
        raise DefinitenessError("Anchor value matrix is singular.") from exc


def model_free_gradient_step(
    vals: ValueSet,
    anchor: Tuple[FeedbackSet, ValueSet],
    target: FeedbackSet,
    alphas: Sequence[float],
    *,
    line_search: bool = False,
    max_halvings: int = 30,
    iteration: int = 0,
) -> Tuple[ValueSet, FeedbackSet]:
    f0, k0 = anchor
    directions = [anchor_direction(f, k) for f, k in zip(f0, k0)]
    updated = tuple(
        descend(
            direction,
            vals[i],
            target[i],
            alphas[i],
            line_search=line_search,
            max_halvings=max_halvings,
            player=i,
            iteration=iteration,
        )
        for i, direction in enumerate(directions)
    )
    values = ValueSet(updated)
    return values, FeedbackSet(tuple(direction @ k for direction, k in zip(directions, values)))


def model_free_q_evaluation(
    data: IntegralDataset,
    vals: ValueSet,
    fb: FeedbackSet,
    B_est: Sequence[MatrixLike],
    R: Sequence[Sequence[MatrixLike]],
) -> Tuple[Matrix, ...]:
    """State weights fitted from ``int x^T Q_i x`` over every data interval.

    Each row's target is
    ``-int x^T (sum_j F_j^T R_ij F_j) x - d(x^T K_i x) + 2 sum_j int (u_j + F_j x)^T B_j^T K_i x``.
    """
    grid = tuple(tuple(as_matrix(r) for r in row) for row in R)
    B = tuple(as_matrix(b) for b in B_est)
    n = data.n
    if data.s < packed_size(n):
        raise ExcitationError(f"Need at least {packed_size(n)} intervals to fit Q, got {data.s}.", rank=data.s)
    condition = _equilibrated_condition(data.I_qx)
    if not np.isfinite(condition) or condition > MAX_CONDITION:
        raise RankError(f"State monomial integrals are rank deficient (condition {condition:.3g}).", condition=condition)

    eye = np.eye(n)
    excitation = [data.I_xu[j] + data.I_xx @ np.kron(eye, f.T) for j, f in enumerate(fb)]
    weights = []
    for i, k in enumerate(vals):
        coupling = sum(f.T @ grid[i][j] @ f for j, f in enumerate(fb))
        omega = -data.I_xx @ vec(coupling) - data.delta_xx @ smat_pack(k)
        for j, b in enumerate(B):
            omega = omega + 2.0 * excitation[j] @ vec(b.T @ k)
        packed, *_ = linalg.lstsq(data.I_qx, omega)
        weights.append(smat_unpack(packed))
    return tuple(weights)


def run_algorithm2(
    log: Optional[TrajectoryLog],
    init_Q: Sequence[MatrixLike],
    R: Sequence[Sequence[MatrixLike]],
    config: Algorithm1Config = Algorithm1Config(),
    *,
    target: Optional[FeedbackSet] = None,
    probe_log: Optional[TrajectoryLog] = None,
    dataset: Optional[IntegralDataset] = None,
    interval: float = 0.01,
    b_player: int = 0,
    reference_dynamics: Optional[GameSpec] = None,
    sample_indices: Optional[Sequence[int]] = None,
) -> SynthesizedGame:
    """Synthesise an equivalent game without ``A`` or ``B_i``.

    Integral data come from ``dataset`` if given, else from ``probe_log``
    (data collected under ``-F_hat x`` plus probing noise), else from the
    demonstration itself. ``reference_dynamics`` is used only for the trace's
    stability column and to assemble the returned game.
    """
    Q, grid = _cost_arrays(init_Q, R)
    players = len(Q)
    config.check(players)
    check_cost_definiteness(Q, grid)
    if target is None:
        if log is None:
            raise ValueError("A trajectory log or an explicit target feedback is required.")
        target = estimate_feedback(log, sample_indices)
    if dataset is None:
        source = probe_log if probe_log is not None else log
        if source is None:
            raise ValueError("Integral data, a probing log or a demonstration log is required.")
        dataset = build_integral_dataset(source, uniform_boundaries(source, interval))
    logger.info("Integral dataset: %d intervals, %d needed", dataset.s, dataset.required_rows)

    initial = solve_initial_model_free(
        dataset, Q, grid, target, eps=config.epsilons(players), max_iter=config.max_inner, b_player=b_player
    )
    anchor = (initial.feedback, initial.values)
    rates = config.rates(players)

    def step(current: ValueSet, iteration: int) -> Tuple[ValueSet, FeedbackSet]:
        return model_free_gradient_step(
            current,
            anchor,
            target,
            rates,
            line_search=config.line_search,
            max_halvings=config.max_halvings,
            iteration=iteration,
        )

    def abscissa(gains: FeedbackSet) -> float:
        if reference_dynamics is None:
            return float("nan")
        try:
            return spectral_abscissa(closed_loop_matrix(reference_dynamics, gains))
        except ValueError:
            return float("nan")

    values, fb, trace, converged = gradient_loop(
        initial.values,
        initial.feedback,
        target,
        config,
        step=step,
        abscissa=abscissa,
        q_weights=lambda current, gains: model_free_q_evaluation(dataset, current, gains, initial.B_estimate, grid),
    )
    trace.conditions = initial.conditions

    Q_star = model_free_q_evaluation(dataset, values, fb, initial.B_estimate, grid)
    spec = None
    if reference_dynamics is not None:
        spec = GameSpec.from_arrays(reference_dynamics.A, reference_dynamics.B, Q_star, grid)
    return SynthesizedGame(
        Q_star=Q_star,
        R=grid,
        K_star=values,
        F_star=fb,
        trace=trace,
        converged=converged,
        target=target,
        spec=spec,
        B_estimate=initial.B_estimate,
        initial_values=initial.values,
        initial_feedback=initial.feedback,
    )
