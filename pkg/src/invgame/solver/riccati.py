"""Forward solution of LQ nonzero-sum games.

Controls follow ``u_i = -F_i x`` throughout, so the closed loop is
``A - sum_j B_j F_j``. Value matrices solve the coupled algebraic Riccati
equations, reached here by Lyapunov iterations.
"""

from __future__ import annotations

import logging
from typing import List, NamedTuple, Optional, Sequence, Union

import numpy as np
from numpy.typing import ArrayLike
from scipy import linalg

from invgame.errors import ConvergenceError, DefinitenessError, DimensionError, StabilityError
from invgame.model.game import (
    AreResidualSet,
    FeedbackSet,
    GameSpec,
    Matrix,
    ValueSet,
    as_matrix,
    min_eigenvalue,
    per_player,
    symmetrize,
)

logger = logging.getLogger(__name__)

LYAPUNOV_METHODS = ("bartels-stewart", "kronecker")
DEFAULT_EPS = 1e-9
DEFAULT_MAX_ITER = 500
_PSD_TOL = 1e-12


class LyapunovIterationResult(NamedTuple):
    values: ValueSet
    feedback: FeedbackSet
    iterations: int
    last_change: float


def closed_loop_matrix(spec: GameSpec, fb: FeedbackSet) -> Matrix:
    fb.check_against(spec)
    closed = spec.A.copy()
    for b, f in zip(spec.B, fb):
        closed -= b @ f
    return closed


def spectral_abscissa(matrix: ArrayLike) -> float:
    """Largest real part over the eigenvalues of ``matrix``."""
    matrix = as_matrix(matrix)
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Cannot compute eigenvalues of a matrix with non-finite entries.")
    return float(np.max(np.linalg.eigvals(matrix).real))


def is_stabilizing(matrix: ArrayLike, margin: float = 0.0) -> bool:
    if margin < 0:
        raise ValueError("Stability margin must be non-negative.")
    matrix = as_matrix(matrix)
    if matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"Expected a square matrix, got shape {matrix.shape}.")
    return spectral_abscissa(matrix) < -margin


def solve_lyapunov(M: ArrayLike, W: ArrayLike, *, method: str = "bartels-stewart") -> Matrix:
    """Return the symmetric ``P`` with ``M^T P + P M = -W`` for a stable ``M``.

    ``method="kronecker"`` solves the n^2-dimensional vectorised system and is
    kept as a reference for small problems.
    """
    M = as_matrix(M)
    W = symmetrize(W)
    n = M.shape[0]
    if M.shape != (n, n) or W.shape != (n, n):
        raise DimensionError(f"Lyapunov equation needs matching square matrices, got {M.shape} and {W.shape}.")
    if method not in LYAPUNOV_METHODS:
        raise ValueError(f"Unknown Lyapunov method {method!r}; expected one of {LYAPUNOV_METHODS}.")
    abscissa = spectral_abscissa(M)
    if abscissa >= 0.0:
        raise StabilityError(
            f"Lyapunov equation needs a stable matrix, spectral abscissa is {abscissa:.6g}.",
            abscissa=abscissa,
        )

    if method == "kronecker":
        eye = np.eye(n)
        operator = np.kron(eye, M.T) + np.kron(M.T, eye)
        solution = np.linalg.solve(operator, -W.ravel(order="F")).reshape((n, n), order="F")
    else:
        # scipy solves a X + X a^H = q
        solution = linalg.solve_continuous_lyapunov(M.T, -W)
    return symmetrize(solution)


def feedback_from_value(spec: GameSpec, vals: ValueSet) -> FeedbackSet:
    if len(vals) != spec.N:
        raise DimensionError(f"Expected {spec.N} value matrices, got {len(vals)}.")
    gains = []
    for i, (b, k) in enumerate(zip(spec.B, vals)):
        try:
            gains.append(np.linalg.solve(spec.R[i][i], b.T @ k))
        except np.linalg.LinAlgError as exc:
            raise DefinitenessError(f"R_{i + 1}{i + 1} is singular.") from exc
    return FeedbackSet(tuple(gains))


def _coupling_terms(spec: GameSpec, fb: FeedbackSet, player: int) -> Matrix:
    """sum_j F_j^T R_ij F_j for one player."""
    total = np.zeros((spec.n, spec.n))
    for j, f in enumerate(fb):
        total += f.T @ spec.R[player][j] @ f
    return total


def are_residual(spec: GameSpec, vals: ValueSet, fb: FeedbackSet) -> AreResidualSet:
    fb.check_against(spec)
    if len(vals) != spec.N:
        raise DimensionError(f"Expected {spec.N} value matrices, got {len(vals)}.")
    closed = closed_loop_matrix(spec, fb)
    residuals = []
    for i, k in enumerate(vals):
        # A^T K + K A - (sum F^T B^T) K - K (sum B F) folds into the closed loop.
        residuals.append(closed.T @ k + k @ closed + spec.Q[i] + _coupling_terms(spec, fb, i))
    return AreResidualSet(tuple(residuals))


def check_admissible_costs(spec: GameSpec) -> None:
    """Require Q_i > 0, R_ii > 0 and R_ij >= 0, the convergent regime of the iterations."""
    check_cost_definiteness(spec.Q, spec.R)


def check_cost_definiteness(Q: Sequence[Matrix], R: Sequence[Sequence[Matrix]]) -> None:
    for i, q in enumerate(Q):
        if min_eigenvalue(q) <= 0.0:
            raise DefinitenessError(f"Q_{i + 1} must be positive definite.")
    for i, row in enumerate(R):
        for j, r in enumerate(row):
            if i == j:
                if min_eigenvalue(r) <= 0.0:
                    raise DefinitenessError(f"R_{i + 1}{i + 1} must be positive definite.")
            elif min_eigenvalue(r) < -_PSD_TOL:
                raise DefinitenessError(f"R_{i + 1}{j + 1} must be positive semidefinite.")


def lyapunov_iterations(
    spec: GameSpec,
    fb0: FeedbackSet,
    *,
    eps: Union[float, Sequence[float]] = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
    require_admissible: bool = True,
) -> LyapunovIterationResult:
    """Iterate K_i = lyap(A_cl, Q_i + sum_j F_j^T R_ij F_j), F_i = R_ii^-1 B_i^T K_i.

    Stops once every ``||K_i^(k+1) - K_i^(k)||_F`` is within its threshold.
    ``require_admissible=False`` skips the definiteness precondition; callers
    checking equivalence with indefinite off-diagonal weights use it.
    """
    fb0.check_against(spec)
    thresholds = per_player(eps, spec.N, "eps")
    if require_admissible:
        check_admissible_costs(spec)

    fb = fb0
    previous: Optional[ValueSet] = None
    change = float("inf")
    for iteration in range(1, max_iter + 1):
        closed = closed_loop_matrix(spec, fb)
        try:
            values = ValueSet(
                tuple(solve_lyapunov(closed, spec.Q[i] + _coupling_terms(spec, fb, i)) for i in range(spec.N))
            )
        except StabilityError as exc:
            raise StabilityError(
                f"Closed loop lost stability at Lyapunov iteration {iteration}: {exc}",
                iteration=iteration,
                abscissa=exc.abscissa,
            ) from exc
        fb = feedback_from_value(spec, values)
        if previous is not None:
            changes = [float(np.linalg.norm(k - k_old)) for k, k_old in zip(values, previous)]
            change = max(changes)
            logger.debug("Lyapunov iteration %d: max change %.3e", iteration, change)
            if not np.isfinite(change):
                raise StabilityError(f"Non-finite value matrix at Lyapunov iteration {iteration}.", iteration=iteration)
            if all(c <= t for c, t in zip(changes, thresholds)):
                if not is_stabilizing(closed_loop_matrix(spec, fb)):
                    raise StabilityError(
                        f"Converged feedback does not stabilise the closed loop (iteration {iteration}).",
                        iteration=iteration,
                        abscissa=spectral_abscissa(closed_loop_matrix(spec, fb)),
                    )
                return LyapunovIterationResult(values, fb, iteration, change)
        previous = values

    raise ConvergenceError(
        f"Lyapunov iterations did not converge in {max_iter} iterations (last change {change:.3e}).",
        iterations=max_iter,
        last_change=change,
    )


def evaluate_cost(vals: ValueSet, x0: ArrayLike) -> List[float]:
    """Equilibrium cost ``x0^T K_i x0`` of every player."""
    x0 = np.asarray(x0, dtype=float).ravel()
    return [float(x0 @ k @ x0) for k in vals]


def initial_stabilizing_feedback(spec: GameSpec) -> FeedbackSet:
    """Stabilising gains from one LQR design over the stacked inputs.

    Uses ``sum_i Q_i`` and the block diagonal of the ``R_ii``; the result is
    split back into per-player rows.
    """
    B = spec.stacked_input_matrix()
    Q = symmetrize(sum(spec.Q))
    R = linalg.block_diag(*(spec.R[i][i] for i in range(spec.N)))
    try:
        P = linalg.solve_continuous_are(spec.A, B, Q, R)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise StabilityError(f"No stabilising feedback found for the stacked game: {exc}") from exc
    gains = np.linalg.solve(R, B.T @ P)
    split = np.cumsum(spec.m)[:-1]
    fb = FeedbackSet(tuple(np.split(gains, split, axis=0)))
    abscissa = spectral_abscissa(closed_loop_matrix(spec, fb))
    if abscissa >= 0.0:
        raise StabilityError("Stacked LQR design did not stabilise the game.", abscissa=abscissa)
    return fb


def solve_game(
    spec: GameSpec,
    fb0: Optional[FeedbackSet] = None,
    *,
    eps: Union[float, Sequence[float]] = DEFAULT_EPS,
    max_iter: int = DEFAULT_MAX_ITER,
) -> LyapunovIterationResult:
    """Nash equilibrium of ``spec``, seeded at ``fb0`` or at a stacked LQR design."""
    if fb0 is None:
        fb0 = initial_stabilizing_feedback(spec)
    else:
        abscissa = spectral_abscissa(closed_loop_matrix(spec, fb0))
        if abscissa >= 0.0:
            raise StabilityError("Seed feedback does not stabilise the game.", iteration=0, abscissa=abscissa)
    result = lyapunov_iterations(spec, fb0, eps=eps, max_iter=max_iter)
    logger.info("Game solved in %d Lyapunov iterations", result.iterations)
    return result
