from .riccati import (
    LyapunovIterationResult,
    are_residual,
    check_admissible_costs,
    check_cost_definiteness,
    closed_loop_matrix,
    evaluate_cost,
    feedback_from_value,
    initial_stabilizing_feedback,
    is_stabilizing,
    lyapunov_iterations,
    solve_game,
    solve_lyapunov,
    spectral_abscissa,
)

__all__ = [
    "LyapunovIterationResult",
    "are_residual",
    "check_admissible_costs",
    "check_cost_definiteness",
    "closed_loop_matrix",
    "evaluate_cost",
    "feedback_from_value",
    "initial_stabilizing_feedback",
    "is_stabilizing",
    "lyapunov_iterations",
    "solve_game",
    "solve_lyapunov",
    "spectral_abscissa",
]
