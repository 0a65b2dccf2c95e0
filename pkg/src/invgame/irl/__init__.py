"""Inverse solvers: model-based and data-driven synthesis of equivalent games."""

from .equivalence import (
    AdjustmentRequest,
    FamilyMember,
    Verdict,
    VerificationReport,
    adjust_game,
    enumerate_equivalent_family,
    residual_difference,
    verify_equivalent,
)
from .model_based import feedback_gap, gap_gradient, gradient_step, inverse_q_update, run_algorithm1
from .model_free import (
    LeastSquaresSystem,
    PackedUnknowns,
    assemble_initial_system,
    model_free_gradient_step,
    model_free_q_evaluation,
    run_algorithm2,
    solve_initial_model_free,
)
from .results import Algorithm1Config, ConvergenceTrace, GapState, QUpdateMode, SynthesizedGame

__all__ = [
    "AdjustmentRequest",
    "Algorithm1Config",
    "ConvergenceTrace",
    "FamilyMember",
    "GapState",
    "LeastSquaresSystem",
    "PackedUnknowns",
    "QUpdateMode",
    "SynthesizedGame",
    "Verdict",
    "VerificationReport",
    "adjust_game",
    "assemble_initial_system",
    "enumerate_equivalent_family",
    "feedback_gap",
    "gap_gradient",
    "gradient_step",
    "inverse_q_update",
    "model_free_gradient_step",
    "model_free_q_evaluation",
    "residual_difference",
    "run_algorithm1",
    "run_algorithm2",
    "solve_initial_model_free",
    "verify_equivalent",
]
