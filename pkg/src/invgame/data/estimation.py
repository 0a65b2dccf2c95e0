"""Batch least-squares estimation of demonstrated feedback gains."""

from __future__ import annotations

import logging
from typing import Optional, Sequence

import numpy as np

from invgame.errors import RankError
from invgame.model.game import FeedbackSet

from .simulation import TrajectoryLog

logger = logging.getLogger(__name__)

MAX_GRAM_CONDITION = 1e12


def estimate_feedback(log: TrajectoryLog, sample_indices: Optional[Sequence[int]] = None) -> FeedbackSet:
    """Fit ``u_i = -F_i x`` over the selected samples.

    Solves ``F_i = -U_i^T X (X^T X)^-1`` with ``X`` stacking the sampled
    states row by row.
    """
    idx = np.arange(len(log)) if sample_indices is None else np.asarray(sample_indices, dtype=int)
    states = log.states[idx]
    if states.shape[0] < log.n:
        raise RankError(f"Need at least {log.n} samples to estimate feedback, got {states.shape[0]}.", rank=states.shape[0])
    gram = states.T @ states
    condition = float(np.linalg.cond(gram))
    if not np.isfinite(condition) or condition > MAX_GRAM_CONDITION:
        rank = int(np.linalg.matrix_rank(states))
        raise RankError(
            f"Sampled states span only {rank} of {log.n} directions (Gram condition {condition:.3g}).",
            condition=condition,
            rank=rank,
        )
    gains = tuple(-np.linalg.solve(gram, states.T @ u[idx]).T for u in log.inputs)
    logger.info("Estimated feedback from %d samples (Gram condition %.3g)", idx.size, condition)
    return FeedbackSet(gains)
