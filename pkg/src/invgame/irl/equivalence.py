"""Equivalence checks between games and families of equivalent games.

Two games are equivalent when their stabilising Riccati solutions induce the
same feedback gains. Off-diagonal input weights can be traded against state
weights without moving the gains, which spans a family of equivalent games
around any synthesised one.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from invgame.errors import DefinitenessError, DimensionError, GameError
from invgame.model.game import AreResidualSet, FeedbackSet, GameSpec, MatrixLike, ValueSet, as_matrix, is_symmetric, symmetrize
from invgame.solver.riccati import (
    are_residual,
    check_admissible_costs,
    closed_loop_matrix,
    feedback_from_value,
    lyapunov_iterations,
    solve_lyapunov,
    spectral_abscissa,
)

from .results import SynthesizedGame

logger = logging.getLogger(__name__)


class Verdict(str, Enum):
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not_equivalent"
    UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class VerificationReport:
    verdict: Verdict
    residual_norms: Tuple[float, ...]
    feedback_gap: float
    spectral_abscissa: float
    mode: str
    tolerance: float
    message: str = ""

    @property
    def equivalent(self) -> bool:
        return self.verdict is Verdict.EQUIVALENT

    def to_payload(self) -> Dict[str, Any]:
        return {
            "verdict": self.verdict.value,
            "equivalent": self.equivalent,
            "residual_norms": list(self.residual_norms),
            "feedback_gap": self.feedback_gap,
            "spectral_abscissa": self.spectral_abscissa,
            "mode": self.mode,
            "tolerance": self.tolerance,
            "message": self.message,
        }


@dataclass(frozen=True, eq=False)
class AdjustmentRequest:
    """Replacement off-diagonal weights ``R'_ij`` (``i != j``) applied to a synthesised game."""

    base: SynthesizedGame
    new_R_offdiag: Mapping[Tuple[int, int], MatrixLike] = field(default_factory=dict)

    def validate(self) -> List[str]:
        issues = []
        players = len(self.base.R)
        for (i, j), value in self.new_R_offdiag.items():
            if not (0 <= i < players and 0 <= j < players):
                issues.append(f"R'_{i + 1}{j + 1} names a player outside the game.")
                continue
            if i == j:
                issues.append(f"R'_{i + 1}{i + 1} is diagonal; only off-diagonal weights can be adjusted.")
                continue
            matrix = as_matrix(value)
            expected = self.base.R[j][j].shape
            if matrix.shape != expected:
                issues.append(f"R'_{i + 1}{j + 1} has shape {matrix.shape}, expected {expected}.")
            elif not is_symmetric(matrix):
                issues.append(f"R'_{i + 1}{j + 1} is not symmetric.")
        return issues


def _one_step_values(candidate: GameSpec, reference_fb: FeedbackSet) -> ValueSet:
    """Value matrices of ``candidate`` under fixed gains ``reference_fb``."""
    closed = closed_loop_matrix(candidate, reference_fb)
    values = []
    for i in range(candidate.N):
        weight = candidate.Q[i] + sum(f.T @ candidate.R[i][j] @ f for j, f in enumerate(reference_fb))
        values.append(solve_lyapunov(closed, weight))
    return ValueSet(tuple(values))


def verify_equivalent(
    candidate: GameSpec,
    reference_fb: FeedbackSet,
    tol: float = 1e-8,
    *,
    max_iter: int = 500,
) -> VerificationReport:
    """Check that ``reference_fb`` is a stabilising equilibrium of ``candidate``.

    Admissible games are re-solved by Lyapunov iterations seeded at the
    reference; games with indefinite weights get a fixed-point check instead.
    Residual norms are relative to ``max(1, ||K_i||_F)``.
    """
    reference_fb.check_against(candidate)
    abscissa = spectral_abscissa(closed_loop_matrix(candidate, reference_fb))
    if abscissa >= 0.0:
        return VerificationReport(
            Verdict.NOT_EQUIVALENT, (), float("inf"), abscissa, "fixed-point", tol, "Reference feedback is not stabilising."
        )

    try:
        check_admissible_costs(candidate)
        admissible = True
    except DefinitenessError:
        admissible = False

    if admissible:
        mode = "lyapunov"
        try:
            solved = lyapunov_iterations(candidate, reference_fb, eps=min(tol, 1e-9) * 1e-2, max_iter=max_iter)
        except GameError as exc:
            logger.warning("Equivalence undetermined: %s", exc)
            return VerificationReport(Verdict.UNDETERMINED, (), float("nan"), abscissa, mode, tol, str(exc))
        values, fb = solved.values, solved.feedback
    else:
        mode = "fixed-point"
        values = _one_step_values(candidate, reference_fb)
        fb = feedback_from_value(candidate, values)

    residual = are_residual(candidate, values, fb)
    gap = fb.distance(reference_fb)
    closed_abscissa = spectral_abscissa(closed_loop_matrix(candidate, fb))
    norms = tuple(n / max(1.0, float(np.linalg.norm(k))) for n, k in zip(residual.norms, values))
    ok = gap <= tol and max(norms) <= tol and closed_abscissa < 0.0
    verdict = Verdict.EQUIVALENT if ok else Verdict.NOT_EQUIVALENT
    message = "" if ok else f"Feedback gap {gap:.3e}, relative ARE residual {max(norms):.3e}."
    logger.info("Equivalence check (%s): %s", mode, verdict.value)
    return VerificationReport(verdict, norms, gap, closed_abscissa, mode, tol, message)


def adjust_game(req: AdjustmentRequest) -> GameSpec:
    """Swap in ``R'_ij`` and compensate with ``Q'_i = Q_i* + sum_j F_j*^T (R_ij - R'_ij) F_j*``."""
    issues = req.validate()
    if issues:
        raise DimensionError(" ".join(issues))
    base = req.base
    if base.spec is None:
        raise ValueError("Adjusting a game needs its dynamics; the synthesised game carries none.")
    if not base.converged:
        logger.warning("Adjusting a game whose gradient loop did not converge")
    players = len(base.R)
    grid = [list(row) for row in base.R]
    for (i, j), value in req.new_R_offdiag.items():
        grid[i][j] = as_matrix(value)

    weights = []
    for i in range(players):
        q = np.array(base.Q_star[i], dtype=float)
        for j in range(players):
            if j != i:
                f = base.F_star[j]
                q = q + f.T @ (base.R[i][j] - grid[i][j]) @ f
        weights.append(symmetrize(q))
    return GameSpec.from_arrays(base.spec.A, base.spec.B, weights, grid)


@dataclass(frozen=True, eq=False)
class FamilyMember:
    request: AdjustmentRequest
    spec: Optional[GameSpec]
    report: Optional[VerificationReport]
    error: Optional[str] = None


def enumerate_equivalent_family(
    base: SynthesizedGame,
    offsets: Sequence[AdjustmentRequest],
    *,
    tol: float = 1e-8,
) -> List[FamilyMember]:
    """Adjust and verify every request; failures are collected per member."""
    members = []
    for request in offsets:
        if request.base is not base:
            request = AdjustmentRequest(base, request.new_R_offdiag)
        try:
            spec = adjust_game(request)
            report = verify_equivalent(spec, base.F_star, tol)
        except (GameError, ValueError) as exc:
            members.append(FamilyMember(request, None, None, str(exc)))
            continue
        members.append(FamilyMember(request, spec, report))
    return members


def residual_difference(
    demonstrated: GameSpec,
    demonstrated_values: ValueSet,
    synthesized: GameSpec,
    synthesized_values: ValueSet,
    fb: FeedbackSet,
) -> AreResidualSet:
    """Difference of the two games' Riccati equations at the shared gains ``fb``.

    With ``dK = K_d - K*``, ``dQ = Q_d - Q*`` and ``dR = R_d - R``:
    ``A_cl^T dK + dK A_cl + dQ + sum_j F_j^T dR_ij F_j``, zero when both games
    are solved by ``fb``.
    """
    closed = closed_loop_matrix(synthesized, fb)
    residuals = []
    for i in range(synthesized.N):
        dK = demonstrated_values[i] - synthesized_values[i]
        dQ = demonstrated.Q[i] - synthesized.Q[i]
        coupling = sum(f.T @ (demonstrated.R[i][j] - synthesized.R[i][j]) @ f for j, f in enumerate(fb))
        residuals.append(closed.T @ dK + dK @ closed + dQ + coupling)
    return AreResidualSet(tuple(residuals))

