"""Configuration and result containers shared by the inverse solvers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from invgame.model.game import FeedbackSet, GameSpec, Matrix, ValueSet, per_player

PerPlayer = Union[float, Tuple[float, ...]]


class QUpdateMode(str, Enum):
    EVERY_STEP = "every_step"
    ONCE_AT_END = "once_at_end"


@dataclass(frozen=True)
class Algorithm1Config:
    """Knobs of the gradient loop shared by the model-based and model-free solvers.

    ``delta`` bounds ``tr(d_i^T d_i)`` at convergence and ``eps`` bounds the
    value change of the initial Lyapunov iterations. ``snapshot_every`` > 0
    keeps Q/K copies in the trace every that many iterations.
    """

    learning_rates: PerPlayer = 0.1
    delta: PerPlayer = 1e-8
    eps: PerPlayer = 1e-9
    max_outer: int = 50_000
    max_inner: int = 500
    q_update_mode: QUpdateMode = QUpdateMode.ONCE_AT_END
    line_search: bool = False
    max_halvings: int = 30
    divergence_factor: float = 1e6
    skip_initial_solve: bool = False
    snapshot_every: int = 0

    def validate(self, players: Optional[int] = None) -> Iterable[str]:
        for name in ("learning_rates", "delta", "eps"):
            values = getattr(self, name)
            flat = [values] if np.isscalar(values) else list(values)
            if any(float(v) <= 0 for v in flat):
                yield f"{name} must be positive."
            if players is not None and not np.isscalar(values) and len(flat) != players:
                yield f"{name} needs {players} entries, got {len(flat)}."
        if self.max_outer < 1 or self.max_inner < 1:
            yield "Iteration limits must be at least 1."
        if self.max_halvings < 0:
            yield "max_halvings must be non-negative."
        if self.divergence_factor <= 1:
            yield "divergence_factor must exceed 1."

    def check(self, players: Optional[int] = None) -> None:
        issues = list(self.validate(players))
        if issues:
            raise ValueError(" ".join(issues))

    def rates(self, players: int) -> List[float]:
        return per_player(self.learning_rates, players, "learning_rates")

    def deltas(self, players: int) -> List[float]:
        return per_player(self.delta, players, "delta")

    def epsilons(self, players: int) -> List[float]:
        return per_player(self.eps, players, "eps")


@dataclass(frozen=True, eq=False)
class GapState:
    """Feedback gaps ``d_i = F_i - F_hat_i`` and objectives ``D_i = tr(d_i^T d_i)``."""

    d: Tuple[Matrix, ...]
    D: Tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "D", tuple(float(np.sum(g * g)) for g in self.d))

    @property
    def norms(self) -> Tuple[float, ...]:
        return tuple(math.sqrt(value) for value in self.D)

    def converged(self, deltas: Sequence[float]) -> bool:
        return all(value < limit for value, limit in zip(self.D, deltas))


@dataclass
class TraceSnapshot:
    iteration: int
    Q: Tuple[Matrix, ...]
    K: Tuple[Matrix, ...]


@dataclass
class ConvergenceTrace:
    """Per-iteration history of the gradient loop, one entry per recorded iteration."""

    players: int
    D: List[Tuple[float, ...]] = field(default_factory=list)
    gap_norms: List[Tuple[float, ...]] = field(default_factory=list)
    spectral_abscissa: List[float] = field(default_factory=list)
    conditions: Tuple[float, ...] = ()
    snapshots: List[TraceSnapshot] = field(default_factory=list)

    def record(self, gap: GapState, abscissa: float = float("nan")) -> None:
        self.D.append(gap.D)
        self.gap_norms.append(gap.norms)
        self.spectral_abscissa.append(float(abscissa))

    def snapshot(self, Q: Sequence[Matrix], K: Sequence[Matrix]) -> None:
        self.snapshots.append(TraceSnapshot(len(self) - 1, tuple(np.array(q) for q in Q), tuple(np.array(k) for k in K)))

    def __len__(self) -> int:
        return len(self.D)

    @property
    def stable_throughout(self) -> bool:
        finite = [a for a in self.spectral_abscissa if not math.isnan(a)]
        return bool(finite) and max(finite) < 0.0


@dataclass(frozen=True, eq=False)
class SynthesizedGame:
    """Output of an inverse solver.

    ``spec`` assembles the synthesised costs with the dynamics when those are
    known; ``B_estimate`` holds the input matrices recovered from data.
    """

    Q_star: Tuple[Matrix, ...]
    R: Tuple[Tuple[Matrix, ...], ...]
    K_star: ValueSet
    F_star: FeedbackSet
    trace: ConvergenceTrace
    converged: bool
    target: FeedbackSet
    spec: Optional[GameSpec] = None
    B_estimate: Optional[Tuple[Matrix, ...]] = None
    initial_values: Optional[ValueSet] = None
    initial_feedback: Optional[FeedbackSet] = None

    @property
    def iterations(self) -> int:
        return max(len(self.trace) - 1, 0)
