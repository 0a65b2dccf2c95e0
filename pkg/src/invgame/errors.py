"""Exception hierarchy shared by the solvers, the data tools and the CLI."""

from __future__ import annotations

from typing import Optional


class GameError(Exception):
    """Base class for every error raised by :mod:`invgame`."""


class DimensionError(GameError, ValueError):
    """Matrix shapes do not agree with the game they belong to."""


class DefinitenessError(GameError, ValueError):
    """A weight or value matrix violates a required definiteness condition."""


class StabilityError(GameError, RuntimeError):
    """A closed loop that must be stable is not."""

    def __init__(self, message: str, *, iteration: Optional[int] = None, abscissa: Optional[float] = None) -> None:
        super().__init__(message)
        self.iteration = iteration
        self.abscissa = abscissa


class ConvergenceError(GameError, RuntimeError):
    """An iteration ran out of budget before meeting its stopping rule."""

    def __init__(self, message: str, *, iterations: int, last_change: float) -> None:
        super().__init__(message)
        self.iterations = iterations
        self.last_change = last_change


class RankError(GameError, ValueError):
    """A least-squares design matrix is rank deficient or too badly conditioned."""

    def __init__(self, message: str, *, condition: float = float("inf"), rank: Optional[int] = None) -> None:
        super().__init__(message)
        self.condition = condition
        self.rank = rank


class ExcitationError(RankError):
    """Trajectory data is not rich enough for the model-free systems."""


class StallError(GameError, RuntimeError):
    """Backtracking could not find a step that decreases the feedback gap."""

    def __init__(self, message: str, *, player: int, iteration: int, gap: float) -> None:
        super().__init__(message)
        self.player = player
        self.iteration = iteration
        self.gap = gap


class DivergenceError(GameError, RuntimeError):
    """The feedback gap grew far beyond its starting value."""

    def __init__(self, message: str, *, player: int, iteration: int) -> None:
        super().__init__(message)
        self.player = player
        self.iteration = iteration


class ScenarioError(GameError, ValueError):
    """A scenario document is malformed; ``path`` names the offending field."""

    def __init__(self, message: str, *, path: str = "") -> None:
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
