"""Forward and inverse solvers for linear-quadratic nonzero-sum differential games."""

from invgame.errors import GameError
from invgame.model.game import FeedbackSet, GameSpec, ValueSet

__all__ = ["FeedbackSet", "GameError", "GameSpec", "ValueSet"]
__version__ = "0.1.0"
