"""Game, feedback and value types plus the reference game catalog."""

from .game import (
    AreResidualSet,
    FeedbackSet,
    GameSpec,
    Matrix,
    ValueSet,
    as_matrix,
    is_symmetric,
    min_eigenvalue,
    per_player,
    symmetrize,
)
from .packing import outer_quad_pack, packed_size, smat_pack, smat_unpack, state_quad_pack, unvec, vec
from . import catalog

__all__ = [
    "AreResidualSet",
    "FeedbackSet",
    "GameSpec",
    "Matrix",
    "ValueSet",
    "as_matrix",
    "catalog",
    "is_symmetric",
    "min_eigenvalue",
    "outer_quad_pack",
    "packed_size",
    "per_player",
    "smat_pack",
    "smat_unpack",
    "state_quad_pack",
    "symmetrize",
    "unvec",
    "vec",
]
