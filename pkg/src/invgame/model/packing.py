"""Vector packings of symmetric matrices and quadratic monomials.

``smat_pack(P) @ state_quad_pack(x) == x @ P @ x`` for every symmetric ``P``:
the matrix packing keeps the upper triangle row by row with doubled
off-diagonal entries, the state packing lists the matching monomials.
``vec`` stacks columns, so ``np.kron(c, a) @ vec(M) == a @ M @ c``.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from invgame.errors import DimensionError

PACK_SYMMETRY_TOL = 1e-10


def packed_size(n: int) -> int:
    return n * (n + 1) // 2


@lru_cache(maxsize=None)
def _upper_indices(n: int) -> Tuple[NDArray[np.intp], NDArray[np.intp]]:
    return np.triu_indices(n)


@lru_cache(maxsize=None)
def _pack_weights(n: int) -> NDArray[np.float64]:
    rows, cols = _upper_indices(n)
    return np.where(rows == cols, 1.0, 2.0)


def smat_pack(matrix: ArrayLike) -> NDArray[np.float64]:
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionError(f"smat_pack needs a square matrix, got shape {matrix.shape}.")
    if np.linalg.norm(matrix - matrix.T) > PACK_SYMMETRY_TOL * max(1.0, float(np.linalg.norm(matrix))):
        raise ValueError("smat_pack needs a symmetric matrix.")
    n = matrix.shape[0]
    return matrix[_upper_indices(n)] * _pack_weights(n)


def smat_unpack(vector: ArrayLike) -> NDArray[np.float64]:
    vector = np.asarray(vector, dtype=float).ravel()
    n = int(round((np.sqrt(8 * vector.size + 1) - 1) / 2))
    if packed_size(n) != vector.size:
        raise DimensionError(f"{vector.size} entries do not pack a symmetric matrix.")
    upper = np.zeros((n, n))
    upper[_upper_indices(n)] = vector / _pack_weights(n)
    return upper + np.triu(upper, 1).T


def state_quad_pack(x: ArrayLike) -> NDArray[np.float64]:
    """Quadratic monomials of ``x``; a 2-D input packs each row."""
    x = np.asarray(x, dtype=float)
    rows, cols = _upper_indices(x.shape[-1])
    return x[..., rows] * x[..., cols]


def outer_quad_pack(outer: ArrayLike) -> NDArray[np.float64]:
    """Pack the upper triangle of ``x x^T`` (or of its time integral)."""
    outer = np.asarray(outer, dtype=float)
    rows, cols = _upper_indices(outer.shape[-1])
    return outer[..., rows, cols]


def vec(matrix: ArrayLike) -> NDArray[np.float64]:
    return np.asarray(matrix, dtype=float).ravel(order="F")


def unvec(vector: ArrayLike, rows: int, cols: int) -> NDArray[np.float64]:
    return np.asarray(vector, dtype=float).reshape((rows, cols), order="F")
