"""Reference games used by the bundled scenarios, the benchmarks and the tests.

Values are the published worked examples, four significant decimals as
printed. ``*_FEEDBACK`` and ``*_VALUES`` are the printed equilibrium, not a
recomputation.
"""

from __future__ import annotations

from typing import List

import numpy as np

from .game import FeedbackSet, GameSpec, ValueSet

# Three players, two states, model-based example.
THREE_PLAYER_A = np.array([[3.0, -2.0], [4.0, -1.0]])
THREE_PLAYER_B = [np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]]), np.array([[1.0], [1.0]])]

THREE_PLAYER_DEMONSTRATED = GameSpec.from_arrays(
    THREE_PLAYER_A,
    THREE_PLAYER_B,
    [np.array([[7.0, 2.0], [2.0, 5.0]]), 3.0 * np.eye(2), np.eye(2)],
    [[3.0, 1.0, 1.0], [1.0, 2.0, 0.0], [0.0, 1.0, 4.0]],
)

THREE_PLAYER_FEEDBACK = FeedbackSet(
    (
        np.array([[4.2499, -0.9409]]),
        np.array([[-0.4108, 0.9187]]),
        np.array([[0.2334, 0.1295]]),
    )
)

# K_2 is printed with an antisymmetric off-diagonal pair; the negative sign is kept.
THREE_PLAYER_VALUES = ValueSet(
    (
        np.array([[12.7497, -2.8228], [-2.8228, 3.7172]]),
        np.array([[4.8994, -0.8216], [-0.8216, 1.8373]]),
        np.array([[0.8116, 0.1222], [0.1222, 0.3956]]),
    )
)

THREE_PLAYER_INITIAL_Q: List[np.ndarray] = [np.eye(2), np.eye(2), np.eye(2)]
THREE_PLAYER_INITIAL_R = [[3.0, 2.0, 1.0], [2.0, 3.0, 1.0], [2.0, 3.0, 1.0]]
THREE_PLAYER_LEARNING_RATES = (1.5, 1.5, 0.15)

# Two players, two states, model-free example.
TWO_PLAYER_A = np.array([[3.0, 0.0], [0.0, -4.0]])
TWO_PLAYER_B = [np.array([[1.0], [1.0]]), np.array([[0.0], [1.0]])]

TWO_PLAYER_DEMONSTRATED = GameSpec.from_arrays(
    TWO_PLAYER_A,
    TWO_PLAYER_B,
    [2.0 * np.eye(2), 3.0 * np.eye(2)],
    [[2.0, 1.0], [1.0, 6.0]],
)

TWO_PLAYER_FEEDBACK = FeedbackSet((np.array([[6.2586, 0.0186]]), np.array([[-0.0532, 0.0620]])))

TWO_PLAYER_VALUES = ValueSet(
    (
        np.array([[12.7267, -0.2095], [-0.2095, 0.2466]]),
        np.array([[7.0811, -0.3192], [-0.3192, 0.3719]]),
    )
)

# The printed numbers of this example are reproduced with unit R_ii, not the
# R_ii = 3 stated next to them.
TWO_PLAYER_INITIAL_Q: List[np.ndarray] = [np.eye(2), np.eye(2)]
TWO_PLAYER_INITIAL_R = [[1.0, 0.0], [0.0, 1.0]]
TWO_PLAYER_LEARNING_RATES = (0.3, 0.4)

TWO_PLAYER_INITIAL_VALUES_PRINTED = ValueSet(
    (
        np.array([[6.3546, -0.1011], [-0.1011, 0.1212]]),
        np.array([[6.3538, -0.1050], [-0.1050, 0.1230]]),
    )
)
TWO_PLAYER_SYNTHESIZED_Q = (
    np.array([[1.0284, 0.0034], [0.0034, 0.9648]]),
    np.array([[1.6420, 0.0039], [0.0039, 0.4998]]),
)
TWO_PLAYER_ADJUSTED_Q2 = np.array([[40.8124, 0.1200], [0.1200, 0.5002]])
