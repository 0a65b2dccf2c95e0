from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Dict

import numpy as np
import pytest

import invgame
from invgame.irl.results import ConvergenceTrace, SynthesizedGame
from invgame.model import GameSpec, catalog
from invgame.solver import solve_game, spectral_abscissa

SCENARIO_DIR = Path(invgame.__file__).parent / "scenarios"


def random_game(seed: int, n: int = 2, players: int = 2, input_dim: int = 1) -> GameSpec:
    """Weakly coupled game with a stable open loop and admissible weights."""
    rng = np.random.default_rng(seed)
    while True:
        A = -2.0 * np.eye(n) + 0.6 * rng.standard_normal((n, n))
        if spectral_abscissa(A) < -0.5:
            break
    B = [0.5 * rng.standard_normal((n, input_dim)) for _ in range(players)]
    Q = []
    for _ in range(players):
        M = 0.5 * rng.standard_normal((n, n))
        Q.append(np.eye(n) + M @ M.T)
    R = []
    for i in range(players):
        row = []
        for j in range(players):
            if i == j:
                row.append((1.0 + rng.uniform()) * np.eye(input_dim))
            else:
                row.append(rng.uniform(0.0, 0.5) * np.eye(input_dim))
        R.append(row)
    return GameSpec.from_arrays(A, B, Q, R)


def synthesized_from(spec: GameSpec) -> SynthesizedGame:
    """A converged synthesised game built directly from a solved game."""
    solved = solve_game(spec, eps=1e-12)
    return SynthesizedGame(
        Q_star=spec.Q,
        R=spec.R,
        K_star=solved.values,
        F_star=solved.feedback,
        trace=ConvergenceTrace(spec.N),
        converged=True,
        target=solved.feedback,
        spec=spec,
    )


@pytest.fixture
def three_player() -> GameSpec:
    return catalog.THREE_PLAYER_DEMONSTRATED


@pytest.fixture
def two_player() -> GameSpec:
    return catalog.TWO_PLAYER_DEMONSTRATED


@pytest.fixture
def scalar_game() -> Callable[..., GameSpec]:
    def build(a: float = -1.0, b: float = 1.0, q: float = 1.0, r: float = 1.0) -> GameSpec:
        return GameSpec.from_arrays([[a]], [[[b]]], [[[q]]], [[r]])

    return build


@pytest.fixture
def two_player_scenario_payload() -> Dict:
    """Small model-based scenario on the two-player dynamics."""
    return {
        "name": "mb_2player",
        "algorithm": "model_based",
        "dynamics": {
            "A": catalog.TWO_PLAYER_A.tolist(),
            "B": [b.tolist() for b in catalog.TWO_PLAYER_B],
        },
        "demonstrated": {
            "Q": [q.tolist() for q in catalog.TWO_PLAYER_DEMONSTRATED.Q],
            "R": [[2.0, 1.0], [1.0, 6.0]],
        },
        "initialization": {"Q": [np.eye(2).tolist(), np.eye(2).tolist()], "R": [[1.0, 0.0], [0.0, 1.0]]},
        "algorithm_config": {"learning_rates": [0.3, 0.4], "delta": 1e-8},
        "simulation": {"x0": [1.0, -1.0], "step": 0.001, "horizon": 2.0, "sample_interval": 0.01},
    }


@pytest.fixture
def write_scenario(tmp_path: Path) -> Callable[[Dict, str], Path]:
    def write(payload: Dict, name: str = "scenario.json") -> Path:
        path = tmp_path / name
        path.write_text(json.dumps(payload))
        return path

    return write

