import json

import numpy as np
import pytest

from invgame.data import build_integral_dataset, simulate_closed_loop, uniform_boundaries
from invgame.errors import ScenarioError
from invgame.io import (
    ScenarioKind,
    load_feedback,
    load_game,
    load_scenario,
    read_dataset_csv,
    read_trace_csv,
    read_trajectory_csv,
    save_scenario,
    write_dataset_csv,
    write_trace_csv,
    write_trajectory_csv,
)
from invgame.irl import ConvergenceTrace, GapState
from invgame.model import catalog
from invgame.solver import solve_game

from conftest import SCENARIO_DIR


def test_bundled_scenarios_load():
    three = load_scenario(SCENARIO_DIR / "mb_3player.json")
    assert three.kind is ScenarioKind.MODEL_BASED
    assert three.dynamics.N == 3
    np.testing.assert_array_equal(three.dynamics.A, catalog.THREE_PLAYER_A)
    assert three.config.rates(3) == list(catalog.THREE_PLAYER_LEARNING_RATES)
    assert len(three.adjustments) == 2

    two = load_scenario(SCENARIO_DIR / "mf_2player.json")
    assert two.kind is ScenarioKind.MODEL_FREE
    assert two.probe is not None and two.probe.step == pytest.approx(1e-4)
    assert two.noise.seed == 0
    assert two.with_seed(3).noise.seed == 3
    assert two.verify_tolerance == pytest.approx(1e-2)


def test_zero_input_weight_is_rejected(two_player_scenario_payload, write_scenario):
    two_player_scenario_payload["initialization"]["R"] = [[0.0, 0.0], [0.0, 1.0]]
    with pytest.raises(ScenarioError, match="positive definite") as info:
        load_scenario(write_scenario(two_player_scenario_payload))
    assert info.value.path == "initialization"


@pytest.mark.parametrize(
    "mutate, path",
    [
        (lambda p: p["dynamics"].pop("A"), "dynamics.A"),
        (lambda p: p["simulation"].update(x0=[1.0]), "simulation.x0"),
        (lambda p: p.update(algorithm="policy_search"), "algorithm"),
        (lambda p: p["initialization"].update(Q=[[[1.0, 0.0], [0.0, 1.0]]]), "initialization.Q"),
        (lambda p: p.pop("demonstrated"), "demonstrated"),
    ],
)
def test_malformed_fields_are_named(two_player_scenario_payload, write_scenario, mutate, path):
    mutate(two_player_scenario_payload)
    with pytest.raises(ScenarioError) as info:
        load_scenario(write_scenario(two_player_scenario_payload))
    assert info.value.path == path


def test_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{ not json")
    with pytest.raises(ScenarioError, match="Invalid JSON"):
        load_scenario(path)


def test_forward_scenario_uses_demonstrated_costs(two_player_scenario_payload, write_scenario):
    two_player_scenario_payload["algorithm"] = "forward"
    del two_player_scenario_payload["initialization"]
    scenario = load_scenario(write_scenario(two_player_scenario_payload))
    for q, q_d in zip(scenario.initial_Q, scenario.demonstrated.Q):
        np.testing.assert_array_equal(q, q_d)


def test_save_then_load(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["adjustments"] = [{"R": [{"i": 2, "j": 1, "value": -1.0}]}]
    original = load_scenario(write_scenario(two_player_scenario_payload))
    save_scenario(original, tmp_path / "copy.json")
    copy = load_scenario(tmp_path / "copy.json")
    assert copy.name == original.name
    assert copy.kind is original.kind
    np.testing.assert_array_equal(copy.dynamics.A, original.dynamics.A)
    for a, b in zip(copy.demonstrated.R, original.demonstrated.R):
        for r, r_orig in zip(a, b):
            np.testing.assert_array_equal(r, r_orig)
    assert list(copy.adjustments[0]) == [(1, 0)]
    assert copy.simulation == original.simulation


def test_demonstration_csv_is_resolved_next_to_the_scenario(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["demonstration_csv"] = "demo.csv"
    scenario = load_scenario(write_scenario(two_player_scenario_payload))
    assert scenario.demonstration_csv == tmp_path / "demo.csv"


def test_trajectory_csv_reproduces_the_log(two_player, tmp_path):
    solved = solve_game(two_player, eps=1e-12)
    log = simulate_closed_loop(two_player, solved.feedback, [1.0, -1.0], horizon=0.5)
    path = tmp_path / "trajectory.csv"
    write_trajectory_csv(log, path)
    assert path.read_text().splitlines()[0] == "t,x1,x2,u1_1,u2_1"
    copy = read_trajectory_csv(path)
    np.testing.assert_array_equal(copy.times, log.times)
    np.testing.assert_array_equal(copy.states, log.states)
    for u, u_orig in zip(copy.inputs, log.inputs):
        np.testing.assert_array_equal(u, u_orig)


def test_malformed_trajectory_csv(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x1,u1_1\n0.0,1.0\n")
    with pytest.raises(ScenarioError, match="malformed row"):
        read_trajectory_csv(path)
    path.write_text("")
    with pytest.raises(ScenarioError, match="empty"):
        read_trajectory_csv(path)


def _trace(rows: int) -> ConvergenceTrace:
    trace = ConvergenceTrace(2)
    for p in range(rows):
        trace.record(GapState((np.full((1, 2), 1.0 / (p + 1)), np.full((1, 2), 0.5 / (p + 1)))), -1.0 - p)
    return trace


def test_trace_stride_keeps_the_last_row(tmp_path):
    path = tmp_path / "trace.csv"
    write_trace_csv(_trace(11), path, every=4)
    lines = path.read_text().splitlines()
    assert lines[0] == "p,D_1,D_2,gapnorm_1,gapnorm_2,spectral_abscissa"
    assert [line.split(",")[0] for line in lines[1:]] == ["0", "4", "8", "10"]
    copy = read_trace_csv(path)
    assert len(copy) == 4
    assert copy.spectral_abscissa[-1] == -11.0


def test_trace_stride_must_be_positive(tmp_path):
    with pytest.raises(ValueError):
        write_trace_csv(_trace(2), tmp_path / "trace.csv", every=0)


def test_dataset_csv_reproduces_the_dataset(two_player, tmp_path):
    solved = solve_game(two_player, eps=1e-12)
    log = simulate_closed_loop(two_player, solved.feedback, [1.0, -1.0], horizon=0.3)
    dataset = build_integral_dataset(log, uniform_boundaries(log, 0.05))
    path = tmp_path / "dataset.csv"
    write_dataset_csv(dataset, path)
    copy = read_dataset_csv(path)
    np.testing.assert_array_equal(copy.boundaries, dataset.boundaries)
    np.testing.assert_array_equal(copy.I_xx, dataset.I_xx)
    np.testing.assert_array_equal(copy.I_qx, dataset.I_qx)
    assert copy.m == dataset.m


def test_game_and_feedback_documents(tmp_path):
    game = {
        "A": catalog.TWO_PLAYER_A.tolist(),
        "B": [b.tolist() for b in catalog.TWO_PLAYER_B],
        "Q": [q.tolist() for q in catalog.TWO_PLAYER_SYNTHESIZED_Q],
        "R": [[1.0, 0.0], [0.0, 1.0]],
    }
    (tmp_path / "game.json").write_text(json.dumps(game))
    (tmp_path / "feedback.json").write_text(json.dumps({"F_star": [f.tolist() for f in catalog.TWO_PLAYER_FEEDBACK]}))
    spec = load_game(tmp_path / "game.json")
    feedback = load_feedback(tmp_path / "feedback.json")
    assert spec.N == 2
    np.testing.assert_array_equal(feedback[0], catalog.TWO_PLAYER_FEEDBACK[0])

    scenario_game = load_game(SCENARIO_DIR / "mb_3player.json")
    np.testing.assert_array_equal(scenario_game.Q[0], catalog.THREE_PLAYER_DEMONSTRATED.Q[0])


def test_trace_keeps_condition_estimates(tmp_path):
    trace = _trace(3)
    trace.conditions = (1.5e3, 2.5e4)
    path = tmp_path / "trace.csv"
    write_trace_csv(trace, path)
    lines = path.read_text().splitlines()
    assert lines[0].endswith("spectral_abscissa,condition_1,condition_2")
    assert all(line.endswith("1500,25000") for line in lines[1:])
    copy = read_trace_csv(path)
    assert copy.conditions == (1.5e3, 2.5e4)
    assert copy.spectral_abscissa == [-1.0, -2.0, -3.0]
