import json

import numpy as np
import pytest

from invgame.errors import DefinitenessError
from invgame.main import main
from invgame.model import catalog

from conftest import SCENARIO_DIR


def read_json(path):
    return json.loads(path.read_text())


def test_three_player_scenario(tmp_path, capsys):
    assert main(["-q", "run", str(SCENARIO_DIR / "mb_3player.json"), "--out", str(tmp_path)]) == 0
    report_dir = tmp_path / "mb_3player"
    for name in ("trajectory.csv", "trace.csv", "game.json", "verification.json", "summary.json"):
        assert (report_dir / name).exists()
    game = read_json(report_dir / "game.json")
    for f, expected in zip(game["F_star"], catalog.THREE_PLAYER_FEEDBACK):
        np.testing.assert_allclose(f, expected, atol=1e-3)
    assert read_json(report_dir / "summary.json")["status"] == "converged"
    verification = read_json(report_dir / "verification.json")
    assert verification["verdict"] == "equivalent"
    assert len(verification["adjusted_games"]) == 2
    assert all(entry["verdict"] == "equivalent" for entry in verification["adjusted_games"])
    assert "mb_3player: converged" in capsys.readouterr().out


def test_input_error_writes_nothing(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["initialization"]["R"] = [[0.0, 0.0], [0.0, 1.0]]
    out = tmp_path / "results"
    assert main(["-q", "run", str(write_scenario(two_player_scenario_payload)), "--out", str(out)]) == 1
    assert not out.exists()


def test_missing_scenario_file(tmp_path):
    assert main(["-q", "run", str(tmp_path / "absent.json"), "--out", str(tmp_path / "results")]) == 1


def test_trace_stride_is_checked(two_player_scenario_payload, write_scenario, tmp_path):
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path), "--trace-every", "0"]) == 1


def test_runs_are_reproducible(two_player_scenario_payload, write_scenario, tmp_path):
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path / "first")]) == 0
    assert main(["-q", "run", str(path), "--out", str(tmp_path / "second")]) == 0
    for name in ("trace.csv", "game.json", "summary.json"):
        first = (tmp_path / "first" / "mb_2player" / name).read_bytes()
        assert first == (tmp_path / "second" / "mb_2player" / name).read_bytes()


def test_trace_stride_thins_the_trace(two_player_scenario_payload, write_scenario, tmp_path):
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path / "full")]) == 0
    assert main(["-q", "run", str(path), "--out", str(tmp_path / "thin"), "--trace-every", "10"]) == 0
    full = (tmp_path / "full" / "mb_2player" / "trace.csv").read_text().splitlines()
    thin = (tmp_path / "thin" / "mb_2player" / "trace.csv").read_text().splitlines()
    assert len(thin) < len(full)
    assert thin[-1] == full[-1]


def test_not_converged_exit_code(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["algorithm_config"]["max_outer"] = 2
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path)]) == 2
    assert read_json(tmp_path / "mb_2player" / "summary.json")["status"] == "not_converged"


def test_parallel_runs(two_player_scenario_payload, write_scenario, tmp_path):
    paths = []
    for name in ("first", "second"):
        payload = dict(two_player_scenario_payload, name=name)
        paths.append(str(write_scenario(payload, f"{name}.json")))
    assert main(["-q", "run", *paths, "--out", str(tmp_path / "results"), "--jobs", "2"]) == 0
    assert (tmp_path / "results" / "first" / "game.json").exists()
    assert (tmp_path / "results" / "second" / "game.json").exists()


def test_forward_scenario(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["algorithm"] = "forward"
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path)]) == 0
    game = read_json(tmp_path / "mb_2player" / "game.json")
    assert max(game["are_residual"]) < 1e-6
    assert not (tmp_path / "mb_2player" / "trace.csv").exists()


def test_demo_prints_the_demonstrated_equilibrium(tmp_path, capsys):
    assert main(["-q", "demo", str(SCENARIO_DIR / "mb_3player.json"), "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "F_1,d" in out and "K_3,d" in out
    assert (tmp_path / "mb_3player" / "demonstration.csv").exists()


def test_demo_without_stabilising_feedback(two_player_scenario_payload, write_scenario, tmp_path):
    two_player_scenario_payload["dynamics"] = {"A": [[1.0, 0.0], [0.0, 1.0]], "B": [[[0.0], [0.0]], [[0.0], [0.0]]]}
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "demo", str(path), "--out", str(tmp_path / "results")]) == 2
    assert not (tmp_path / "results").exists()


def test_demonstration_from_csv(two_player_scenario_payload, write_scenario, tmp_path):
    assert main(["-q", "demo", str(write_scenario(two_player_scenario_payload)), "--out", str(tmp_path / "demo")]) == 0
    payload = dict(two_player_scenario_payload, demonstration_csv=str(tmp_path / "demo" / "mb_2player" / "demonstration.csv"))
    del payload["demonstrated"]
    path = write_scenario(payload, "from_csv.json")
    assert main(["-q", "run", str(path), "--out", str(tmp_path / "results")]) == 0
    summary = read_json(tmp_path / "results" / "mb_2player" / "summary.json")
    assert "gap_to_demonstrated" not in summary


def test_verify_command(tmp_path, capsys):
    feedback = tmp_path / "feedback.json"
    feedback.write_text(json.dumps({"F": [f.tolist() for f in catalog.THREE_PLAYER_FEEDBACK]}))
    code = main(["-q", "verify", str(SCENARIO_DIR / "mb_3player.json"), str(feedback), "--out", str(tmp_path), "--tol", "1e-3"])
    assert code == 0
    assert "Verdict: equivalent" in capsys.readouterr().out
    assert read_json(tmp_path / "verification.json")["equivalent"] is True


def test_verify_rejects_foreign_gains(tmp_path):
    feedback = tmp_path / "feedback.json"
    feedback.write_text(json.dumps({"F": [(2.0 * f).tolist() for f in catalog.THREE_PLAYER_FEEDBACK]}))
    assert main(["-q", "verify", str(SCENARIO_DIR / "mb_3player.json"), str(feedback), "--out", str(tmp_path)]) == 2


def test_failure_during_the_run_exits_2(two_player_scenario_payload, write_scenario, tmp_path, monkeypatch):
    def fail(*args, **kwargs):
        raise DefinitenessError("value matrix from data is not positive definite")

    monkeypatch.setattr("invgame.runner.run_algorithm1", fail)
    path = write_scenario(two_player_scenario_payload)
    assert main(["-q", "run", str(path), "--out", str(tmp_path)]) == 2
    summary = read_json(tmp_path / "mb_2player" / "summary.json")
    assert summary["status"] == "failed"
    assert summary["error"] == "DefinitenessError"


@pytest.mark.slow
def test_two_player_model_free_scenario(tmp_path):
    assert main(["-q", "run", str(SCENARIO_DIR / "mf_2player.json"), "--out", str(tmp_path)]) == 0
    report_dir = tmp_path / "mf_2player"
    game = read_json(report_dir / "game.json")
    for f, expected in zip(game["F_star"], catalog.TWO_PLAYER_FEEDBACK):
        np.testing.assert_allclose(f, expected, atol=1e-2)
    for b, expected in zip(game["B_estimate"], catalog.TWO_PLAYER_B):
        np.testing.assert_allclose(b, expected, atol=5e-2)
    assert (report_dir / "probe.csv").exists()
    assert (report_dir / "integral_dataset.csv").exists()
    printed = catalog.TWO_PLAYER_INITIAL_VALUES_PRINTED
    np.testing.assert_allclose(game["initial_K"][0], printed[0], atol=5e-2)
    np.testing.assert_allclose(np.ravel(game["initial_K"][1])[1:], printed[1].ravel()[1:], atol=5e-2)
    assert game["initial_K"][1][0][0] == pytest.approx(0.354, abs=5e-2)
    for q, expected in zip(game["Q"], catalog.TWO_PLAYER_SYNTHESIZED_Q):
        np.testing.assert_allclose(q, expected, atol=5e-2)
    verification = read_json(report_dir / "verification.json")
    assert verification["verdict"] == "equivalent"
    (adjusted,) = verification["adjusted_games"]
    assert adjusted["verdict"] == "equivalent"
    np.testing.assert_allclose(adjusted["Q"][1], catalog.TWO_PLAYER_ADJUSTED_Q2, atol=1e-1)
