"""Scenario documents: JSON descriptions of one experiment.

Matrices are nested row-major arrays; a bare number stands for a 1x1
matrix. Player indices in ``adjustments`` are 1-based like the rest of the
document's prose.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from invgame.data.simulation import NoiseSpec
from invgame.errors import DefinitenessError, DimensionError, ScenarioError
from invgame.irl.results import Algorithm1Config, QUpdateMode
from invgame.model.game import FeedbackSet, GameSpec, Matrix, as_matrix
from invgame.solver.riccati import check_cost_definiteness


class ScenarioKind(str, Enum):
    FORWARD = "forward"
    MODEL_BASED = "model_based"
    MODEL_FREE = "model_free"


@dataclass(frozen=True)
class SimulationSettings:
    x0: Tuple[float, ...]
    step: float = 1e-3
    horizon: float = 5.0
    sample_interval: float = 0.01


@dataclass(frozen=True)
class ProbeSettings:
    """Data collection under ``-F_hat x`` plus probing noise, after estimation."""

    step: float = 1e-4
    horizon: float = 2.0
    interval: float = 0.01
    x0: Optional[Tuple[float, ...]] = None


@dataclass(frozen=True, eq=False)
class Scenario:
    name: str
    kind: ScenarioKind
    dynamics: GameSpec
    initial_Q: Tuple[Matrix, ...]
    initial_R: Tuple[Tuple[Matrix, ...], ...]
    simulation: SimulationSettings
    config: Algorithm1Config = field(default_factory=Algorithm1Config)
    demonstrated: Optional[GameSpec] = None
    initial_feedback: Optional[FeedbackSet] = None
    demonstration_csv: Optional[Path] = None
    probe: Optional[ProbeSettings] = None
    noise: Optional[NoiseSpec] = None
    adjustments: Tuple[Dict[Tuple[int, int], Matrix], ...] = ()
    verify_tolerance: float = 1e-8
    description: str = ""
    provenance: str = ""

    def with_seed(self, seed: int) -> "Scenario":
        if self.noise is None:
            return self
        return replace(self, noise=replace(self.noise, seed=seed))


def load_scenario(path: Path) -> Scenario:
    """Read and validate the scenario at ``path``."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except OSError as exc:
        raise ScenarioError(f"Cannot read scenario: {exc}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"Invalid JSON ({exc.msg}, line {exc.lineno})", path=str(path)) from exc
    if not isinstance(payload, dict):
        raise ScenarioError("Scenario document must be a JSON object.")
    return scenario_from_payload(payload, base_dir=path.parent)


def save_scenario(scenario: Scenario, path: Path) -> None:
    Path(path).write_text(json.dumps(scenario_to_payload(scenario), indent=2))


# ---------------------------------------------------------------------------
# Serialisation helpers


def _matrix(value: Any, where: str) -> Matrix:
    try:
        matrix = as_matrix(value)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"expected a number or a nested numeric array ({exc})", path=where) from exc
    if not np.all(np.isfinite(matrix)):
        raise ScenarioError("matrix entries must be finite", path=where)
    return matrix


def _matrix_list(value: Any, where: str) -> List[Matrix]:
    if not isinstance(value, list) or not value:
        raise ScenarioError("expected a non-empty list of matrices", path=where)
    return [_matrix(entry, f"{where}[{index}]") for index, entry in enumerate(value)]


def _matrix_grid(value: Any, where: str) -> List[List[Matrix]]:
    if not isinstance(value, list) or not all(isinstance(row, list) for row in value):
        raise ScenarioError("expected a list of rows", path=where)
    return [[_matrix(entry, f"{where}[{i}][{j}]") for j, entry in enumerate(row)] for i, row in enumerate(value)]


def _section(payload: Mapping[str, Any], key: str, where: str = "") -> Dict[str, Any]:
    value = payload.get(key)
    label = f"{where}.{key}" if where else key
    if not isinstance(value, dict):
        raise ScenarioError("missing or not an object", path=label)
    return value


def _float(value: Any, where: str) -> float:
    try:
        return float(value)
    except (TypeError, ValueError) as exc:
        raise ScenarioError(f"expected a number, got {value!r}", path=where) from exc


def _floats(value: Any, where: str) -> Tuple[float, ...]:
    if np.isscalar(value):
        return (_float(value, where),)
    if not isinstance(value, list):
        raise ScenarioError("expected a number or a list of numbers", path=where)
    return tuple(_float(entry, f"{where}[{index}]") for index, entry in enumerate(value))


def _costs(section: Mapping[str, Any], where: str, players: int) -> Tuple[List[Matrix], List[List[Matrix]]]:
    if "Q" not in section or "R" not in section:
        raise ScenarioError("needs both Q and R", path=where)
    Q = _matrix_list(section["Q"], f"{where}.Q")
    R = _matrix_grid(section["R"], f"{where}.R")
    if len(Q) != players:
        raise ScenarioError(f"expected {players} state weights, got {len(Q)}", path=f"{where}.Q")
    if len(R) != players or any(len(row) != players for row in R):
        raise ScenarioError(f"expected a {players}x{players} grid", path=f"{where}.R")
    return Q, R


def _game(A: Matrix, B: Sequence[Matrix], Q: Sequence[Matrix], R: Sequence[Sequence[Matrix]], where: str) -> GameSpec:
    try:
        return GameSpec.from_arrays(A, B, Q, R)
    except (DimensionError, DefinitenessError) as exc:
        raise ScenarioError(str(exc), path=where) from exc


def _config_from_payload(payload: Mapping[str, Any], where: str) -> Algorithm1Config:
    try:
        mode = QUpdateMode(payload.get("q_update_mode", QUpdateMode.ONCE_AT_END.value))
    except ValueError as exc:
        raise ScenarioError(f"unknown mode {payload.get('q_update_mode')!r}", path=f"{where}.q_update_mode") from exc
    defaults = Algorithm1Config()

    def per_player(key: str, default: Any) -> Any:
        if key not in payload:
            return default
        values = _floats(payload[key], f"{where}.{key}")
        return values[0] if np.isscalar(payload[key]) else values

    try:
        config = Algorithm1Config(
            learning_rates=per_player("learning_rates", defaults.learning_rates),
            delta=per_player("delta", defaults.delta),
            eps=per_player("eps", defaults.eps),
            max_outer=int(payload.get("max_outer", defaults.max_outer)),
            max_inner=int(payload.get("max_inner", defaults.max_inner)),
            q_update_mode=mode,
            line_search=bool(payload.get("line_search", defaults.line_search)),
            max_halvings=int(payload.get("max_halvings", defaults.max_halvings)),
            divergence_factor=float(payload.get("divergence_factor", defaults.divergence_factor)),
            skip_initial_solve=bool(payload.get("skip_initial_solve", defaults.skip_initial_solve)),
            snapshot_every=int(payload.get("snapshot_every", defaults.snapshot_every)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), path=where) from exc
    return config


def _noise_from_payload(payload: Mapping[str, Any], where: str) -> NoiseSpec:
    defaults = NoiseSpec()
    try:
        low, high = payload.get("frequency_range", defaults.frequency_range)
        noise = NoiseSpec(
            amplitude=float(payload.get("amplitude", defaults.amplitude)),
            component_count=int(payload.get("component_count", defaults.component_count)),
            frequency_range=(float(low), float(high)),
            seed=int(payload.get("seed", defaults.seed)),
            decay_rate=float(payload.get("decay_rate", defaults.decay_rate)),
        )
    except (TypeError, ValueError) as exc:
        raise ScenarioError(str(exc), path=where) from exc
    issues = list(noise.validate())
    if issues:
        raise ScenarioError(" ".join(issues), path=where)
    return noise


def _adjustments_from_payload(value: Any, players: int, where: str) -> Tuple[Dict[Tuple[int, int], Matrix], ...]:
    if not isinstance(value, list):
        raise ScenarioError("expected a list of adjustments", path=where)
    parsed = []
    for index, entry in enumerate(value):
        label = f"{where}[{index}]"
        if not isinstance(entry, dict) or not isinstance(entry.get("R"), list):
            raise ScenarioError("each adjustment needs an 'R' list of {i, j, value} entries", path=label)
        change: Dict[Tuple[int, int], Matrix] = {}
        for k, item in enumerate(entry["R"]):
            try:
                i, j = int(item["i"]) - 1, int(item["j"]) - 1
            except (KeyError, TypeError, ValueError) as exc:
                raise ScenarioError("needs integer i and j", path=f"{label}.R[{k}]") from exc
            if i == j or not (0 <= i < players and 0 <= j < players):
                raise ScenarioError("i and j must name two different players", path=f"{label}.R[{k}]")
            change[(i, j)] = _matrix(item.get("value"), f"{label}.R[{k}].value")
        parsed.append(change)
    return tuple(parsed)


def scenario_from_payload(payload: Mapping[str, Any], *, base_dir: Optional[Path] = None) -> Scenario:
    try:
        kind = ScenarioKind(payload.get("algorithm", ScenarioKind.MODEL_BASED.value))
    except ValueError as exc:
        raise ScenarioError(f"unknown algorithm {payload.get('algorithm')!r}", path="algorithm") from exc

    dynamics_payload = _section(payload, "dynamics")
    if "A" not in dynamics_payload:
        raise ScenarioError("missing", path="dynamics.A")
    A = _matrix(dynamics_payload["A"], "dynamics.A")
    B = _matrix_list(dynamics_payload.get("B"), "dynamics.B")
    players = len(B)
    try:
        dynamics = GameSpec.dynamics_only(A, B)
    except (DimensionError, DefinitenessError) as exc:
        raise ScenarioError(str(exc), path="dynamics") from exc

    demonstrated = None
    if "demonstrated" in payload:
        Q_d, R_d = _costs(_section(payload, "demonstrated"), "demonstrated", players)
        demonstrated = _game(A, B, Q_d, R_d, "demonstrated")

    if kind is ScenarioKind.FORWARD and "initialization" not in payload:
        if demonstrated is None:
            raise ScenarioError("a forward scenario needs demonstrated costs", path="demonstrated")
        initial_Q, initial_R = list(demonstrated.Q), [list(row) for row in demonstrated.R]
    else:
        initial_Q, initial_R = _costs(_section(payload, "initialization"), "initialization", players)
    initialized = _game(A, B, initial_Q, initial_R, "initialization")
    try:
        check_cost_definiteness(initialized.Q, initialized.R)
    except DefinitenessError as exc:
        raise ScenarioError(str(exc), path="initialization") from exc

    simulation_payload = payload.get("simulation", {})
    if not isinstance(simulation_payload, dict) or "x0" not in simulation_payload:
        raise ScenarioError("needs an initial state x0", path="simulation")
    x0 = _floats(simulation_payload["x0"], "simulation.x0")
    if len(x0) != dynamics.n:
        raise ScenarioError(f"expected {dynamics.n} entries, got {len(x0)}", path="simulation.x0")
    simulation = SimulationSettings(
        x0=x0,
        step=_float(simulation_payload.get("step", 1e-3), "simulation.step"),
        horizon=_float(simulation_payload.get("horizon", 5.0), "simulation.horizon"),
        sample_interval=_float(simulation_payload.get("sample_interval", 0.01), "simulation.sample_interval"),
    )
    if simulation.step <= 0 or simulation.horizon <= 0 or simulation.sample_interval <= 0:
        raise ScenarioError("step, horizon and sample_interval must be positive", path="simulation")

    probe = None
    if "probe" in payload:
        probe_payload = _section(payload, "probe")
        probe_x0 = probe_payload.get("x0")
        probe = ProbeSettings(
            step=_float(probe_payload.get("step", 1e-4), "probe.step"),
            horizon=_float(probe_payload.get("horizon", 2.0), "probe.horizon"),
            interval=_float(probe_payload.get("interval", 0.01), "probe.interval"),
            x0=None if probe_x0 is None else _floats(probe_x0, "probe.x0"),
        )
        if probe.x0 is not None and len(probe.x0) != dynamics.n:
            raise ScenarioError(f"expected {dynamics.n} entries", path="probe.x0")

    noise = _noise_from_payload(_section(payload, "noise"), "noise") if "noise" in payload else None
    config = _config_from_payload(payload.get("algorithm_config", {}), "algorithm_config")
    issues = list(config.validate(players))
    if issues:
        raise ScenarioError(" ".join(issues), path="algorithm_config")

    initial_feedback = None
    if "initial_feedback" in payload:
        initial_feedback = FeedbackSet(tuple(_matrix_list(payload["initial_feedback"], "initial_feedback")))
        try:
            initial_feedback.check_against(dynamics)
        except DimensionError as exc:
            raise ScenarioError(str(exc), path="initial_feedback") from exc

    demonstration_csv = None
    if "demonstration_csv" in payload:
        demonstration_csv = Path(str(payload["demonstration_csv"]))
        if base_dir is not None and not demonstration_csv.is_absolute():
            demonstration_csv = base_dir / demonstration_csv
    if demonstrated is None and demonstration_csv is None and kind is not ScenarioKind.FORWARD:
        raise ScenarioError("needs demonstrated costs or a demonstration_csv", path="demonstrated")

    tolerance = _float(payload.get("verify_tolerance", 1e-8), "verify_tolerance")
    adjustments = _adjustments_from_payload(payload.get("adjustments", []), players, "adjustments")

    return Scenario(
        name=str(payload.get("name", "scenario")),
        kind=kind,
        dynamics=dynamics,
        initial_Q=initialized.Q,
        initial_R=initialized.R,
        simulation=simulation,
        config=config,
        demonstrated=demonstrated,
        initial_feedback=initial_feedback,
        demonstration_csv=demonstration_csv,
        probe=probe,
        noise=noise,
        adjustments=adjustments,
        verify_tolerance=tolerance,
        description=str(payload.get("description", "")),
        provenance=str(payload.get("provenance", "")),
    )


def matrix_to_payload(matrix: Matrix) -> List[List[float]]:
    return np.asarray(matrix, dtype=float).tolist()


def _config_to_payload(config: Algorithm1Config) -> Dict[str, Any]:
    def plain(value: Any) -> Any:
        return float(value) if np.isscalar(value) else [float(v) for v in value]

    return {
        "learning_rates": plain(config.learning_rates),
        "delta": plain(config.delta),
        "eps": plain(config.eps),
        "max_outer": config.max_outer,
        "max_inner": config.max_inner,
        "q_update_mode": config.q_update_mode.value,
        "line_search": config.line_search,
        "max_halvings": config.max_halvings,
        "divergence_factor": config.divergence_factor,
        "skip_initial_solve": config.skip_initial_solve,
        "snapshot_every": config.snapshot_every,
    }


def scenario_to_payload(scenario: Scenario) -> Dict[str, Any]:
    payload: Dict[str, Any] = {
        "name": scenario.name,
        "description": scenario.description,
        "provenance": scenario.provenance,
        "algorithm": scenario.kind.value,
        "dynamics": {
            "A": matrix_to_payload(scenario.dynamics.A),
            "B": [matrix_to_payload(b) for b in scenario.dynamics.B],
        },
        "initialization": {
            "Q": [matrix_to_payload(q) for q in scenario.initial_Q],
            "R": [[matrix_to_payload(r) for r in row] for row in scenario.initial_R],
        },
        "algorithm_config": _config_to_payload(scenario.config),
        "simulation": {
            "x0": list(scenario.simulation.x0),
            "step": scenario.simulation.step,
            "horizon": scenario.simulation.horizon,
            "sample_interval": scenario.simulation.sample_interval,
        },
        "verify_tolerance": scenario.verify_tolerance,
    }
    if scenario.demonstrated is not None:
        payload["demonstrated"] = {
            "Q": [matrix_to_payload(q) for q in scenario.demonstrated.Q],
            "R": [[matrix_to_payload(r) for r in row] for row in scenario.demonstrated.R],
        }
    if scenario.initial_feedback is not None:
        payload["initial_feedback"] = [matrix_to_payload(f) for f in scenario.initial_feedback]
    if scenario.demonstration_csv is not None:
        payload["demonstration_csv"] = str(scenario.demonstration_csv)
    if scenario.probe is not None:
        payload["probe"] = {
            "step": scenario.probe.step,
            "horizon": scenario.probe.horizon,
            "interval": scenario.probe.interval,
        }
        if scenario.probe.x0 is not None:
            payload["probe"]["x0"] = list(scenario.probe.x0)
    if scenario.noise is not None:
        payload["noise"] = {
            "amplitude": scenario.noise.amplitude,
            "component_count": scenario.noise.component_count,
            "frequency_range": list(scenario.noise.frequency_range),
            "seed": scenario.noise.seed,
            "decay_rate": scenario.noise.decay_rate,
        }
    if scenario.adjustments:
        payload["adjustments"] = [
            {"R": [{"i": i + 1, "j": j + 1, "value": matrix_to_payload(value)} for (i, j), value in change.items()]}
            for change in scenario.adjustments
        ]
    return payload


def load_game(path: Path) -> GameSpec:
    """Game from a synthesised-game report (``A, B, Q, R``) or a scenario's demonstrated costs."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"Cannot read game: {exc}", path=str(path)) from exc
    if not isinstance(payload, dict):
        raise ScenarioError("Game document must be a JSON object.", path=str(path))
    if "dynamics" in payload:
        scenario = scenario_from_payload(payload, base_dir=path.parent)
        if scenario.demonstrated is None:
            raise ScenarioError("scenario has no demonstrated costs", path="demonstrated")
        return scenario.demonstrated
    for key in ("A", "B", "Q", "R"):
        if key not in payload:
            raise ScenarioError("missing", path=key)
    A = _matrix(payload["A"], "A")
    B = _matrix_list(payload["B"], "B")
    Q, R = _costs(payload, "game", len(B))
    return _game(A, B, Q, R, "game")


def load_feedback(path: Path) -> FeedbackSet:
    """Gains stored under ``F`` (or ``F_star`` in a synthesised-game report)."""
    path = Path(path)
    try:
        payload = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"Cannot read feedback: {exc}", path=str(path)) from exc
    key = "F" if isinstance(payload, dict) and "F" in payload else "F_star"
    if not isinstance(payload, dict) or key not in payload:
        raise ScenarioError("missing", path="F")
    return FeedbackSet(tuple(_matrix_list(payload[key], key)))
