"""Closed-loop trajectory generation with optional sinusoidal probing noise."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray

from invgame.errors import DimensionError
from invgame.model.game import FeedbackSet, GameSpec, Matrix
from invgame.solver.riccati import closed_loop_matrix, spectral_abscissa

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class NoiseSpec:
    """Probing noise ``amplitude * sum_k sin(c_k t) * exp(-decay_rate t)`` per input channel.

    Frequencies ``c_k`` are drawn once per player from ``frequency_range``
    (rad/s) by a generator seeded with ``(seed, player)``.
    """

    amplitude: float = 100.0
    component_count: int = 100
    frequency_range: Tuple[float, float] = (-500.0, 500.0)
    seed: int = 0
    decay_rate: float = 0.0

    def validate(self) -> Iterable[str]:
        if self.amplitude < 0:
            yield "Noise amplitude must be non-negative."
        if self.component_count < 1:
            yield "Noise needs at least one sinusoid component."
        low, high = self.frequency_range
        if low > high:
            yield "Noise frequency range must be ordered (low, high)."
        if self.decay_rate < 0:
            yield "Noise decay rate must be non-negative."

    def check(self) -> None:
        issues = list(self.validate())
        if issues:
            raise ValueError(" ".join(issues))

    def frequencies(self, player: int, input_dim: int) -> NDArray[np.float64]:
        """Frequencies of one player, shape ``(input_dim, component_count)``."""
        rng = np.random.default_rng([self.seed, player])
        low, high = self.frequency_range
        return rng.uniform(low, high, size=(input_dim, self.component_count))


def probing_signal(noise: NoiseSpec, t: ArrayLike, input_dims: Sequence[int]) -> List[NDArray[np.float64]]:
    """Noise of every player at ``t``.

    A scalar ``t`` gives one vector of length ``m_i`` per player; an array of
    instants gives arrays of shape ``(len(t), m_i)``.
    """
    times = np.asarray(t, dtype=float)
    flat = np.atleast_1d(times)
    envelope = noise.amplitude * np.exp(-noise.decay_rate * flat)
    signals = []
    for player, mi in enumerate(input_dims):
        if noise.amplitude == 0.0:
            values = np.zeros((flat.size, mi))
        else:
            omega = noise.frequencies(player, mi)
            values = np.sin(flat[:, None, None] * omega[None, :, :]).sum(axis=2) * envelope[:, None]
        signals.append(values[0] if times.ndim == 0 else values)
    return signals


@dataclass(frozen=True, eq=False)
class TrajectoryLog:
    """Sampled states and the inputs actually applied by every player."""

    times: NDArray[np.float64]
    states: NDArray[np.float64]
    inputs: Tuple[NDArray[np.float64], ...]
    noise: Optional[NoiseSpec] = None
    diverged: bool = False
    feedback: Optional[FeedbackSet] = field(default=None, repr=False)

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float).ravel()
        states = np.asarray(self.states, dtype=float).reshape(times.size, -1)
        inputs = tuple(np.asarray(u, dtype=float).reshape(times.size, -1) for u in self.inputs)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "states", states)
        object.__setattr__(self, "inputs", inputs)
        if states.shape[0] != times.size:
            raise DimensionError(f"{states.shape[0]} state samples for {times.size} instants.")
        if times.size > 1 and np.any(np.diff(times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing.")

    @property
    def n(self) -> int:
        return self.states.shape[1]

    @property
    def N(self) -> int:
        return len(self.inputs)

    @property
    def m(self) -> List[int]:
        return [u.shape[1] for u in self.inputs]

    def __len__(self) -> int:
        return self.times.size


def _noise_drive(spec: GameSpec, noise: Optional[NoiseSpec], times: NDArray[np.float64]) -> Tuple[Matrix, List[Matrix]]:
    """State-space drive ``sum_i B_i w_i(t)`` and per-player noise on ``times``."""
    if noise is None:
        omegas = [np.zeros((times.size, mi)) for mi in spec.m]
    else:
        omegas = probing_signal(noise, times, spec.m)
    drive = np.zeros((times.size, spec.n))
    for b, omega in zip(spec.B, omegas):
        drive += omega @ b.T
    return drive, omegas


def simulate_closed_loop(
    spec: GameSpec,
    fb: FeedbackSet,
    x0: ArrayLike,
    *,
    step: float = 1e-3,
    horizon: float,
    noise: Optional[NoiseSpec] = None,
) -> TrajectoryLog:
    """Integrate ``x' = A x + sum_i B_i u_i`` with ``u_i = -F_i x + w_i(t)`` by fixed-step RK4."""
    if step <= 0 or horizon <= 0:
        raise ValueError("Simulation step and horizon must be positive.")
    if noise is not None:
        noise.check()
    closed = closed_loop_matrix(spec, fb)
    x = np.asarray(x0, dtype=float).ravel()
    if x.size != spec.n:
        raise DimensionError(f"Initial state has {x.size} entries, expected {spec.n}.")
    if noise is None and spectral_abscissa(closed) >= 0.0:
        logger.warning("Simulating with feedback that does not stabilise the closed loop")

    steps = int(round(horizon / step))
    half_grid = np.arange(2 * steps + 1) * (0.5 * step)
    drive, omegas = _noise_drive(spec, noise, half_grid)

    states = np.empty((steps + 1, spec.n))
    states[0] = x
    diverged = False
    last = steps
    for k in range(steps):
        d0, dh, d1 = drive[2 * k], drive[2 * k + 1], drive[2 * k + 2]
        k1 = closed @ x + d0
        k2 = closed @ (x + 0.5 * step * k1) + dh
        k3 = closed @ (x + 0.5 * step * k2) + dh
        k4 = closed @ (x + step * k3) + d1
        x = x + (step / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(x)):
            diverged = True
            last = k
            logger.warning("State became non-finite at t=%.6g; trajectory truncated", (k + 1) * step)
            break
        states[k + 1] = x

    times = half_grid[: 2 * last + 1 : 2]
    states = states[: last + 1]
    inputs = tuple(-states @ f.T + omega[: 2 * last + 1 : 2] for f, omega in zip(fb, omegas))
    logger.debug("Simulated %d samples over %.3g s", times.size, times[-1])
    return TrajectoryLog(times, states, inputs, noise=noise, diverged=diverged, feedback=fb)


def sampled_log(log: TrajectoryLog, indices: Sequence[int]) -> TrajectoryLog:
    """Sub-log restricted to ``indices`` (sorted, unique)."""
    idx = np.unique(np.asarray(indices, dtype=int))
    return TrajectoryLog(
        log.times[idx],
        log.states[idx],
        tuple(u[idx] for u in log.inputs),
        noise=log.noise,
        diverged=log.diverged,
        feedback=log.feedback,
    )


def sample_every(log: TrajectoryLog, interval: float) -> NDArray[np.intp]:
    """Indices of the samples nearest to multiples of ``interval`` from the log start."""
    if interval <= 0:
        raise ValueError("Sampling interval must be positive.")
    targets = np.arange(log.times[0], log.times[-1] + 0.5 * interval, interval)
    return np.unique(nearest_indices(log.times, targets))


def nearest_indices(times: NDArray[np.float64], targets: ArrayLike) -> NDArray[np.intp]:
    """Index of the sample closest to each target instant."""
    targets = np.asarray(targets, dtype=float)
    if times.size == 1:
        return np.zeros(targets.shape, dtype=np.intp)
    right = np.searchsorted(times, targets).clip(1, times.size - 1)
    left = right - 1
    return np.where(np.abs(times[left] - targets) <= np.abs(times[right] - targets), left, right)

