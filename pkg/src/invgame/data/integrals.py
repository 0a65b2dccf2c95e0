"""Interval integrals of trajectory data for the model-free least-squares systems.

Row ``l`` of every matrix belongs to the interval ``[t_(l-1), t_l]``:

* ``delta_xx``: ``xhat(t_l) - xhat(t_(l-1))`` with ``xhat`` the quadratic monomials,
* ``I_xx``: integral of ``kron(x, x)``,
* ``I_xu[i]``: integral of ``kron(x, u_i)``,
* ``I_qx``: integral of ``xhat``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.integrate import cumulative_trapezoid

from invgame.errors import DimensionError
from invgame.model.game import FeedbackSet, GameSpec, Matrix, as_matrix
from invgame.model.packing import outer_quad_pack, packed_size, state_quad_pack
from invgame.solver.riccati import closed_loop_matrix

from .simulation import TrajectoryLog, nearest_indices

logger = logging.getLogger(__name__)


def required_rows(n: int, input_dims: Sequence[int]) -> int:
    """Data rows needed by one player's system: ``n(n+1)/2 + n * sum_j m_j``."""
    return packed_size(n) + n * int(sum(input_dims))


@dataclass(frozen=True, eq=False)
class IntegralDataset:
    delta_xx: Matrix
    I_xx: Matrix
    I_xu: Tuple[Matrix, ...]
    I_qx: Matrix
    boundaries: NDArray[np.float64]

    def __post_init__(self) -> None:
        rows = self.delta_xx.shape[0]
        if any(block.shape[0] != rows for block in (self.I_xx, self.I_qx, *self.I_xu)):
            raise DimensionError("Integral data blocks have different row counts.")
        if self.boundaries.size != rows + 1:
            raise DimensionError(f"{rows} intervals need {rows + 1} boundaries, got {self.boundaries.size}.")

    @property
    def s(self) -> int:
        return self.delta_xx.shape[0]

    @property
    def n(self) -> int:
        return int(round(np.sqrt(self.I_xx.shape[1])))

    @property
    def m(self) -> list:
        return [block.shape[1] // self.n for block in self.I_xu]

    @property
    def required_rows(self) -> int:
        return required_rows(self.n, self.m)


def uniform_boundaries(log: TrajectoryLog, interval: float, *, start: Optional[float] = None, end: Optional[float] = None) -> NDArray[np.float64]:
    if interval <= 0:
        raise ValueError("Data interval must be positive.")
    start = log.times[0] if start is None else start
    end = log.times[-1] if end is None else end
    count = int(np.floor((end - start) / interval + 1e-9))
    return start + interval * np.arange(count + 1)


def build_integral_dataset(log: TrajectoryLog, boundaries: ArrayLike) -> IntegralDataset:
    """Integrate the log over consecutive boundary intervals by composite trapezoid.

    Boundaries are snapped to the nearest logged instant.
    """
    idx = nearest_indices(log.times, np.asarray(boundaries, dtype=float))
    if idx.size < 2:
        raise ValueError("At least two boundaries are needed.")
    if np.any(np.diff(idx) < 1):
        raise ValueError("Every data interval must contain at least two log samples.")

    x = log.states
    n = log.n
    xx = (x[:, :, None] * x[:, None, :]).reshape(len(log), n * n)
    cum_xx = cumulative_trapezoid(xx, log.times, axis=0, initial=0.0)
    cum_xu = [
        cumulative_trapezoid((x[:, :, None] * u[:, None, :]).reshape(len(log), -1), log.times, axis=0, initial=0.0)
        for u in log.inputs
    ]
    quad = state_quad_pack(x[idx])
    I_xx = np.diff(cum_xx[idx], axis=0)
    # xx rows are symmetric outer products, so the packed integral is a column subset.
    I_qx = outer_quad_pack(I_xx.reshape(-1, n, n))
    dataset = IntegralDataset(
        delta_xx=np.diff(quad, axis=0),
        I_xx=I_xx,
        I_xu=tuple(np.diff(c[idx], axis=0) for c in cum_xu),
        I_qx=I_qx,
        boundaries=log.times[idx],
    )
    logger.debug("Built integral dataset with %d rows", dataset.s)
    return dataset


@dataclass(frozen=True, eq=False)
class SinusoidalExcitation:
    """Deterministic excitation ``w_i(t) = weights[i] @ sin(frequencies * t)``."""

    frequencies: NDArray[np.float64]
    weights: Tuple[Matrix, ...]

    def __post_init__(self) -> None:
        frequencies = np.asarray(self.frequencies, dtype=float).ravel()
        object.__setattr__(self, "frequencies", frequencies)
        object.__setattr__(self, "weights", tuple(as_matrix(w) for w in self.weights))
        for w in self.weights:
            if w.shape[1] != frequencies.size:
                raise DimensionError(f"Excitation weights need {frequencies.size} columns, got {w.shape[1]}.")

    @classmethod
    def random(cls, input_dims: Sequence[int], count: int, *, seed: int = 0, band: Tuple[float, float] = (0.5, 20.0), amplitude: float = 1.0) -> "SinusoidalExcitation":
        rng = np.random.default_rng(seed)
        frequencies = rng.uniform(band[0], band[1], size=count)
        weights = tuple(amplitude * rng.standard_normal((mi, count)) for mi in input_dims)
        return cls(frequencies, weights)


def _augmented_system(spec: GameSpec, fb: FeedbackSet, excitation: SinusoidalExcitation) -> Tuple[Matrix, Tuple[Matrix, ...]]:
    """Autonomous system of plant and oscillator states plus each player's input map.

    Oscillator pairs ``(sin c t, cos c t)`` follow the plant states, so
    ``u_i = L_i z`` with ``L_i = [-F_i, G_i]``.
    """
    n = spec.n
    count = excitation.frequencies.size
    dim = n + 2 * count
    oscillator = np.zeros((2 * count, 2 * count))
    for k, c in enumerate(excitation.frequencies):
        oscillator[2 * k, 2 * k + 1] = c
        oscillator[2 * k + 1, 2 * k] = -c
    gains = []
    for w in excitation.weights:
        g = np.zeros((w.shape[0], 2 * count))
        g[:, 0::2] = w
        gains.append(g)
    system = np.zeros((dim, dim))
    system[:n, :n] = closed_loop_matrix(spec, fb)
    system[:n, n:] = sum(b @ g for b, g in zip(spec.B, gains))
    system[n:, n:] = oscillator
    maps = tuple(np.hstack([-f, g]) for f, g in zip(fb, gains))
    return system, maps


def exact_integral_dataset(
    spec: GameSpec,
    fb: FeedbackSet,
    x0: ArrayLike,
    excitation: SinusoidalExcitation,
    boundaries: ArrayLike,
) -> IntegralDataset:
    """Integral data of ``u_i = -F_i x + w_i(t)`` computed in closed form.

    Each interval integral of ``z z^T`` comes from one Van Loan block
    exponential, so the rows carry no quadrature error.
    """
    fb.check_against(spec)
    if len(excitation.weights) != spec.N:
        raise DimensionError(f"Excitation covers {len(excitation.weights)} players, game has {spec.N}.")
    bounds = np.asarray(boundaries, dtype=float).ravel()
    if bounds.size < 2 or np.any(np.diff(bounds) <= 0):
        raise ValueError("Boundaries must be strictly increasing with at least two entries.")
    system, maps = _augmented_system(spec, fb, excitation)
    n = spec.n
    dim = system.shape[0]
    count = excitation.frequencies.size

    x0 = np.asarray(x0, dtype=float).ravel()
    z = np.concatenate([x0, np.tile([0.0, 1.0], count)])
    if bounds[0] != 0.0:
        z = linalg.expm(system * bounds[0]) @ z

    zero_block = np.zeros((dim, dim))
    quad, xx_rows, xu_rows = [state_quad_pack(z[:n])], [], [[] for _ in maps]
    for length in np.diff(bounds):
        van_loan = np.block([[-system, np.outer(z, z)], [zero_block, system.T]])
        blocks = linalg.expm(van_loan * length)
        transition_t = blocks[dim:, dim:]
        integral = transition_t.T @ blocks[:dim, dim:]
        integral = 0.5 * (integral + integral.T)
        xx_rows.append(integral[:n, :n].ravel())
        for rows, L in zip(xu_rows, maps):
            rows.append((integral[:n, :] @ L.T).ravel())
        z = transition_t.T @ z
        quad.append(state_quad_pack(z[:n]))

    I_xx = np.asarray(xx_rows)
    return IntegralDataset(
        delta_xx=np.diff(np.asarray(quad), axis=0),
        I_xx=I_xx,
        I_xu=tuple(np.asarray(rows) for rows in xu_rows),
        I_qx=outer_quad_pack(I_xx.reshape(-1, n, n)),
        boundaries=bounds,
    )
