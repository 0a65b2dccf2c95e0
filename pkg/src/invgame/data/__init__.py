"""Trajectory generation, feedback estimation and integral data."""

from .estimation import estimate_feedback
from .integrals import (
    IntegralDataset,
    SinusoidalExcitation,
    build_integral_dataset,
    exact_integral_dataset,
    required_rows,
    uniform_boundaries,
)
from .simulation import (
    NoiseSpec,
    TrajectoryLog,
    nearest_indices,
    probing_signal,
    sample_every,
    sampled_log,
    simulate_closed_loop,
)

__all__ = [
    "IntegralDataset",
    "NoiseSpec",
    "SinusoidalExcitation",
    "TrajectoryLog",
    "build_integral_dataset",
    "estimate_feedback",
    "exact_integral_dataset",
    "nearest_indices",
    "probing_signal",
    "required_rows",
    "sample_every",
    "sampled_log",
    "simulate_closed_loop",
    "uniform_boundaries",
]
