import numpy as np
import pytest

from invgame.data import (
    IntegralDataset,
    SinusoidalExcitation,
    TrajectoryLog,
    build_integral_dataset,
    exact_integral_dataset,
    required_rows,
    simulate_closed_loop,
    uniform_boundaries,
)
from invgame.model import FeedbackSet
from invgame.model.packing import outer_quad_pack

from conftest import random_game


def test_constant_state_interval():
    c = np.array([2.0, -1.0])
    times = np.linspace(0.0, 1.0, 5)
    log = TrajectoryLog(times, np.tile(c, (5, 1)), (np.zeros((5, 1)),))
    data = build_integral_dataset(log, [0.0, 1.0])
    np.testing.assert_allclose(data.delta_xx, np.zeros((1, 3)), atol=1e-15)
    np.testing.assert_allclose(data.I_xx[0], np.kron(c, c))
    np.testing.assert_allclose(data.I_xu[0], np.zeros((1, 2)))


def test_linear_ramp_integral():
    times = np.linspace(0.0, 1.0, 1001)
    states = np.column_stack([times, np.zeros_like(times)])
    log = TrajectoryLog(times, states, (np.ones((times.size, 1)),))
    data = build_integral_dataset(log, [0.0, 1.0])
    assert data.I_xx[0, 0] == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert data.I_xu[0][0, 0] == pytest.approx(0.5, abs=1e-12)
    assert data.delta_xx[0, 0] == pytest.approx(1.0)
    np.testing.assert_allclose(data.I_qx, outer_quad_pack(data.I_xx.reshape(-1, 2, 2)))


def test_probe_protocol_rows(two_player):
    log = simulate_closed_loop(two_player, FeedbackSet(([[6.2586, 0.0186]], [[-0.0532, 0.062]])), [1.0, -1.0], step=1e-3, horizon=2.0)
    data = build_integral_dataset(log, uniform_boundaries(log, 0.01))
    assert data.s == 200
    assert data.required_rows == required_rows(2, [1, 1]) == 7


def test_interval_shorter_than_log_step_is_rejected():
    log = TrajectoryLog([0.0, 1.0, 2.0], np.ones((3, 1)), (np.zeros((3, 1)),))
    with pytest.raises(ValueError):
        build_integral_dataset(log, [0.0, 0.1, 0.2])


def test_exact_integrals_agree_with_quadrature_on_unexcited_data():
    spec = random_game(21)
    fb = FeedbackSet.zeros(spec)
    excitation = SinusoidalExcitation(np.array([1.0]), (np.zeros((1, 1)), np.zeros((1, 1))))
    boundaries = np.linspace(0.0, 1.0, 11)
    exact = exact_integral_dataset(spec, fb, [1.0, -0.5], excitation, boundaries)
    log = simulate_closed_loop(spec, fb, [1.0, -0.5], step=1e-3, horizon=1.0)
    quadrature = build_integral_dataset(log, boundaries)
    np.testing.assert_allclose(exact.I_xx, quadrature.I_xx, rtol=1e-5, atol=1e-6)
    np.testing.assert_allclose(exact.delta_xx, quadrature.delta_xx, atol=1e-9)
    np.testing.assert_allclose(exact.I_qx, quadrature.I_qx, rtol=1e-5, atol=1e-6)


def test_exact_integrals_satisfy_the_value_identity():
    spec = random_game(8)
    fb = FeedbackSet.zeros(spec)
    excitation = SinusoidalExcitation.random(spec.m, 4, seed=2)
    data = exact_integral_dataset(spec, fb, [0.5, 1.0], excitation, np.linspace(0.0, 2.0, 21))
    # d(x^T P x) = int x^T (A^T P + P A) x + 2 sum_j int u_j^T B_j^T P x
    P = np.array([[2.0, 0.3], [0.3, 1.0]])
    lhs = data.delta_xx @ np.array([P[0, 0], 2.0 * P[0, 1], P[1, 1]])
    rhs = data.I_xx @ (spec.A.T @ P + P @ spec.A).ravel(order="F")
    for b, block in zip(spec.B, data.I_xu):
        rhs = rhs + 2.0 * block @ (b.T @ P).ravel(order="F")
    np.testing.assert_allclose(lhs, rhs, atol=1e-10)


def test_dataset_rejects_mismatched_rows():
    with pytest.raises(ValueError):
        IntegralDataset(np.zeros((3, 3)), np.zeros((2, 4)), (np.zeros((3, 2)),), np.zeros((3, 3)), np.arange(4.0))
