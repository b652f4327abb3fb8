import numpy as np
import pytest

from uavopt import (
    StaticPlacement,
    Trajectory,
    UnlimitedMovementPlanner,
    ZeroMovementPlanner,
    analytic_trajectory_1d,
    build_quadrature,
    deployment_cost,
    trajectory_movement,
    unlimited_movement_plan,
    zero_movement_plan,
)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory(np.zeros((1, 2, 1)), 1.0)
    with pytest.raises(ValueError):
        Trajectory(np.full((3, 2, 1), np.nan), 1.0)
    with pytest.raises(ValueError):
        Trajectory(np.zeros((3, 2, 1)), 0.0)


def test_movement_of_stationary_trajectory():
    traj = Trajectory(np.tile([[0.3], [0.7]], (5, 1, 1)), 2.0)
    per_uav, total = trajectory_movement(traj)
    assert total == 0.0
    assert np.all(per_uav == 0.0)


def test_movement_of_square_path():
    s = 0.4
    corners = np.array([[0, 0], [s, 0], [s, s], [0, s]], dtype=float)
    traj = Trajectory(corners.reshape(4, 1, 2), 1.0)
    per_uav, total = trajectory_movement(traj)
    assert per_uav[0] == pytest.approx(4 * s)
    assert total == pytest.approx(4 * s)


def test_movement_includes_wrap_segment():
    # two slots at different spots: out and back
    traj = Trajectory(np.array([[[0.0]], [[1.0]]]), 1.0)
    _, total = trajectory_movement(traj)
    assert total == pytest.approx(2.0)


def test_movement_invariant_under_cyclic_relabeling():
    rng = np.random.default_rng(0)
    pos = rng.normal(size=(6, 3, 2))
    base = trajectory_movement(Trajectory(pos, 2.0))[1]
    for shift in range(1, 6):
        rolled = np.roll(pos, shift, axis=0)
        assert trajectory_movement(Trajectory(rolled, 2.0))[1] == pytest.approx(base, abs=1e-12)


def test_interpolation_hits_slots_and_wraps():
    pos = np.array([[[0.0]], [[1.0]], [[0.5]]])
    traj = Trajectory(pos, 3.0)
    assert traj.interpolate(1.0)[0, 0] == pytest.approx(1.0)
    assert traj.interpolate(2.5)[0, 0] == pytest.approx(0.25)  # halfway from 0.5 back to 0


def test_zero_movement_on_time_invariant_density(unit_uniform, ugv_model):
    plan = zero_movement_plan(unit_uniform, ugv_model, n=4, K=6, resolution=64)
    static = StaticPlacement(n_points=4, model=ugv_model, resolution=64).fit(unit_uniform)
    assert plan.power == pytest.approx(static.cost_, rel=1e-9)
    assert np.allclose(np.sort(plan.deployment, axis=0), np.sort(static.points_, axis=0), atol=1e-9)
    assert plan.consistency_gap <= 1e-9


def test_zero_movement_never_beats_unlimited(drifting_power_law, ugv_model):
    z = zero_movement_plan(drifting_power_law, ugv_model, n=4, K=10, n_init=3, random_state=0)
    u = unlimited_movement_plan(drifting_power_law, ugv_model, n=4, K=10, n_init=3, random_state=0)
    assert z.power >= u.power - 1e-9


def test_analytic_trajectory_closed_form(drifting_power_law, ugv_model):
    n, K = 8, 20
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, n, K)
    q = (2 * np.arange(1, n + 1) - 1) / (2 * n)
    for k in (0, 3, 10, 15):
        t = 2 * k / K
        s = min(t, 2 - t)
        want = 2 - 2 * s + q ** (1.0 / (1.0 + s))
        assert np.allclose(traj.positions[k, :, 0], want, atol=2e-6)
        assert np.all(np.diff(traj.positions[k, :, 0]) > 0)


def test_analytic_trajectory_sharpest_slot_is_sqrt(drifting_power_law, ugv_model):
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, 8, 20)
    q = (2 * np.arange(1, 9) - 1) / 16
    assert np.allclose(traj.positions[10, :, 0], np.sqrt(q), atol=2e-6)


def test_analytic_trajectory_uniform_density_is_static(unit_uniform, ugv_model):
    traj = analytic_trajectory_1d(unit_uniform, ugv_model, 4, 6)
    want = (2 * np.arange(1, 5) - 1) / 8
    for k in range(6):
        assert np.allclose(traj.positions[k, :, 0], want, atol=1e-8)


def test_analytic_trajectory_rejects_2d(orbiting_gaussian, uav_model):
    with pytest.raises(ValueError):
        analytic_trajectory_1d(orbiting_gaussian, uav_model, 4, 6)


def test_analytic_per_slot_cost_close_to_solver(drifting_power_law, ugv_model):
    # the quantile trajectory is near-optimal per slot at n = 32
    n, K = 32, 20
    plan = unlimited_movement_plan(drifting_power_law, ugv_model, n, K, n_init=5, random_state=0)
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, n, K)
    for k in range(K):
        t = 2 * k / K
        quad = build_quadrature(drifting_power_law, t=t, resolution=256)
        cost = deployment_cost(ugv_model, traj.positions[k], quad,
                               density=drifting_power_law, t=t)
        assert cost <= plan.per_slot_power[k] * 1.10


def test_unlimited_movement_slots_sorted_1d(drifting_power_law, ugv_model):
    plan = unlimited_movement_plan(drifting_power_law, ugv_model, 6, 10, n_init=3, random_state=0)
    for k in range(10):
        assert np.all(np.diff(plan.trajectory.positions[k, :, 0]) >= 0)


def test_planner_estimators(drifting_power_law, ugv_model):
    z = ZeroMovementPlanner(n_points=4, model=ugv_model, n_slots=8, n_init=2,
                            random_state=0).fit(drifting_power_law)
    assert z.deployment_.shape == (4, 1)
    assert z.power_ > 0 and z.consistency_gap_ < 1e-6
    u = UnlimitedMovementPlanner(n_points=4, model=ugv_model, n_slots=8, n_init=2,
                                 random_state=0).fit(drifting_power_law)
    assert u.trajectory_.positions.shape == (8, 4, 1)
    assert u.per_uav_movement_.shape == (4,)
    assert u.power_ <= z.power_ + 1e-9
    assert z.get_params()["n_slots"] == 8


@pytest.mark.slow
def test_unlimited_2d_matches_large_n_prediction(orbiting_gaussian, uav_model):
    # per-slot optimization of the orbiting gaussian approaches
    # h^r + coeff * mean ||f_t||_{1/2} / n
    n = 32
    plan = unlimited_movement_plan(orbiting_gaussian, uav_model, n, K=12,
                                   resolution=120, n_init=5, random_state=0)
    from uavopt import alpha_norm, kappa

    K = 48
    norms = [alpha_norm(orbiting_gaussian.at_time(k / K), 0.5, resolution=160)
             for k in range(K)]
    predicted_excess = (3 * 10 * kappa(2, 2) / 2) * float(np.mean(norms)) / n
    assert plan.power - 1000.0 == pytest.approx(predicted_excess, rel=0.15)


def test_zero_movement_cost_quarters_when_doubling_points(drifting_power_law, ugv_model):
    a = zero_movement_plan(drifting_power_law, ugv_model, n=8, K=21, n_init=5,
                           random_state=0)
    b = zero_movement_plan(drifting_power_law, ugv_model, n=16, K=21, n_init=5,
                           random_state=0)
    assert a.power / b.power == pytest.approx(4.0, rel=0.15)
