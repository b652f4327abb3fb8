import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from uavopt import (
    FixedRatePower,
    Trajectory,
    TrajectoryOptimizer,
    analytic_trajectory_1d,
    build_quadrature,
    discrete_lagrangian,
    lower_envelope,
    minimize_slot,
    project_to_triangle,
    slot_point_cost,
    solve_subproblem,
    subproblem_gradient,
    unlimited_movement_plan,
    zero_movement_plan,
)
from uavopt.lagrangian import TradeoffPoint, _SlotData, phi_value


# ---------------------------------------------------------------------------
# per-point subproblem


def test_subproblem_closed_form_cases():
    assert solve_subproblem(0.0, 1.0, 0.5, 3.0)[0] == pytest.approx(0.5)
    assert solve_subproblem(0.0, 1.0, 2.0, 1.0)[0] == pytest.approx(1.0)
    assert solve_subproblem(0.0, 1.0, 2.0, 10.0)[0] == pytest.approx(1.9)
    assert solve_subproblem(0.9, 0.9, 0.5, 1.0)[0] == pytest.approx(0.9)


def test_subproblem_degenerate_inputs():
    assert solve_subproblem(0.2, 0.8, 0.5, np.inf)[0] == pytest.approx(0.5)
    x = solve_subproblem(0.2, 0.8, 2.0, 0.0)[0]
    assert 0.2 <= x <= 0.8
    assert phi_value(np.array([x]), 0.2, 0.8, 2.0, 0.0) == pytest.approx(0.6)
    with pytest.raises(ValueError):
        solve_subproblem(0.0, 1.0, 0.5, -1.0)


@settings(max_examples=200, deadline=None)
@given(
    u=st.floats(-3, 3), v=st.floats(-3, 3), w=st.floats(-3, 3),
    c=st.floats(0, 8),
)
def test_subproblem_1d_beats_grid(u, v, w, c):
    x = solve_subproblem(u, v, w, c)[0]
    lo = min(u, v, w) - 1.0
    hi = max(u, v, w) + 1.0
    grid = np.linspace(lo, hi, 4001)
    phi_grid = np.abs(grid - u) + np.abs(grid - v) + c * (grid - w) ** 2
    ours = abs(x - u) + abs(x - v) + c * (x - w) ** 2
    assert ours <= phi_grid.min() + 1e-9


def test_subproblem_2d_matches_dense_grid():
    rng = np.random.default_rng(9)
    for _ in range(25):
        u, v, w = rng.uniform(0, 1, (3, 2))
        c = rng.uniform(0.05, 4.0)
        x = solve_subproblem(u, v, w, c)
        a = np.linspace(0, 1, 201)
        A, B = np.meshgrid(a, a, indexing="ij")
        mask = A + B <= 1.0
        P = w[None, None] + A[..., None] * (u - w) + B[..., None] * (v - w)
        phi = np.where(
            mask,
            np.linalg.norm(P - u, axis=-1) + np.linalg.norm(P - v, axis=-1)
            + c * np.sum((P - w) ** 2, axis=-1),
            np.inf,
        )
        assert float(phi_value(x, u, v, w, c)) <= phi.min() + 1e-9


def test_triangle_projection_dominates_vertices():
    rng = np.random.default_rng(4)
    for _ in range(100):
        u, v, w, x = rng.normal(0, 2, (4, 2))
        y = project_to_triangle(x, u, v, w)
        for a in (u, v, w):
            assert np.linalg.norm(y - a) <= np.linalg.norm(x - a) + 1e-12


# ---------------------------------------------------------------------------
# slot cost and gradient


def _random_cell(rng, m=50):
    nodes = rng.uniform(0, 1, size=(m, 2))
    weights = rng.uniform(0, 1, size=m) / m
    return nodes, weights


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(12)
    model = FixedRatePower(h=2.0, r=3.0)
    for _ in range(20):
        nodes, weights = _random_cell(rng)
        u, v = rng.uniform(-1, 2, (2, 2))
        y = rng.uniform(-1, 2, 2)
        if min(np.linalg.norm(y - u), np.linalg.norm(y - v)) < 1e-2:
            continue
        g = subproblem_gradient(model, y, nodes, weights, u, v, ell=0.7, K=10)
        fd = np.empty(2)
        h = 1e-6
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            fd[k] = (
                slot_point_cost(model, y + e, nodes, weights, u, v, 0.7, 10)
                - slot_point_cost(model, y - e, nodes, weights, u, v, 0.7, 10)
            ) / (2 * h)
        assert np.linalg.norm(g - fd) <= 1e-5 * max(1.0, np.linalg.norm(fd))


def test_gradient_zero_at_centroid_without_penalty():
    rng = np.random.default_rng(13)
    nodes, weights = _random_cell(rng)
    model = FixedRatePower(h=0.0, r=2.0)
    centroid = weights @ nodes / weights.sum()
    g = subproblem_gradient(model, centroid, nodes, weights, centroid, centroid, ell=0.0, K=5)
    assert np.linalg.norm(g) < 1e-12


def test_gradient_penalty_scales_linearly():
    rng = np.random.default_rng(14)
    nodes, weights = _random_cell(rng)
    model = FixedRatePower(h=1.0, r=2.5)
    y = np.array([0.4, 0.6])
    u = np.array([0.0, 0.0])
    v = np.array([1.0, 1.0])
    g0 = subproblem_gradient(model, y, nodes, weights, u, v, ell=0.0, K=7)
    g1 = subproblem_gradient(model, y, nodes, weights, u, v, ell=1.0, K=7)
    g2 = subproblem_gradient(model, y, nodes, weights, u, v, ell=2.0, K=7)
    assert np.allclose(g2 - g1, g1 - g0, atol=1e-12)


def test_gradient_uses_zero_subgradient_at_anchors():
    rng = np.random.default_rng(15)
    nodes, weights = _random_cell(rng)
    model = FixedRatePower(h=0.0, r=2.0)
    y = np.array([0.5, 0.5])
    g_at = subproblem_gradient(model, y, nodes, weights, y, np.array([1.0, 1.0]), ell=1.0, K=5)
    assert np.all(np.isfinite(g_at))


# ---------------------------------------------------------------------------
# Lagrangian evaluation and descent


def test_lagrangian_decomposition(drifting_power_law, ugv_model):
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, 4, 10)
    for ell in (0.0, 0.5, 2.0):
        L, Q, M = discrete_lagrangian(ugv_model, drifting_power_law, traj, ell, resolution=128)
        assert L == pytest.approx(Q + ell * M, abs=1e-12)
    # stationary trajectory carries no movement term
    flat = Trajectory(np.tile([[1.0], [2.5]], (10, 1, 1)), 2.0)
    L, Q, M = discrete_lagrangian(ugv_model, drifting_power_law, flat, 3.0, resolution=128)
    assert M == 0.0 and L == Q


def test_lagrangian_components_match_extremal_values(drifting_power_law, ugv_model):
    n, K = 8, 20
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, n, K)
    L, Q, M = discrete_lagrangian(ugv_model, drifting_power_law, traj, 1.0)
    assert Q * n**2 == pytest.approx(1 / 16, rel=0.10)
    assert M / n == pytest.approx(11 / 6, rel=0.10)
    assert L == pytest.approx(Q + M, abs=1e-12)


def test_minimize_slot_reduces_to_lloyd_without_penalty(unit_uniform, ugv_model):
    quad = build_quadrature(unit_uniform, resolution=64)
    pw = quad.weights * unit_uniform.evaluate(0.0, quad.nodes)
    slot = _SlotData(nodes=quad.nodes, pweights=pw)
    y = np.array([[0.2], [0.6]])
    got = minimize_slot(ugv_model, slot, y, y, y, ell_eff=0.0, max_iterations=1)
    # one pass equals the plain centroid update
    from uavopt import build_partition

    part = build_partition(y, quad.nodes, pw)
    assert np.allclose(got, part.centroids(), atol=1e-12)


def test_minimize_slot_single_point_clamps_to_neighbors(unit_uniform, ugv_model):
    # one point, uniform cell: centroid 0.5, both neighbors at 0.9, unit mass
    quad = build_quadrature(unit_uniform, resolution=64)
    pw = quad.weights * unit_uniform.evaluate(0.0, quad.nodes)
    slot = _SlotData(nodes=quad.nodes, pweights=pw)
    y = np.array([[0.2]])
    anchor = np.array([[0.9]])
    got = minimize_slot(ugv_model, slot, y, anchor, anchor, ell_eff=1.0, max_iterations=5)
    assert got[0, 0] == pytest.approx(0.9, abs=1e-9)


def test_minimize_slot_never_increases_slot_cost(drifting_power_law, ugv_model):
    quad = build_quadrature(drifting_power_law, t=0.4, resolution=64)
    pw = quad.weights * drifting_power_law.evaluate(0.4, quad.nodes)
    slot = _SlotData(nodes=quad.nodes, pweights=pw)
    rng = np.random.default_rng(21)

    def slot_cost(y, u, v, lam):
        from uavopt.costs import nearest_assignment

        _, d2 = nearest_assignment(y, quad.nodes)
        move = np.linalg.norm(y - u, axis=1) + np.linalg.norm(y - v, axis=1)
        return float(pw @ ugv_model.pointwise_cost(d2)) + lam * float(move.sum())

    for _ in range(10):
        y = rng.uniform(1.2, 2.2, (5, 1))
        u = rng.uniform(1.2, 2.2, (5, 1))
        v = rng.uniform(1.2, 2.2, (5, 1))
        lam = rng.uniform(0, 3)
        out = minimize_slot(ugv_model, slot, y, u, v, lam, max_iterations=4)
        assert slot_cost(out, u, v, lam) <= slot_cost(y, u, v, lam) + 1e-12


def test_epoch_lagrangian_monotone_and_consistent(drifting_power_law, ugv_model):
    opt = TrajectoryOptimizer(n_points=4, model=ugv_model, ell=0.8, n_slots=10,
                              max_epochs=12, resolution=128, init="random",
                              random_state=3).fit(drifting_power_law)
    hist = opt.history_
    assert np.all(np.diff(hist[:, 0]) <= 1e-12)
    assert np.allclose(hist[:, 0], hist[:, 1] + 0.8 * hist[:, 2], atol=1e-9)
    assert opt.lagrangian_ <= hist[0, 0] + 1e-12


def test_lagrangian_invariant_under_consistent_relabeling(drifting_power_law, ugv_model):
    traj = analytic_trajectory_1d(drifting_power_law, ugv_model, 5, 8)
    perm = np.random.default_rng(1).permutation(5)
    permuted = Trajectory(traj.positions[:, perm, :], traj.period)
    a = discrete_lagrangian(ugv_model, drifting_power_law, traj, 1.3, resolution=128)
    b = discrete_lagrangian(ugv_model, drifting_power_law, permuted, 1.3, resolution=128)
    assert a == b


def test_huge_multiplier_stays_near_stationary(drifting_power_law, ugv_model):
    z = zero_movement_plan(drifting_power_law, ugv_model, 4, 10, n_init=3, random_state=0)
    opt = TrajectoryOptimizer(n_points=4, model=ugv_model, ell=1000.0, n_slots=10,
                              max_epochs=10, init="stationary", n_init=3,
                              random_state=0).fit(drifting_power_law)
    assert opt.movement_total_ <= 1e-9
    assert opt.power_ == pytest.approx(z.power, rel=0.05)


def test_zero_multiplier_decouples_slots(drifting_power_law, ugv_model):
    u = unlimited_movement_plan(drifting_power_law, ugv_model, 8, 10, n_init=5, random_state=0)
    best = None
    for seed in (0, 1, 2):
        opt = TrajectoryOptimizer(n_points=8, model=ugv_model, ell=0.0, n_slots=10,
                                  max_epochs=25, init="random",
                                  random_state=seed).fit(drifting_power_law)
        if best is None or opt.power_ < best:
            best = opt.power_
    assert best == pytest.approx(u.power, rel=0.05)


def test_optimizer_estimator_protocol(drifting_power_law, ugv_model):
    opt = TrajectoryOptimizer(n_points=3, model=ugv_model, ell=0.5, n_slots=6,
                              max_epochs=3, resolution=64, random_state=0)
    assert opt.get_params()["ell"] == 0.5
    opt.fit(drifting_power_law)
    assert opt.trajectory_.positions.shape == (6, 3, 1)
    assert opt.history_.shape[1] == 3
    with pytest.raises(ValueError):
        TrajectoryOptimizer(n_points=3, ell=-1.0).fit(drifting_power_law)
    with pytest.raises(ValueError):
        TrajectoryOptimizer(n_points=3, init="bogus").fit(drifting_power_law)


def test_lower_envelope_filters_to_decreasing_frontier():
    pts = [TradeoffPoint(ell=e, power=p, movement_total=m, lagrangian=0.0)
           for e, p, m in [(1, 5.0, 0.0), (2, 4.0, 1.0), (3, 4.5, 2.0),
                           (4, 2.0, 3.0), (5, 2.5, 2.5), (6, 1.9, 3.1)]]
    env = lower_envelope(pts)
    ms = [p.movement_total for p in env]
    qs = [p.power for p in env]
    assert ms == sorted(ms)
    assert all(q1 > q2 for q1, q2 in zip(qs, qs[1:]))
    assert qs[0] == 5.0 and qs[-1] == 1.9


def test_subproblem_coincident_anchors_return_centroid():
    # all attractors at the same spot: nothing can beat it
    assert solve_subproblem(0.5, 0.5, 0.5, 2.0)[0] == pytest.approx(0.5)
    x = solve_subproblem(np.array([0.2, 0.7]), np.array([0.2, 0.7]),
                         np.array([0.2, 0.7]), 1.5)
    assert np.allclose(x, [0.2, 0.7])
