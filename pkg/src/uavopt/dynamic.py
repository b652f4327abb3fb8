"""Extremal dynamic plans: no movement at all, or unlimited movement.

The no-movement optimum places a fixed deployment against the time-averaged
density; the unlimited-movement optimum re-solves every time slot
independently (warm-started along the slots so point identities persist).
For one-dimensional densities the per-slot optima are also available in
closed form through the quantile function of the optimal point density,
which yields the analytic trajectories and their total movement.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .costs import FixedRatePower, deployment_cost
from .densities import time_averaged_density
from .quadrature import _CdfTable, build_quadrature
from .static import multistart_lloyd, point_density_function
from .validation import check_count, check_density


@dataclass
class Trajectory:
    """Periodic discrete-time positions: slot k holds the deployment at time k T / K.

    Wrap-around is structural: slot K connects back to slot 0, so movement and
    interpolation always include the closing segment.
    """

    positions: np.ndarray  # (K, n, d)
    period: float

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[0] < 2:
            raise ValueError("positions must have shape (K, n, d) with K >= 2")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        if self.period <= 0:
            raise ValueError("period must be positive")

    @property
    def n_slots(self):
        return self.positions.shape[0]

    @property
    def n_points(self):
        return self.positions.shape[1]

    @property
    def dim(self):
        return self.positions.shape[2]

    def slot_times(self):
        k = np.arange(self.n_slots)
        return self.period * k / self.n_slots

    def interpolate(self, t):
        """Positions at an arbitrary time by linear interpolation between slots."""
        tau = (float(t) % self.period) / self.period * self.n_slots
        k = int(np.floor(tau)) % self.n_slots
        frac = tau - np.floor(tau)
        nxt = (k + 1) % self.n_slots
        return (1.0 - frac) * self.positions[k] + frac * self.positions[nxt]


def trajectory_movement(traj):
    """Piecewise-linear path length per unit time, per point and total.

    Includes the wrap segment from the last slot back to the first; the 1/T
    factor makes the result a time-averaged traversal speed times period,
    i.e. distance per period divided by the period.
    """
    pos = traj.positions
    steps = pos - np.roll(pos, 1, axis=0)
    per_uav = np.linalg.norm(steps, axis=2).sum(axis=0) / traj.period
    return per_uav, float(per_uav.sum())


def analytic_trajectory_1d(density, model, n, K, resolution=256):
    """Closed-form slot positions via the quantile function of the optimal point density.

    Slot k places point i at the (2i-1)/(2n) quantile of the optimal point
    density for the slot's snapshot, so slots are sorted by construction.
    Only defined for one-dimensional densities.
    """
    check_density(density)
    if density.dim != 1:
        raise ValueError("analytic trajectories are only available in one dimension")
    check_count(n, 1, "n")
    check_count(K, 2, "K")
    qs = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    slots = np.empty((K, n, 1))
    for k in range(K):
        t = density.period * k / K
        lam = point_density_function(density, model, t=t, resolution=resolution)
        table = _CdfTable(lam, resolution=resolution)
        slots[k, :, 0] = [table.inverse(float(x)) for x in qs]
    return Trajectory(slots, density.period)


@dataclass
class ZeroMovementResult:
    deployment: np.ndarray
    power: float                 # time-averaged cost of the fixed deployment
    power_static: float          # same deployment costed against the tabulated average
    consistency_gap: float
    averaged_density: object
    per_slot_power: np.ndarray


@dataclass
class UnlimitedMovementResult:
    trajectory: Trajectory
    power: float
    movement_total: float
    per_uav_movement: np.ndarray
    per_slot_power: np.ndarray


def _slot_times(density, K):
    return density.period * np.arange(K) / K


def zero_movement_plan(density, model, n, K, resolution=256, grid_shape=None,
                       n_init=1, max_iter=500, tol=1e-10, random_state=None,
                       consistency_tol=1e-6):
    """Best fixed deployment for a time-varying density.

    Averages the density over the K slot times (trapezoid with matched
    endpoints, so the average is exactly the slot mean), optimizes a static
    placement against it, then reports the slot-averaged cost of that fixed
    deployment. By linearity the two cost evaluations must agree; the
    residual gap (tabulation interpolation only) is checked against
    ``consistency_tol`` scaled by the cost magnitude.
    """
    check_density(density)
    check_count(K, 2, "K")
    # a time-invariant density is its own average; tabulating it would only
    # add interpolation error
    if density.time_invariant:
        fbar = density
    else:
        fbar = time_averaged_density(density, K + 1, grid_shape=grid_shape, even_panels=False)
    quad = build_quadrature(fbar, resolution=resolution)
    res = multistart_lloyd(fbar, model, n, quad, n_init=n_init, max_iter=max_iter,
                           tol=tol, random_state=random_state)
    # slot costs on the same nodes as the tabulated average, so the mean over
    # slots and the cost against the average differ only by interpolation
    per_slot = np.array([
        deployment_cost(model, res.points, quad, density=density, t=t)
        for t in _slot_times(density, K)
    ])
    power = float(per_slot.mean())
    gap = abs(power - res.cost)
    if gap > consistency_tol * max(1.0, abs(power)):
        raise RuntimeError(
            f"slot-averaged cost {power!r} and averaged-density cost {res.cost!r} "
            f"disagree by {gap:.3e}"
        )
    return ZeroMovementResult(
        deployment=res.points,
        power=power,
        power_static=res.cost,
        consistency_gap=gap,
        averaged_density=fbar,
        per_slot_power=per_slot,
    )


def _match_by_rank(points):
    order = np.argsort(points[:, 0])
    return points[order]


def _affine_align(points, box_old, box_new):
    """Map points through the affine transform aligning one support box onto another.

    Keeps a warm start valid when the support drifts or breathes between
    slots; without it, stale points strand in zero-density cells and the
    empty-cell rule freezes them.
    """
    w_old = box_old[:, 1] - box_old[:, 0]
    w_new = box_new[:, 1] - box_new[:, 0]
    return box_new[:, 0] + (points - box_old[:, 0]) * (w_new / w_old)


def unlimited_movement_plan(density, model, n, K, resolution=256, n_init=1,
                            max_iter=500, tol=1e-10, random_state=None):
    """Independent per-slot optima, warm-started so identities stay aligned.

    Slot 0 may be multi-started; each later slot starts from the previous
    slot's solution, which both speeds convergence and keeps the slot-to-slot
    matching (1-D additionally sorts every slot, the minimal-movement
    matching on a line).
    """
    check_density(density)
    check_count(K, 2, "K")
    times = _slot_times(density, K)
    slots = np.empty((K, n, density.dim))
    per_slot = np.empty(K)
    prev = None
    prev_box = None
    for k, t in enumerate(times):
        quad = build_quadrature(density, t=t, resolution=resolution)
        box = density.support(density.wrap_time(t))
        init = None if prev is None else _affine_align(prev, prev_box, box)
        res = multistart_lloyd(
            density, model, n, quad,
            n_init=n_init if init is None else 1,
            max_iter=max_iter, tol=tol, random_state=random_state, t=t,
            init=init,
        )
        pts = _match_by_rank(res.points) if density.dim == 1 else res.points
        slots[k] = pts
        per_slot[k] = res.cost
        prev, prev_box = pts, box
    traj = Trajectory(slots, density.period)
    per_uav, total = trajectory_movement(traj)
    return UnlimitedMovementResult(
        trajectory=traj,
        power=float(per_slot.mean()),
        movement_total=total,
        per_uav_movement=per_uav,
        per_slot_power=per_slot,
    )


class ZeroMovementPlanner(BaseEstimator):
    """Estimator wrapper for the no-movement plan: fit a fixed deployment.

    After ``fit(density)``: ``deployment_`` (n, d), ``power_`` (slot-averaged
    cost), ``averaged_density_`` and ``consistency_gap_``.
    """

    def __init__(self, n_points=8, model=None, n_slots=20, resolution=256,
                 grid_shape=None, n_init=1, max_iter=500, tol=1e-10,
                 random_state=None, consistency_tol=1e-6):
        self.n_points = n_points
        self.model = model
        self.n_slots = n_slots
        self.resolution = resolution
        self.grid_shape = grid_shape
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.consistency_tol = consistency_tol

    def fit(self, density):
        model = self.model if self.model is not None else FixedRatePower()
        res = zero_movement_plan(
            density, model, self.n_points, self.n_slots,
            resolution=self.resolution, grid_shape=self.grid_shape,
            n_init=self.n_init, max_iter=self.max_iter, tol=self.tol,
            random_state=self.random_state, consistency_tol=self.consistency_tol,
        )
        self.deployment_ = res.deployment
        self.power_ = res.power
        self.power_static_ = res.power_static
        self.consistency_gap_ = res.consistency_gap
        self.averaged_density_ = res.averaged_density
        self.per_slot_power_ = res.per_slot_power
        return self

    def score(self, density=None):
        return -self.power_


class UnlimitedMovementPlanner(BaseEstimator):
    """Estimator wrapper for per-slot independent optima.

    After ``fit(density)``: ``trajectory_``, ``power_``, ``movement_total_``,
    ``per_uav_movement_`` and ``per_slot_power_``.
    """

    def __init__(self, n_points=8, model=None, n_slots=20, resolution=256,
                 n_init=1, max_iter=500, tol=1e-10, random_state=None):
        self.n_points = n_points
        self.model = model
        self.n_slots = n_slots
        self.resolution = resolution
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def fit(self, density):
        model = self.model if self.model is not None else FixedRatePower()
        res = unlimited_movement_plan(
            density, model, self.n_points, self.n_slots,
            resolution=self.resolution, n_init=self.n_init,
            max_iter=self.max_iter, tol=self.tol, random_state=self.random_state,
        )
        self.trajectory_ = res.trajectory
        self.power_ = res.power
        self.movement_total_ = res.movement_total
        self.per_uav_movement_ = res.per_uav_movement
        self.per_slot_power_ = res.per_slot_power
        return self

    def score(self, density=None):
        return -self.power_
