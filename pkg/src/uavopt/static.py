"""Optimal static placement for a time-invariant terminal density.

A weighted Lloyd iteration alternates nearest-point assignment of the
quadrature nodes with per-cell minimization: the mass centroid when the
path-loss exponent is 2, damped gradient descent on the cell integral
otherwise. Alongside the solver live the large-n predictors: the closed-form
power law for the best achievable cost and the matching optimal point density
(a normalized power of the terminal density).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator

from .costs import FixedRatePower, build_partition, nearest_assignment
from .densities import SpatioTemporalDensity
from .quadrature import _GL_W, _GL_X, alpha_norm, build_quadrature, inverse_cdf_1d
from .validation import check_count, check_density, check_points, rng_from


def _hexagon_moment(r):
    # normalized r-th moment of the origin-centered regular hexagon,
    # m(A) = int_A ||q||^r dq / area^((2+r)/2), via polar integration of the
    # 12 congruent half-sectors (circumradius 1, apothem cos(pi/6))
    half = np.pi / 12.0
    phi = half * (_GL_X + 1.0)
    w = half * _GL_W
    rho = np.cos(np.pi / 6.0) / np.cos(phi)
    integral = 12.0 * float(w @ (rho ** (r + 2.0))) / (r + 2.0)
    area = 3.0 * np.sqrt(3.0) / 2.0
    return integral / area ** ((2.0 + r) / 2.0)


def kappa(r, d):
    """Distortion coefficient of the best n-point quantizer, cost ~ kappa * n^(-r/d).

    d = 1 is the normalized moment of an interval in closed form; d = 2 is the
    normalized moment of the regular hexagon (the asymptotically optimal cell).
    """
    if d == 1:
        return 2.0 ** (-r) / (1.0 + r)
    if d == 2:
        return _hexagon_moment(float(r))
    raise ValueError(f"dimension {d} not supported")


def _cell_sums(y, nodes, pweights, assignment, model, want_value=True, want_grad=True):
    """Per-cell integral values/gradients of pw * (||y - q||^2 + h^2)^(r/2)."""
    n = y.shape[0]
    diff = y[assignment] - nodes
    d2 = np.einsum("md,md->m", diff, diff) + model.h**2
    out = []
    if want_value:
        contrib = pweights * d2 ** (model.r / 2.0)
        out.append(np.bincount(assignment, weights=contrib, minlength=n))
    if want_grad:
        scale = pweights * model.r * d2 ** (model.r / 2.0 - 1.0)
        grad = np.column_stack(
            [np.bincount(assignment, weights=scale * diff[:, k], minlength=n) for k in range(y.shape[1])]
        )
        curv = np.bincount(assignment, weights=scale, minlength=n)
        out.extend([grad, curv])
    return out if len(out) > 1 else out[0]


def _minimize_cells(y0, nodes, pweights, assignment, model, grad_tol=1e-9, max_iter=12):
    """Damped gradient descent on each cell integral, vectorized across cells.

    Starts from the current positions and accepts only strict improvements,
    so the summed cell cost never increases. Cells with zero mass keep their
    point untouched. The iteration cap keeps early Lloyd rounds cheap; the
    outer loop converges to the same fixed points (stationary cells), where
    the gradient tolerance takes over.
    """
    y = y0.copy()
    damping = model.r * max(1.0, model.r - 1.0)
    vals, grad, curv = _cell_sums(y, nodes, pweights, assignment, model)
    for _ in range(max_iter):
        gnorm = np.linalg.norm(grad, axis=1)
        active = (gnorm > grad_tol) & (curv > 0)
        if not active.any():
            break
        step = np.zeros_like(gnorm)
        step[active] = 1.0 / (damping * curv[active])
        improved = ~active
        y_next = y.copy()
        for _bt in range(30):
            cand = y - (step * ~improved)[:, None] * grad
            cand_vals = _cell_sums(cand, nodes, pweights, assignment, model, want_grad=False)
            better = ~improved & (cand_vals < vals)
            y_next[better] = cand[better]
            improved |= better
            if improved.all():
                break
            step[~improved] *= 0.5
        if np.array_equal(y_next, y):
            break
        y = y_next
        vals, grad, curv = _cell_sums(y, nodes, pweights, assignment, model)
    return y


@dataclass
class LloydResult:
    points: np.ndarray
    cost: float
    cost_history: np.ndarray
    n_iter: int
    n_empty_events: int = 0


def lloyd_placement(points0, nodes, pweights, model, max_iter=500, tol=1e-10, grad_tol=1e-9):
    """Weighted Lloyd iteration on a fixed quadrature.

    ``pweights`` are probability weights (quadrature weight times density).
    Stops when the relative cost change drops below ``tol`` or after
    ``max_iter`` rounds; the cost sequence is nonincreasing.
    """
    points = check_points(points0, dim=nodes.shape[1]).copy()
    if points.shape[0] > nodes.shape[0]:
        raise ValueError("more points than quadrature nodes")

    def cost_of(pts):
        _, min_d2 = nearest_assignment(pts, nodes)
        return float(pweights @ model.pointwise_cost(min_d2))

    cost = cost_of(points)
    history = [cost]
    n_empty = 0
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        part = build_partition(points, nodes, pweights)
        n_empty += int(np.sum(part.cell_mass == 0))
        if model.r == 2.0:
            points = part.centroids(fallback=points)
        else:
            points = _minimize_cells(points, nodes, pweights, part.assignment, model, grad_tol=grad_tol)
        new_cost = cost_of(points)
        history.append(new_cost)
        if abs(cost - new_cost) <= tol * max(abs(cost), 1e-300):
            cost = new_cost
            break
        cost = new_cost
    return LloydResult(points, cost, np.array(history), n_iter, n_empty)


def stratified_init_1d(density, n, t=0.0, resolution=256):
    """Place n points at the (2i-1)/(2n) quantiles of a 1-D density."""
    qs = (2.0 * np.arange(1, n + 1) - 1.0) / (2.0 * n)
    xs = inverse_cdf_1d(density, qs, t=t, resolution=resolution)
    return xs.reshape(-1, 1)


def kmeanspp_init(nodes, pweights, n, rng):
    """Distance-squared weighted seeding over the quadrature nodes."""
    rng = rng_from(rng)
    prob = np.maximum(pweights, 0.0)
    prob = prob / prob.sum()
    chosen = [rng.choice(nodes.shape[0], p=prob)]
    d2 = np.sum((nodes - nodes[chosen[0]]) ** 2, axis=1)
    for _ in range(1, n):
        scores = prob * d2
        total = scores.sum()
        if total <= 0:
            chosen.append(rng.choice(nodes.shape[0], p=prob))
        else:
            chosen.append(rng.choice(nodes.shape[0], p=scores / total))
        d2 = np.minimum(d2, np.sum((nodes - nodes[chosen[-1]]) ** 2, axis=1))
    return nodes[chosen].copy()


def random_deployment(density, n, seed, t=0.0):
    """n points drawn i.i.d. uniformly over the support box; deterministic per seed."""
    check_density(density)
    check_count(n, 1, "n")
    rng = rng_from(seed)
    box = density.support(density.wrap_time(t))
    return rng.uniform(box[:, 0], box[:, 1], size=(n, box.shape[0]))


def multistart_lloyd(density, model, n, quad, n_init=1, max_iter=500, tol=1e-10,
                     random_state=None, t=0.0, init=None):
    """Best-of-``n_init`` Lloyd runs; the first start is deterministic.

    1-D starts from the quantile-stratified layout, 2-D from weighted
    seeding; extra restarts use fresh weighted seeds. An explicit ``init``
    array replaces the deterministic first start. With several starts, the
    scouting runs use a reduced budget and only the best is polished to the
    full tolerance.
    """
    rng = rng_from(random_state)
    fvals = density._evaluate(density.wrap_time(t), quad.nodes)
    pweights = quad.weights * fvals
    starts = []
    if init is not None:
        starts.append(check_points(init, dim=quad.dim))
    elif density.dim == 1:
        starts.append(stratified_init_1d(density, n, t=t))
    else:
        starts.append(kmeanspp_init(quad.nodes, pweights, n, rng))
    while len(starts) < n_init:
        starts.append(kmeanspp_init(quad.nodes, pweights, n, rng))
    if len(starts) == 1:
        return lloyd_placement(starts[0], quad.nodes, pweights, model, max_iter=max_iter, tol=tol)
    best = None
    scout_iter = min(max_iter, 60)
    for start in starts:
        res = lloyd_placement(start, quad.nodes, pweights, model,
                              max_iter=scout_iter, tol=max(tol, 1e-7))
        if best is None or res.cost < best.cost:
            best = res
    return lloyd_placement(best.points, quad.nodes, pweights, model, max_iter=max_iter, tol=tol)


class PowerDensity(SpatioTemporalDensity):
    """Normalized power of a time-invariant density: f^alpha / Z."""

    time_invariant = True
    period = 1.0

    def __init__(self, base, alpha, resolution=256):
        check_density(base, time_invariant=True)
        if not 0.0 < alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
        self.base = base
        self.alpha = float(alpha)
        self.dim = base.dim
        quad = build_quadrature(base, resolution=resolution)
        fvals = base._evaluate(0.0, quad.nodes)
        self.norm_const = float(quad.weights @ np.power(fvals, self.alpha))

    def _evaluate(self, t, pts):
        return np.power(self.base._evaluate(0.0, pts), self.alpha) / self.norm_const

    def support(self, t=0.0):
        return self.base.support()


def _point_density_exponent(model, d):
    # altitude zero matches cells to the cost exponent; any positive altitude
    # reduces to the squared-distance regime
    return d / (d + model.r) if model.h == 0.0 else d / (d + 2.0)


def point_density_function(density, model, t=0.0, resolution=256):
    """The optimal point (access-point) density for a density snapshot."""
    snap = check_density(density).at_time(t)
    return PowerDensity(snap, _point_density_exponent(model, density.dim), resolution=resolution)


def optimal_point_density(density, model, q, t=0.0, resolution=256):
    """Evaluate the optimal point density at location(s) ``q``."""
    return point_density_function(density, model, t=t, resolution=resolution).evaluate(0.0, q)


def asymptotic_power(model, density, n, t=0.0, resolution=256, quad=None):
    """Large-n prediction of the best achievable average cost.

    Altitude zero: kappa(r, d) * n^(-r/d) * ||f||_{d/(d+r)}. Positive
    altitude: h^r + (r h^(r-2) kappa(2, d) / 2) * n^(-2/d) * ||f||_{d/(d+2)}.
    """
    check_count(n, 1, "n")
    d = density.dim
    snap = density.at_time(t)
    if model.h == 0.0:
        norm = alpha_norm(snap, d / (d + model.r), resolution=resolution, quad=quad)
        return kappa(model.r, d) * n ** (-model.r / d) * norm
    norm = alpha_norm(snap, d / (d + 2.0), resolution=resolution, quad=quad)
    lead = model.r * model.h ** (model.r - 2.0) * kappa(2.0, d) / 2.0
    return model.h**model.r + lead * n ** (-2.0 / d) * norm


class StaticPlacement(BaseEstimator):
    """Lloyd-optimized placement of ``n_points`` access points.

    Parameters follow scikit-learn conventions: everything is set in the
    constructor, ``fit`` consumes a density (frozen at time ``t`` when it is
    time-varying) and exposes the result through trailing-underscore
    attributes. ``predict`` assigns query locations to their nearest fitted
    point and ``transform`` returns the distance matrix, so the fitted object
    composes with standard pipeline tooling.
    """

    def __init__(self, n_points=8, model=None, t=0.0, resolution=256, n_init=1,
                 max_iter=500, tol=1e-10, random_state=None):
        self.n_points = n_points
        self.model = model
        self.t = t
        self.resolution = resolution
        self.n_init = n_init
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state

    def _model(self):
        return self.model if self.model is not None else FixedRatePower()

    def fit(self, density, init=None):
        check_density(density)
        check_count(self.n_points, 1, "n_points")
        model = self._model()
        quad = build_quadrature(density, t=self.t, resolution=self.resolution)
        res = multistart_lloyd(
            density, model, self.n_points, quad,
            n_init=self.n_init, max_iter=self.max_iter, tol=self.tol,
            random_state=self.random_state, t=self.t, init=init,
        )
        self.points_ = res.points
        self.cost_ = res.cost
        self.cost_history_ = res.cost_history
        self.n_iter_ = res.n_iter
        self.quadrature_ = quad
        return self

    def predict(self, q):
        """Index of the nearest fitted point for each query location."""
        pts = check_points(q, dim=self.points_.shape[1], name="query points")
        idx, _ = nearest_assignment(self.points_, pts)
        return idx

    def transform(self, q):
        """Euclidean ground distances from each query location to every fitted point."""
        pts = check_points(q, dim=self.points_.shape[1], name="query points")
        d2 = np.sum((pts[:, None, :] - self.points_[None, :, :]) ** 2, axis=-1)
        return np.sqrt(d2)

    def score(self, density=None):
        """Negative fitted cost (higher is better, scikit-learn convention)."""
        return -self.cost_
