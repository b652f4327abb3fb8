"""Pointwise access-cost kernels and deployment costs.

Every deployment cost has the form  integral of g(min_i ||x_i - q||^2 + h^2)
against the terminal density, where g is the channel kernel. All variants are
expressed in minimize sense (rate kernels are negated), so one optimizer code
path serves them all. Voronoi cells are never built geometrically; integrals
are decomposed by assigning each quadrature node to its nearest point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .validation import check_points, check_positive


class CostModel:
    """Base access-cost kernel; subclasses define ``pointwise_cost``.

    ``h`` is the fixed altitude (m), ``r`` the path-loss exponent. Kernels are
    monotone in the squared ground distance.
    """

    sense = "minimize"

    def __init__(self, h=0.0, r=2.0):
        self.h = check_positive(h, "h", allow_zero=True)
        self.r = check_positive(r, "r")

    def pointwise_cost(self, ground_dist_sq):
        raise NotImplementedError

    def _abs_dist_sq(self, ground_dist_sq):
        d2 = np.asarray(ground_dist_sq, dtype=float)
        if np.any(d2 < 0):
            raise ValueError("squared distances must be nonnegative")
        return d2 + self.h**2

    def __repr__(self):
        args = ", ".join(f"{k}={v!r}" for k, v in vars(self).items())
        return f"{type(self).__name__}({args})"


class FixedRatePower(CostModel):
    """Transmission power for fixed-rate terminals: (d^2 + h^2)^(r/2)."""

    def pointwise_cost(self, ground_dist_sq):
        return self._abs_dist_sq(ground_dist_sq) ** (self.r / 2.0)


class ProbabilisticLoS(CostModel):
    """Fixed-rate power under a probabilistic line-of-sight channel.

    The line-of-sight probability rises with the elevation angle
    theta = atan(h / ground distance) as 1 / (1 + c exp(-b (theta - c)));
    non-LoS transmissions pay an extra 1/delta attenuation penalty.
    """

    def __init__(self, h=0.0, r=2.0, b=0.3, c=0.6, delta=0.1):
        super().__init__(h=h, r=r)
        self.b = check_positive(b, "b")
        self.c = check_positive(c, "c")
        delta = float(delta)
        if not 0.0 < delta < 1.0:
            raise ValueError(f"delta must lie in (0, 1), got {delta}")
        self.delta = delta

    def los_probability(self, ground_dist_sq):
        d2 = np.asarray(ground_dist_sq, dtype=float)
        with np.errstate(divide="ignore"):
            theta = np.where(d2 > 0, np.arctan(self.h / np.sqrt(np.maximum(d2, 1e-300))), np.pi / 2)
        return 1.0 / (1.0 + self.c * np.exp(-self.b * (theta - self.c)))

    def pointwise_cost(self, ground_dist_sq):
        base = self._abs_dist_sq(ground_dist_sq) ** (self.r / 2.0)
        p = self.los_probability(ground_dist_sq)
        return base * (p + (1.0 - p) / self.delta)


class VariableRateFixedPower(CostModel):
    """Negated achievable rate for fixed-power terminals (so lower is better)."""

    def __init__(self, h=0.0, r=2.0, power=1.0):
        super().__init__(h=h, r=r)
        self.power = check_positive(power, "power")

    def pointwise_cost(self, ground_dist_sq):
        sig = self._abs_dist_sq(ground_dist_sq) ** (self.r / 2.0)
        return -np.log2(1.0 + self.power / sig)


class InterferenceAwareRate(VariableRateFixedPower):
    """Massive-MIMO average rate under the single-nearest approximation.

    For large path-loss exponents the rate seen through all access points
    collapses to the nearest one, so the kernel coincides with the
    variable-rate fixed-power case.
    """


_MODEL_VARIANTS = {
    "fixed_rate_power": FixedRatePower,
    "probabilistic_los": ProbabilisticLoS,
    "variable_rate_fixed_power": VariableRateFixedPower,
    "interference_aware_rate": InterferenceAwareRate,
}


def make_cost_model(variant, **params):
    """Instantiate a kernel by variant name (used by the scenario configs)."""
    try:
        cls = _MODEL_VARIANTS[variant]
    except KeyError:
        known = ", ".join(sorted(_MODEL_VARIANTS))
        raise ValueError(f"unknown cost model variant {variant!r}; known: {known}") from None
    return cls(**params)


def pairwise_sq_dists(points, nodes):
    """Squared Euclidean distances, shape (n_points, n_nodes)."""
    p2 = np.sum(points**2, axis=1)[:, None]
    q2 = np.sum(nodes**2, axis=1)[None, :]
    d2 = p2 + q2 - 2.0 * points @ nodes.T
    return np.maximum(d2, 0.0)


def nearest_assignment(points, nodes):
    """Index of the nearest point per node and the squared distance to it.

    Ties resolve to the lowest point index (argmin convention).
    """
    d2 = pairwise_sq_dists(points, nodes)
    idx = np.argmin(d2, axis=0)
    return idx, d2[idx, np.arange(nodes.shape[0])]


@dataclass
class VoronoiPartition:
    """Node-to-cell assignment with per-cell accumulated mass and moment."""

    assignment: np.ndarray
    cell_mass: np.ndarray
    cell_first_moment: np.ndarray

    @property
    def n_cells(self):
        return self.cell_mass.shape[0]

    def centroids(self, fallback=None):
        """Mass centroid per cell; empty cells take ``fallback`` rows if given."""
        out = np.empty_like(self.cell_first_moment)
        ok = self.cell_mass > 0
        out[ok] = self.cell_first_moment[ok] / self.cell_mass[ok, None]
        if fallback is not None:
            out[~ok] = fallback[~ok]
        elif not np.all(ok):
            raise ValueError("empty cell with no fallback position")
        return out


def build_partition(points, nodes, weights):
    """Assign quadrature nodes to nearest points, accumulating mass and moment.

    ``weights`` are probability weights (quadrature weight times density), so
    cell masses sum to the total mass of the rule.
    """
    points = check_points(points)
    idx, _ = nearest_assignment(points, nodes)
    n = points.shape[0]
    mass = np.bincount(idx, weights=weights, minlength=n)
    moment = np.column_stack(
        [np.bincount(idx, weights=weights * nodes[:, k], minlength=n) for k in range(nodes.shape[1])]
    )
    return VoronoiPartition(assignment=idx, cell_mass=mass, cell_first_moment=moment)


def deployment_cost(model, points, quad, density=None, t=0.0, fvals=None):
    """Average access cost of a deployment against one density snapshot.

    Provide either ``density`` (evaluated at the quadrature nodes) or
    precomputed node densities ``fvals``.
    """
    points = check_points(points, dim=quad.dim)
    if fvals is None:
        if density is None:
            raise ValueError("pass a density or precomputed fvals")
        fvals = density._evaluate(density.wrap_time(t), quad.nodes)
    _, min_d2 = nearest_assignment(points, quad.nodes)
    return float((quad.weights * fvals) @ model.pointwise_cost(min_d2))
