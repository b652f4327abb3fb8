"""Quadrature over a density's support, plus the integral functionals built on it.

One-dimensional regions use composite 16-point Gauss-Legendre panels.
Two-dimensional regions use a tensor grid over the support box: cell
midpoints for analytic densities, the tabulation nodes themselves (with
tensor-trapezoid weights) for :class:`TabulatedGrid`, so that integrals of a
tabulated average and of the underlying slices see identical nodes. Weights
are rescaled so the density integrates to exactly one; the applied factor is
recorded on the quadrature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .densities import TabulatedGrid
from .validation import check_count, check_density

_GL_ORDER = 16
_GL_X, _GL_W = np.polynomial.legendre.leggauss(_GL_ORDER)
_TRUNCATE_REL = 1e-12


@dataclass(frozen=True)
class Quadrature:
    """Nodes and weights discretizing integrals against one density snapshot.

    ``weights`` already include the unit-mass rescaling; ``renormalization``
    is the factor that was applied, so ``weights.sum() / renormalization``
    recovers the raw measure of the integration region (``region_measure``).
    """

    nodes: np.ndarray
    weights: np.ndarray
    scheme_id: str
    renormalization: float = 1.0
    region_measure: float = 0.0

    @property
    def dim(self):
        return self.nodes.shape[1]

    def __len__(self):
        return self.nodes.shape[0]


def gauss_legendre_panels(lo, hi, n_panels):
    """Composite Gauss-Legendre nodes/weights on [lo, hi]."""
    edges = np.linspace(lo, hi, n_panels + 1)
    half = 0.5 * (edges[1:] - edges[:-1])
    mid = 0.5 * (edges[1:] + edges[:-1])
    nodes = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
    weights = (half[:, None] * _GL_W[None, :]).ravel()
    return nodes, weights


def _tensor_trapezoid(axes):
    ws = []
    for ax in axes:
        w = np.full(ax.shape[0], ax[1] - ax[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        ws.append(w)
    return ws


def build_quadrature(density, t=0.0, resolution=64):
    """Build the integration rule for ``density`` at time ``t``.

    ``resolution`` is the panel count (1-D) or cells per axis (2-D); it is
    ignored for tabulated densities, whose own grid is reused. 2-D grids drop
    cells where the density is below 1e-12 of its on-grid peak.
    """
    check_density(density)
    check_count(resolution, 8, "resolution")
    t = density.wrap_time(t)
    box = density.support(t)
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("density support is empty")

    if isinstance(density, TabulatedGrid):
        axes = density.grid_axes()
        ws = _tensor_trapezoid(axes)
        if density.dim == 1:
            nodes = axes[0].reshape(-1, 1)
            weights = ws[0]
            scheme = "trapezoid_grid_1d"
        else:
            g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
            nodes = np.column_stack([g1.ravel(), g2.ravel()])
            weights = np.outer(ws[0], ws[1]).ravel()
            scheme = "trapezoid_grid_2d"
    elif density.dim == 1:
        xs, weights = gauss_legendre_panels(box[0, 0], box[0, 1], resolution)
        nodes = xs.reshape(-1, 1)
        scheme = f"gauss_legendre_{_GL_ORDER}"
    else:
        axes, cell_ws = [], []
        for k in range(2):
            edges = np.linspace(box[k, 0], box[k, 1], resolution + 1)
            axes.append(0.5 * (edges[:-1] + edges[1:]))
            cell_ws.append(np.diff(edges))
        g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        nodes = np.column_stack([g1.ravel(), g2.ravel()])
        weights = np.outer(cell_ws[0], cell_ws[1]).ravel()
        scheme = "midpoint_tensor_2d"

    fvals = density._evaluate(t, nodes)
    if density.dim == 2:
        keep = fvals >= _TRUNCATE_REL * fvals.max()
        nodes, weights, fvals = nodes[keep], weights[keep], fvals[keep]

    region_measure = float(weights.sum())
    mass = float(weights @ fvals)
    if mass <= 0.0:
        raise ValueError("density integrates to zero on its support")
    factor = 1.0 / mass
    return Quadrature(
        nodes=nodes,
        weights=weights * factor,
        scheme_id=scheme,
        renormalization=factor,
        region_measure=region_measure,
    )


def density_weights(density, quad, t=0.0):
    """Probability weights w_j * f(q_j); they sum to one by construction."""
    return quad.weights * density._evaluate(density.wrap_time(t), quad.nodes)


def alpha_norm(density, alpha, t=0.0, resolution=256, quad=None):
    """The alpha-norm (integral of f^alpha, raised to 1/alpha) of a density snapshot.

    Defined for alpha in (0, 1]; alpha = 1 returns the total mass.
    """
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if quad is None:
        quad = build_quadrature(density, t=t, resolution=resolution)
    fvals = density._evaluate(density.wrap_time(t), quad.nodes)
    integral = float(quad.weights @ np.power(fvals, alpha))
    return integral ** (1.0 / alpha)


class _CdfTable:
    """Cumulative integral of a 1-D density, exact per Gauss-Legendre panel."""

    def __init__(self, density, t=0.0, resolution=256):
        check_density(density, dim=1)
        check_count(resolution, 8, "resolution")
        self.density = density
        self.t = density.wrap_time(t)
        lo, hi = density.support(self.t)[0]
        self.lo, self.hi = float(lo), float(hi)
        self.edges = np.linspace(self.lo, self.hi, resolution + 1)
        nodes, weights = gauss_legendre_panels(self.lo, self.hi, resolution)
        vals = density._evaluate(self.t, nodes.reshape(-1, 1))
        per_panel = (weights * vals).reshape(resolution, _GL_ORDER).sum(axis=1)
        self.cum = np.concatenate([[0.0], np.cumsum(per_panel)])
        self.total = self.cum[-1]
        if self.total <= 0:
            raise ValueError("density has zero mass on its support")

    def _partial(self, a, theta):
        half = 0.5 * (theta - a)
        mid = 0.5 * (theta + a)
        xs = (mid + half * _GL_X).reshape(-1, 1)
        return half * float(_GL_W @ self.density._evaluate(self.t, xs))

    def cdf(self, theta):
        theta = float(np.clip(theta, self.lo, self.hi))
        j = min(np.searchsorted(self.edges, theta, side="right") - 1, len(self.edges) - 2)
        j = max(j, 0)
        return (self.cum[j] + self._partial(self.edges[j], theta)) / self.total

    def inverse(self, x, tol=1e-10):
        if not 0.0 <= x <= 1.0:
            raise ValueError(f"quantile must lie in [0, 1], got {x}")
        if x == 0.0:
            return self.lo
        if x == 1.0:
            return self.hi
        target = x * self.total
        j = int(np.searchsorted(self.cum, target, side="right") - 1)
        j = min(max(j, 0), len(self.edges) - 2)
        a, b = self.edges[j], self.edges[j + 1]
        base = self.cum[j]
        while b - a > tol:
            m = 0.5 * (a + b)
            if base + self._partial(self.edges[j], m) < target:
                a = m
            else:
                b = m
        return 0.5 * (a + b)


def cdf_1d(density, theta, t=0.0, resolution=256):
    """Cumulative distribution of a 1-D density, measured from its support start."""
    return _CdfTable(density, t=t, resolution=resolution).cdf(theta)


def inverse_cdf_1d(density, x, t=0.0, resolution=256, tol=1e-10):
    """Quantile function of a 1-D density: the theta with CDF(theta) = x.

    Bisection to absolute tolerance ``tol``; monotone nondecreasing in ``x``.
    Accepts a scalar or an array of quantiles.
    """
    table = _CdfTable(density, t=t, resolution=resolution)
    xs = np.asarray(x, dtype=float)
    if xs.ndim == 0:
        return table.inverse(float(xs), tol=tol)
    return np.array([table.inverse(float(v), tol=tol) for v in xs])
