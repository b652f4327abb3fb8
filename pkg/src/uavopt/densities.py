"""Ground-terminal density families: periodic in time, evaluable anywhere in space.

Points are plain float arrays of shape (m, d) with d in {1, 2}; a density
object knows its dimension, its period, and how to evaluate itself at any
time. Everything downstream (quadrature, placement, trajectories) consumes
this interface only, so new families can be added by subclassing
:class:`SpatioTemporalDensity`.
"""

from __future__ import annotations

import numpy as np

from .validation import as_points, check_count, check_positive


class SpatioTemporalDensity:
    """A probability density over R^d varying periodically in time.

    Subclasses implement ``_evaluate(t, pts)`` on wrapped times and strict
    (m, d) arrays, plus ``support(t)`` returning a (d, 2) bounds array.
    The density must be nonnegative and integrate to one at every time.
    """

    dim = 1
    period = 1.0
    time_invariant = False

    def wrap_time(self, t):
        t = float(t)
        if not np.isfinite(t):
            raise ValueError("time must be finite")
        return t % self.period

    def evaluate(self, t, q):
        """Density value(s) at time ``t`` and location(s) ``q``; zero outside support."""
        pts, single = as_points(q, self.dim)
        vals = self._evaluate(self.wrap_time(t), pts)
        return float(vals[0]) if single else vals

    def _evaluate(self, t, pts):
        raise NotImplementedError

    def support(self, t=0.0):
        """Bounding interval/box of the support at time ``t``, shape (d, 2)."""
        raise NotImplementedError

    def at_time(self, t):
        """Time-invariant view of this density frozen at ``t``."""
        if self.time_invariant:
            return self
        return FrozenSlice(self, t)


class FrozenSlice(SpatioTemporalDensity):
    """Time-invariant view of another density at a fixed instant."""

    time_invariant = True
    period = 1.0

    def __init__(self, base, t):
        self.base = base
        self.t0 = base.wrap_time(t)
        self.dim = base.dim

    def _evaluate(self, t, pts):
        return self.base._evaluate(self.t0, pts)

    def support(self, t=0.0):
        return self.base.support(self.t0)


class UniformInterval(SpatioTemporalDensity):
    """Uniform density on a 1-D interval [lo, hi]."""

    dim = 1
    time_invariant = True

    def __init__(self, lo=0.0, hi=1.0, period=1.0):
        lo, hi = float(lo), float(hi)
        if not hi > lo:
            raise ValueError("need hi > lo")
        self.lo, self.hi = lo, hi
        self.period = check_positive(period, "period")

    def _evaluate(self, t, pts):
        x = pts[:, 0]
        inside = (x >= self.lo) & (x <= self.hi)
        return np.where(inside, 1.0 / (self.hi - self.lo), 0.0)

    def support(self, t=0.0):
        return np.array([[self.lo, self.hi]])


class ShiftedPowerLaw1D(SpatioTemporalDensity):
    """Drifting power-law density on a unit-width 1-D window.

    With s the time wrapped into [-1, 1] and a = exponent_rate,
    b = drift_rate, c = offset, the window is [c - b|s|, c - b|s| + 1] and
    the density on it is (1 + a|s|) * (q - window_start)^(a|s|). The default
    parameters give a uniform block at s = 0 that sharpens into a q^3 ramp
    at |s| = 1 while sliding left.
    """

    dim = 1
    period = 2.0

    def __init__(self, exponent_rate=3.0, drift_rate=2.0, offset=2.0):
        self.exponent_rate = check_positive(exponent_rate, "exponent_rate")
        self.drift_rate = check_positive(drift_rate, "drift_rate", allow_zero=True)
        self.offset = float(offset)

    def _abs_phase(self, t):
        # t already wrapped into [0, 2); fold onto [-1, 1] and take |.|
        return t if t <= 1.0 else 2.0 - t

    def _evaluate(self, t, pts):
        s = self._abs_phase(t)
        start = self.offset - self.drift_rate * s
        u = pts[:, 0] - start
        power = self.exponent_rate * s
        inside = (u >= 0.0) & (u <= 1.0)
        vals = np.zeros(pts.shape[0])
        u_in = u[inside]
        vals[inside] = (1.0 + power) * np.power(u_in, power)
        return vals

    def support(self, t=0.0):
        s = self._abs_phase(self.wrap_time(t))
        start = self.offset - self.drift_rate * s
        return np.array([[start, start + 1.0]])


class MovingGaussian2D(SpatioTemporalDensity):
    """Isotropic 2-D Gaussian whose center orbits a circle while it breathes.

    Center (R sin 2 pi t, R cos 2 pi t), standard deviation
    sigma_base + sigma_amp * sin 2 pi t. The support is unbounded; ``support``
    reports the +-6 sigma box used as the integration region, which carries
    all but ~4e-9 of the mass.
    """

    dim = 2
    period = 1.0

    def __init__(self, orbit_radius=10.0, sigma_base=3.0, sigma_amp=2.0, n_sigma=6.0):
        self.orbit_radius = check_positive(orbit_radius, "orbit_radius", allow_zero=True)
        self.sigma_base = check_positive(sigma_base, "sigma_base")
        self.sigma_amp = check_positive(sigma_amp, "sigma_amp", allow_zero=True)
        if self.sigma_amp >= self.sigma_base:
            raise ValueError("sigma_amp must stay below sigma_base so sigma > 0")
        self.n_sigma = check_positive(n_sigma, "n_sigma")

    def center(self, t):
        ang = 2.0 * np.pi * self.wrap_time(t)
        return self.orbit_radius * np.array([np.sin(ang), np.cos(ang)])

    def sigma(self, t):
        return self.sigma_base + self.sigma_amp * np.sin(2.0 * np.pi * self.wrap_time(t))

    def _evaluate(self, t, pts):
        mu = self.center(t)
        sig = self.sigma(t)
        d2 = np.sum((pts - mu) ** 2, axis=1)
        return np.exp(-0.5 * d2 / sig**2) / (2.0 * np.pi * sig**2)

    def support(self, t=0.0):
        mu = self.center(t)
        half = self.n_sigma * self.sigma(t)
        return np.stack([mu - half, mu + half], axis=1)


class TabulatedGrid(SpatioTemporalDensity):
    """Time-invariant density tabulated on a uniform grid, linearly interpolated.

    1-D: ``values`` has shape (n1,) over [lo1, hi1]. 2-D: shape (n1, n2) with
    axis 0 spanning the first coordinate. Interpolation is piecewise linear
    (bilinear in 2-D), which preserves nonnegativity; values are zero outside
    the bounds.
    """

    time_invariant = True
    period = 1.0

    def __init__(self, values, bounds):
        values = np.asarray(values, dtype=float)
        bounds = np.asarray(bounds, dtype=float)
        if values.ndim not in (1, 2):
            raise ValueError("values must be 1-D or 2-D")
        if bounds.shape != (values.ndim, 2):
            raise ValueError(f"bounds must have shape ({values.ndim}, 2)")
        if np.any(bounds[:, 1] <= bounds[:, 0]):
            raise ValueError("each bounds row must be increasing")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("values must be finite and nonnegative")
        if min(values.shape) < 2:
            raise ValueError("need at least 2 grid nodes per axis")
        self.values = values
        self.bounds = bounds
        self.dim = values.ndim

    def grid_axes(self):
        return [
            np.linspace(self.bounds[k, 0], self.bounds[k, 1], self.values.shape[k])
            for k in range(self.dim)
        ]

    def _evaluate(self, t, pts):
        if self.dim == 1:
            x = pts[:, 0]
            lo, hi = self.bounds[0]
            out = np.interp(x, np.linspace(lo, hi, self.values.shape[0]), self.values)
            out[(x < lo) | (x > hi)] = 0.0
            return out
        return self._bilinear(pts)

    def _bilinear(self, pts):
        (lo1, hi1), (lo2, hi2) = self.bounds
        n1, n2 = self.values.shape
        d1 = (hi1 - lo1) / (n1 - 1)
        d2 = (hi2 - lo2) / (n2 - 1)
        x, y = pts[:, 0], pts[:, 1]
        inside = (x >= lo1) & (x <= hi1) & (y >= lo2) & (y <= hi2)
        i = np.clip(((x - lo1) // d1).astype(int), 0, n1 - 2)
        j = np.clip(((y - lo2) // d2).astype(int), 0, n2 - 2)
        fx = np.clip((x - (lo1 + i * d1)) / d1, 0.0, 1.0)
        fy = np.clip((y - (lo2 + j * d2)) / d2, 0.0, 1.0)
        v = (
            self.values[i, j] * (1 - fx) * (1 - fy)
            + self.values[i + 1, j] * fx * (1 - fy)
            + self.values[i, j + 1] * (1 - fx) * fy
            + self.values[i + 1, j + 1] * fx * fy
        )
        return np.where(inside, v, 0.0)

    def support(self, t=0.0):
        return self.bounds.copy()

    def to_file(self, path):
        """Write as plain text: header ``d n1 [n2] lo1 hi1 [lo2 hi2]``, then row-major values."""
        with open(path, "w") as fh:
            shape = " ".join(str(s) for s in self.values.shape)
            bnds = " ".join(f"{float(b):.17g}" for b in self.bounds.ravel())
            fh.write(f"{self.dim} {shape} {bnds}\n")
            np.savetxt(fh, self.values.reshape(1, -1), fmt="%.17g")

    @classmethod
    def from_file(cls, path):
        with open(path) as fh:
            header = fh.readline().split()
            dim = int(header[0])
            shape = tuple(int(s) for s in header[1 : 1 + dim])
            bounds = np.array([float(v) for v in header[1 + dim :]]).reshape(dim, 2)
            flat = np.loadtxt(fh).ravel()
        if flat.size != int(np.prod(shape)):
            raise ValueError(f"expected {int(np.prod(shape))} values, found {flat.size}")
        return cls(flat.reshape(shape), bounds)


def union_support(density, n_samples=513, pad=1e-3):
    """Elementwise min/max of the support box over one period.

    Sampling can miss an extremum between time nodes, so the box is padded by
    ``pad`` times its width per side; the padding carries no mass.
    """
    times = np.linspace(0.0, density.period, n_samples)
    boxes = np.stack([density.support(t) for t in times])
    lo = boxes[:, :, 0].min(axis=0)
    hi = boxes[:, :, 1].max(axis=0)
    margin = pad * (hi - lo)
    return np.stack([lo - margin, hi + margin], axis=1)


_DEFAULT_GRID = {1: (8193,), 2: (241, 241)}


def time_averaged_density(density, time_steps, grid_shape=None, even_panels=True):
    """Average a periodic density over one period onto a tabulated grid.

    Uses the trapezoid rule on ``time_steps`` nodes spanning [0, T]. With
    ``even_panels`` the panel count is bumped to even so the half-period
    instant is always a node; drifting families can have kinks there.
    """
    check_count(time_steps, 2, "time_steps")
    panels = time_steps - 1
    if even_panels and panels % 2 == 1:
        panels += 1
    times = density.period * np.arange(panels + 1) / panels
    coeff = np.full(panels + 1, 1.0 / panels)
    coeff[0] *= 0.5
    coeff[-1] *= 0.5

    bounds = union_support(density, n_samples=panels + 1)
    shape = tuple(grid_shape) if grid_shape is not None else _DEFAULT_GRID[density.dim]
    if len(shape) != density.dim:
        raise ValueError(f"grid_shape must have {density.dim} entries")
    axes = [np.linspace(bounds[k, 0], bounds[k, 1], shape[k]) for k in range(density.dim)]
    if density.dim == 1:
        pts = axes[0].reshape(-1, 1)
    else:
        g1, g2 = np.meshgrid(axes[0], axes[1], indexing="ij")
        pts = np.column_stack([g1.ravel(), g2.ravel()])

    acc = np.zeros(pts.shape[0])
    for t, c in zip(times, coeff):
        acc += c * density._evaluate(density.wrap_time(t), pts)
    return TabulatedGrid(acc.reshape(shape), bounds)
