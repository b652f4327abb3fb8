"""Input validation helpers shared by the estimators and solvers."""

import numbers

import numpy as np


def as_points(q, dim):
    """Coerce ``q`` to an (m, dim) float array.

    Returns ``(points, was_single)`` where ``was_single`` records whether the
    input described one point (so callers can unwrap scalar results).
    """
    arr = np.asarray(q, dtype=float)
    if arr.ndim == 0:
        if dim != 1:
            raise ValueError(f"scalar point given for dimension {dim}")
        return arr.reshape(1, 1), True
    if arr.ndim == 1:
        if dim == 1:
            return arr.reshape(-1, 1), False
        if arr.shape[0] == dim:
            return arr.reshape(1, dim), True
        raise ValueError(f"point of length {arr.shape[0]} does not match dimension {dim}")
    if arr.ndim == 2 and arr.shape[1] == dim:
        return arr, False
    raise ValueError(f"expected points of dimension {dim}, got shape {arr.shape}")


def check_points(points, dim=None, name="points"):
    """Validate a deployment array: finite, shape (n, d) with n >= 1."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] < 1:
        raise ValueError(f"{name} must be a nonempty (n, d) array, got shape {arr.shape}")
    if dim is not None and arr.shape[1] != dim:
        raise ValueError(f"{name} has dimension {arr.shape[1]}, expected {dim}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite coordinates")
    return arr


def check_density(density, dim=None, time_invariant=False, name="density"):
    """Validate a density object against the expected dimension and kind."""
    for attr in ("dim", "period", "evaluate", "support"):
        if not hasattr(density, attr):
            raise ValueError(f"{name} does not look like a density (missing {attr!r})")
    if dim is not None and density.dim != dim:
        raise ValueError(f"{name} has dimension {density.dim}, expected {dim}")
    if time_invariant and not density.time_invariant:
        raise ValueError(f"{name} must be time-invariant; freeze it with at_time() first")
    return density


def check_count(value, minimum, name):
    if not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_positive(value, name, allow_zero=False):
    v = float(value)
    if not np.isfinite(v) or v < 0 or (v == 0 and not allow_zero):
        bound = ">= 0" if allow_zero else "> 0"
        raise ValueError(f"{name} must be finite and {bound}, got {value!r}")
    return v


def rng_from(seed):
    """Accept None, an int seed, or a Generator; return a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)
