import numpy as np
import pytest

from uavopt import (
    MovingGaussian2D,
    ShiftedPowerLaw1D,
    TabulatedGrid,
    UniformInterval,
    alpha_norm,
    time_averaged_density,
    union_support,
)


def test_drifting_power_law_known_values(drifting_power_law):
    d = drifting_power_law
    # sharpest slot: 4 q^3 on [0, 1]
    assert d.evaluate(-1.0, 0.5) == pytest.approx(4 * 0.5**3)
    # uniform slot on [2, 3]
    assert d.evaluate(0.0, 2.5) == pytest.approx(1.0)
    assert d.evaluate(0.0, 1.99) == 0.0
    assert d.evaluate(0.3, -5.0) == 0.0


def test_support_tracks_drift(drifting_power_law):
    assert drifting_power_law.support(0.5).ravel() == pytest.approx([1.0, 2.0])
    assert drifting_power_law.support(0.0).ravel() == pytest.approx([2.0, 3.0])
    assert drifting_power_law.support(-1.0).ravel() == pytest.approx([0.0, 1.0])


@pytest.mark.parametrize("family", ["uniform", "power_law", "gaussian"])
def test_nonnegative_and_periodic(family, unit_uniform, drifting_power_law, orbiting_gaussian):
    density = {"uniform": unit_uniform, "power_law": drifting_power_law,
               "gaussian": orbiting_gaussian}[family]
    rng = np.random.default_rng(1)
    box = union_support(density)
    for _ in range(100):
        t = rng.uniform(-3 * density.period, 3 * density.period)
        q = rng.uniform(box[:, 0] - 0.5, box[:, 1] + 0.5)
        v = density.evaluate(t, q)
        assert v >= 0.0
        assert density.evaluate(t + density.period, q) == pytest.approx(v, abs=1e-12)


def test_dimension_mismatch_rejected(orbiting_gaussian, unit_uniform):
    with pytest.raises(ValueError):
        orbiting_gaussian.evaluate(0.0, 0.5)
    with pytest.raises(ValueError):
        unit_uniform.evaluate(0.0, np.zeros((3, 2)))


def test_time_average_of_constant_density_is_identity(unit_uniform):
    fbar = time_averaged_density(unit_uniform, 11, grid_shape=(257,))
    xs = np.linspace(0.01, 0.99, 23)
    assert np.allclose(fbar.evaluate(0.0, xs), 1.0, atol=1e-12)


def test_time_average_of_two_slot_density(two_slot_uniform):
    fbar = time_averaged_density(two_slot_uniform, 201, grid_shape=(16385,))
    for q in (0.1, 0.55, 0.9, 1.3, 1.9):
        assert fbar.evaluate(0.0, q) == pytest.approx(0.5, abs=1e-12)
    quad_mass = alpha_norm(fbar, 1.0)
    assert quad_mass == pytest.approx(1.0, abs=1e-4)


def test_time_average_normalization(drifting_power_law, orbiting_gaussian):
    fbar1 = time_averaged_density(drifting_power_law, 101)
    assert alpha_norm(fbar1, 1.0) == pytest.approx(1.0, abs=1e-4)
    fbar2 = time_averaged_density(orbiting_gaussian, 65, grid_shape=(161, 161))
    assert alpha_norm(fbar2, 1.0) == pytest.approx(1.0, abs=1e-4)


def test_time_average_third_norm_matches_reported_value(drifting_power_law):
    # the averaged drifting power law has 1/3-norm near 6.08
    fbar = time_averaged_density(drifting_power_law, 2001)
    norm = alpha_norm(fbar, 1.0 / 3.0, resolution=512)
    assert norm == pytest.approx(6.08, rel=0.01)


def test_tabulated_grid_roundtrip(tmp_path):
    values = np.linspace(0.0, 2.0, 501)
    tab = TabulatedGrid(values, [[0.0, 1.0]])
    path = tmp_path / "grid.txt"
    tab.to_file(path)
    back = TabulatedGrid.from_file(path)
    assert back.dim == 1
    assert np.array_equal(back.values, tab.values)
    assert np.array_equal(back.bounds, tab.bounds)

    vals2 = np.abs(np.random.default_rng(0).normal(size=(11, 7)))
    tab2 = TabulatedGrid(vals2, [[0.0, 1.0], [-2.0, 3.0]])
    path2 = tmp_path / "grid2d.txt"
    tab2.to_file(path2)
    back2 = TabulatedGrid.from_file(path2)
    assert back2.values.shape == (11, 7)
    assert np.array_equal(back2.values, vals2)


def test_tabulated_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        TabulatedGrid([-1.0, 0.0, 1.0], [[0.0, 1.0]])
    with pytest.raises(ValueError):
        TabulatedGrid([1.0, 1.0], [[1.0, 0.0]])


def test_bilinear_interpolation_is_exact_for_linear_fields():
    xs = np.linspace(0.0, 1.0, 21)
    ys = np.linspace(0.0, 2.0, 31)
    vals = xs[:, None] + 2.0 * ys[None, :] + 1.0
    tab = TabulatedGrid(vals, [[0.0, 1.0], [0.0, 2.0]])
    rng = np.random.default_rng(3)
    pts = rng.uniform([0, 0], [1, 2], size=(50, 2))
    want = pts[:, 0] + 2.0 * pts[:, 1] + 1.0
    assert np.allclose(tab.evaluate(0.0, pts), want, atol=1e-12)
    assert tab.evaluate(0.0, np.array([1.5, 1.0])) == 0.0


def test_union_support_covers_slot_supports(drifting_power_law, orbiting_gaussian):
    for density in (drifting_power_law, orbiting_gaussian):
        box = union_support(density)
        for t in np.linspace(0, density.period, 37):
            slot = density.support(t)
            assert np.all(slot[:, 0] >= box[:, 0] - 1e-9)
            assert np.all(slot[:, 1] <= box[:, 1] + 1e-9)


def test_gaussian_parameters_follow_the_orbit(orbiting_gaussian):
    g = orbiting_gaussian
    assert g.sigma(0.25) == pytest.approx(5.0)
    assert g.sigma(0.75) == pytest.approx(1.0)
    assert g.center(0.0) == pytest.approx([0.0, 10.0])
    assert g.center(0.25) == pytest.approx([10.0, 0.0], abs=1e-12)
    # peak value of an isotropic gaussian
    assert g.evaluate(0.0, g.center(0.0)) == pytest.approx(1.0 / (2 * np.pi * 9.0))


def test_frozen_slice_is_time_invariant(drifting_power_law):
    snap = drifting_power_law.at_time(0.5)
    assert snap.time_invariant
    xs = np.linspace(1.0, 2.0, 11)
    assert np.allclose(snap.evaluate(0.0, xs), snap.evaluate(7.3, xs))
    assert np.allclose(snap.evaluate(0.0, xs), drifting_power_law.evaluate(0.5, xs))
