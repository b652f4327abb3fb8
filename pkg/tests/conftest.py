import numpy as np
import pytest

from uavopt import FixedRatePower, MovingGaussian2D, ShiftedPowerLaw1D, SpatioTemporalDensity, UniformInterval


class TwoSlotUniform(SpatioTemporalDensity):
    """Test density: U[0,1] for the first half period, U[1,2] for the second."""

    dim = 1
    period = 2.0

    def _evaluate(self, t, pts):
        lo = 0.0 if t < 1.0 else 1.0
        x = pts[:, 0]
        return ((x >= lo) & (x <= lo + 1.0)).astype(float)

    def support(self, t=0.0):
        lo = 0.0 if self.wrap_time(t) < 1.0 else 1.0
        return np.array([[lo, lo + 1.0]])


@pytest.fixture
def unit_uniform():
    return UniformInterval(0.0, 1.0)


@pytest.fixture
def drifting_power_law():
    return ShiftedPowerLaw1D()


@pytest.fixture
def orbiting_gaussian():
    return MovingGaussian2D()


@pytest.fixture
def ugv_model():
    # zero-altitude squared-distance cost
    return FixedRatePower(h=0.0, r=2.0)


@pytest.fixture
def uav_model():
    return FixedRatePower(h=10.0, r=3.0)


@pytest.fixture
def two_slot_uniform():
    return TwoSlotUniform()
