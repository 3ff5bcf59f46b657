"""
Tests for array responses, path gains and Rician channels
"""

import numpy as np
import pytest

from src.core.errors import DegeneratePositionError
from src.core.models import PlacementKind
from src.physics.channel import (
    approx_distance,
    array_response,
    array_responses,
    los_channel,
    path_gain,
    rician_channel,
    rician_mix,
    wavelength,
)
from src.physics.geometry import placement

LAMBDA = 0.03


class TestArrayResponse:
    """Spherical-wave responses"""

    def test_unit_magnitude(self, rng):
        elements = rng.uniform(-4, 4, (32, 3))
        a = array_response(elements, np.array([300.0, -20.0, 50.0]), LAMBDA)
        assert a.shape == (32,)
        np.testing.assert_allclose(np.abs(a), 1.0)

    def test_whole_wavelength_distance(self):
        """‖t − r‖ = 99 m = 3300λ gives phase 0"""
        a = array_response(np.array([[2.0, 0.0, 0.0]]), np.array([101.0, 0.0, 0.0]), LAMBDA)
        assert a[0] == pytest.approx(1.0 + 0.0j, abs=1e-9)

    def test_single_wavelength(self):
        a = array_response(np.zeros((1, 3)), np.array([0.0, LAMBDA, 0.0]), LAMBDA)
        assert a[0] == pytest.approx(1.0 + 0.0j, abs=1e-12)

    def test_coincident_position_rejected(self):
        with pytest.raises(DegeneratePositionError):
            array_response(np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0]]), np.array([2.0, 0.0, 0.0]), LAMBDA)

    def test_batched_matches_single(self, rng):
        elements = rng.uniform(-2, 2, (8, 3))
        points = rng.uniform(100, 500, (3, 3))
        batch = array_responses(elements, points, LAMBDA)
        for p in range(3):
            np.testing.assert_allclose(batch[:, p], array_response(elements, points[p], LAMBDA))


class TestPathGain:
    """Free-space gain λ/(4π‖r‖)"""

    def test_hundred_meters(self):
        assert path_gain(np.array([100.0, 0.0, 0.0]), LAMBDA) == pytest.approx(2.3873e-5, rel=1e-4)

    def test_kilometer(self):
        assert path_gain(np.array([0.0, 0.0, -1000.0]), LAMBDA) == pytest.approx(2.3873e-6, rel=1e-4)

    def test_inverse_distance_law(self):
        r = np.array([30.0, 40.0, 0.0])
        assert path_gain(2 * r, LAMBDA) == pytest.approx(path_gain(r, LAMBDA) / 2)

    def test_zero_distance(self):
        with pytest.raises(DegeneratePositionError):
            path_gain(np.zeros(3), LAMBDA)

    def test_wavelength_at_ten_gigahertz(self):
        assert wavelength(10e9) == pytest.approx(0.0299792458)


class TestLosChannel:
    def test_norm(self):
        """‖h‖ = α√MN for the default 8 x 8 hybrid array at 100 m"""
        elements = placement(PlacementKind.HYBRID, 8, 8, 4.0, 0.5).elements()
        h = los_channel(elements, np.array([100.0, 0.0, 0.0]), LAMBDA)
        assert np.linalg.norm(h) == pytest.approx(1.9098e-4, rel=1e-4)


class TestRician:
    """LoS plus scaled NLoS mixing"""

    def test_infinite_factor_is_los(self, rng):
        los = np.exp(1j * rng.uniform(0, 2 * np.pi, 16)) * 1e-5
        np.testing.assert_array_equal(rician_channel(los, float("inf"), rng), los)

    def test_negative_factor(self, rng):
        with pytest.raises(ValueError):
            rician_channel(np.ones(4, dtype=complex), -1.0, rng)

    def test_mixing_weights(self):
        """κ = 1 weighs LoS and NLoS by 1/√2; NLoS scaled by |α|"""
        alpha = 2e-5
        los = alpha * np.ones((4, 1), dtype=complex)
        nlos = np.full((4, 1), 1j)
        mixed = rician_mix(los, nlos, 1.0)
        np.testing.assert_allclose(mixed, (alpha + 1j * alpha) / np.sqrt(2.0) * np.ones((4, 1)))

    @pytest.mark.parametrize("kappa", [0.0, 1.0, 10.0])
    def test_average_power(self, rng, kappa):
        """E‖h‖² stays |α|²MN for every κ"""
        alpha = 3e-5
        phases = np.exp(1j * rng.uniform(0, 2 * np.pi, (64, 1)))
        los = alpha * np.repeat(phases, 4000, axis=1)
        channels = rician_channel(los, kappa, rng)
        mean_power = np.mean(np.sum(np.abs(channels) ** 2, axis=0))
        assert mean_power == pytest.approx(alpha**2 * 64, rel=0.03)

    def test_rician_factor_five_power_ratio(self, rng):
        """Empirical LoS/NLoS power ratio of κ = 5 draws stays within 5% of κ"""
        kappa = 5.0
        alpha = 2.3873e-5
        los = alpha * np.exp(1j * rng.uniform(0, 2 * np.pi, (64, 2000)))
        mixed = rician_channel(los, kappa, rng)
        los_part = np.sqrt(kappa / (1 + kappa)) * los
        ratio = np.sum(np.abs(los_part) ** 2) / np.sum(np.abs(mixed - los_part) ** 2)
        assert 4.75 <= ratio <= 5.25


class TestApproxDistance:
    def test_far_field_accuracy(self):
        """Second-order expansion is accurate to well under a wavelength at 700 m"""
        t = np.array([1.0, 2.0, 2.0])
        r = np.array([600.0, 300.0, -200.0])
        assert approx_distance(t, r) == pytest.approx(np.linalg.norm(t - r), abs=1e-4)

    def test_origin_rejected(self):
        with pytest.raises(DegeneratePositionError):
            approx_distance(np.ones(3), np.zeros(3))

    def test_zero_offset(self):
        r = np.array([120.0, -50.0, 30.0])
        assert approx_distance(np.zeros(3), r) == pytest.approx(np.linalg.norm(r), abs=1e-12)

    @pytest.mark.parametrize("scale", [2.0, -3.5])
    def test_offset_along_direction_is_exact(self, scale):
        r = np.array([180.0, 240.0, 0.0])
        t = scale * r / np.linalg.norm(r)
        assert approx_distance(t, r) == pytest.approx(np.linalg.norm(t - r), abs=1e-9)

    def test_orthogonal_offset_error(self):
        """‖r‖ = 200 m, ‖t‖ = 4 m orthogonal to r: error below λ/16"""
        r = np.array([0.0, 0.0, 200.0])
        t = np.array([4.0, 0.0, 0.0])
        assert abs(approx_distance(t, r) - np.linalg.norm(t - r)) < LAMBDA / 16
