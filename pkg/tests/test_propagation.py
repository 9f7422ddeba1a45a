"""
Tests of the angular-spectrum propagation and the downlink.
"""

import logging
from math import pi

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsolink.atmosphere.profile import Cn2Profile, Layer, layer_fried_parameter, rytov_index
from fsolink.atmosphere.propagation import ComplexField, aliasing_ratio, angular_spectrum_propagate, check_aliasing, downlink, irradiance_scintillation, propagate_downlink, pupil_mask, scintillation_index_empirical
from fsolink.atmosphere.screens import ScreenBank, make_phase_screen
from fsolink.lab.experiments import scenario_profile
from fsolink.lkio.status import NumericFailure


@pytest.fixture
def random_field():
    rng = np.random.default_rng(0)
    return ComplexField(rng.standard_normal((64, 64)) + 1j * rng.standard_normal((64, 64)), 0.01, 1.55e-6)


def make_bank(config):
    scenario = config.scenario
    return ScreenBank(scenario_profile(config), scenario.grid_n, scenario.grid_pitch, scenario.wavelength, config.elevation_rad, 0.004, scenario.outer_scale, scenario.transverse_velocity, scenario.satellite_altitude, 0)


class TestAngularSpectrum:

    def test_power_is_conserved(self, random_field):
        for distance in [1.0, 100.0, 1e4]:
            propagated = angular_spectrum_propagate(random_field, distance, check=False)
            assert propagated.power() == pytest.approx(random_field.power(), rel=1e-9)

    def test_back_propagation(self, random_field):
        forward = angular_spectrum_propagate(random_field, 500.0, check=False)
        assert_allclose(angular_spectrum_propagate(forward, -500.0, check=False).grid, random_field.grid, atol=1e-10)

    def test_zero_distance(self, random_field):
        assert angular_spectrum_propagate(random_field, 0.0) is random_field

    def test_plane_wave_is_invariant(self):
        wave = ComplexField.plane_wave(32, 0.01, 1.55e-6)
        assert_allclose(angular_spectrum_propagate(wave, 1e3, check=False).grid, wave.grid, atol=1e-12)

    def test_aliasing_ratio(self):
        assert aliasing_ratio(64, 0.01, 1.55e-6, 1e3) == pytest.approx(1.55e-3 / 6.4e-3)

    def test_invalid_grid(self):
        with pytest.raises(ValueError):
            ComplexField(np.ones((48, 48), dtype=complex), 0.01, 1.55e-6)


class TestDownlink:

    def test_turbulence_free_plane_wave(self, small_config):
        small_config.set('turbulence_scale', '0')
        field, phase = downlink(make_bank(small_config), 0.0)
        assert_allclose(field.intensity(), 1.0, atol=1e-9)
        assert not np.any(phase)

    def test_turbulent_field(self, small_config):
        field, phase = downlink(make_bank(small_config), 0.001)
        assert np.isfinite(field.power())
        assert field.power() == pytest.approx(64 * 64 * small_config.scenario.grid_pitch ** 2, rel=1e-6)
        assert np.std(phase) > 0

    def test_same_bank_same_field(self, small_config):
        bank = make_bank(small_config)
        assert_allclose(propagate_downlink(bank, 0.002).grid, propagate_downlink(bank, 0.002).grid)

    def test_aliasing_is_logged_once(self, small_config, caplog):
        small_config.set('grid_pitch', '0.005')
        bank = make_bank(small_config)

        with caplog.at_level(logging.WARNING):
            worst = check_aliasing(bank)
            downlink(bank, 0.0)
            downlink(bank, 0.001)

        assert worst == max(aliasing_ratio(bank.n, bank.pitch, bank.wavelength, distance) for distance in bank.distances)
        assert worst > 1
        assert sum('Aliasing' in record.getMessage() for record in caplog.records) == 1

    def test_sampled_bank_is_silent(self, small_config, caplog):
        small_config.set('grid_pitch', '0.0625')
        bank = make_bank(small_config)
        with caplog.at_level(logging.WARNING):
            assert check_aliasing(bank) < 1
        assert not any('Aliasing' in record.getMessage() for record in caplog.records)


class TestScintillation:

    def test_plane_waves(self):
        fields = [ComplexField.plane_wave(32, 0.04, 1.55e-6) for _ in range(3)]
        assert scintillation_index_empirical(fields, 0.5) == pytest.approx(0.0, abs=1e-12)

    def test_needs_two_fields(self):
        with pytest.raises(ValueError):
            scintillation_index_empirical([ComplexField.plane_wave(32, 0.04, 1.55e-6)], 0.5)

    def test_exponential_irradiance(self):
        irradiance = np.random.default_rng(2).exponential(size=200000)
        assert irradiance_scintillation(irradiance) == pytest.approx(1.0, rel=0.03)

    def test_vanishing_irradiance(self):
        with pytest.raises(NumericFailure):
            irradiance_scintillation(np.zeros(10))

    @pytest.mark.slow
    def test_weak_layer_follows_the_rytov_index(self):
        wavelength, altitude, strength = 1.55e-6, 5000.0, 7e-13
        profile = Cn2Profile([Layer(altitude, 20000.0, strength / 20000.0, 10.0, 0.0, 0.0)], 0.0, 0.0)
        expected = rytov_index(profile, wavelength, pi / 2)
        r0 = layer_fried_parameter(strength, wavelength, pi / 2)

        fields = []
        for seed in range(60):
            screen = make_phase_screen(r0, 5.0, 256, 0.01, seed)
            fields.append(angular_spectrum_propagate(ComplexField(np.exp(1j * screen.grid), 0.01, wavelength), altitude))

        assert expected == pytest.approx(0.1, rel=0.1)
        assert scintillation_index_empirical(fields, 2.0) == pytest.approx(expected, rel=0.3)

    def test_pupil_mask(self):
        mask = pupil_mask(64, 0.03125, 0.5)
        assert mask.sum() == pytest.approx(np.pi / 4 * 16 ** 2, rel=0.1)
