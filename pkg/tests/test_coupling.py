"""
Tests of the coherent coupling with the local oscillator.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsolink.atmosphere.propagation import ComplexField, grid_coordinates, pupil_mask
from fsolink.lkio.channel import ChannelSeries
from fsolink.optics.coupling import build_channel_series, complex_coupling, coupling_statistics, default_waist, gaussian_lo, phase_autocorrelation, reference_coupling

N, PITCH, PUPIL = 64, 0.5 / 32, 0.5


@pytest.fixture
def lo():
    return gaussian_lo(N, PITCH, PUPIL)


class TestCoupling:

    def test_default_waist(self):
        assert default_waist(0.5) == pytest.approx(0.5 / 2.2)

    def test_plane_wave_is_the_reference(self, lo):
        series = build_channel_series([ComplexField.plane_wave(N, PITCH, 1.55e-6)] * 3, lo, PUPIL, 5000.0)
        assert_allclose(series.rho, 1.0)
        assert_allclose(series.phi, 0.0, atol=1e-12)

    def test_piston_becomes_the_coupling_phase(self, lo):
        field = ComplexField(np.full((N, N), np.exp(0.8j)), PITCH, 1.55e-6)
        series = build_channel_series([field], lo, PUPIL, 5000.0)
        assert series.rho[0] == pytest.approx(1.0)
        assert series.phi[0] == pytest.approx(0.8)

    def test_tilt_lowers_the_coupling(self, lo):
        x, _ = grid_coordinates(N, PITCH)
        field = ComplexField(np.exp(1j * 20.0 * x), PITCH, 1.55e-6)
        series = build_channel_series([field], lo, PUPIL, 5000.0)
        assert series.rho[0] < 0.9

    def test_geometry_mismatch(self, lo):
        with pytest.raises(ValueError):
            complex_coupling(ComplexField.plane_wave(32, PITCH, 1.55e-6), lo, PUPIL)

    def test_mode_matching_bound(self, lo):
        rng = np.random.default_rng(2)
        mask = pupil_mask(N, PITCH, PUPIL)
        lo_power = np.sum(np.abs(lo.grid[mask]) ** 2) * PITCH ** 2
        for _ in range(20):
            field = ComplexField(rng.standard_normal((N, N)) + 1j * rng.standard_normal((N, N)), PITCH, 1.55e-6)
            rx_power = np.sum(np.abs(field.grid[mask]) ** 2) * PITCH ** 2
            assert abs(complex_coupling(field, lo, PUPIL)) ** 2 <= rx_power * lo_power * (1 + 1e-12)

    def test_matched_field_reaches_the_bound(self, lo):
        mask = pupil_mask(N, PITCH, PUPIL)
        lo_power = np.sum(np.abs(lo.grid[mask]) ** 2) * PITCH ** 2
        field = ComplexField(2.0 * np.exp(0.3j) * lo.grid, PITCH, lo.wavelength_m)
        assert abs(complex_coupling(field, lo, PUPIL)) ** 2 == pytest.approx(4.0 * lo_power ** 2)

    def test_reference_is_real(self, lo):
        reference = reference_coupling(lo, PUPIL)
        assert reference.real > 0
        assert reference.imag == pytest.approx(0.0, abs=1e-12)


class TestStatistics:

    def test_constant_channel(self):
        statistics = coupling_statistics(ChannelSeries.constant(100, 5000.0))
        assert statistics.summary['mean_db'] == pytest.approx(0.0)
        assert statistics.summary['scintillation'] == pytest.approx(0.0)
        cdf = dict(zip(statistics.cdf['threshold_db'], statistics.cdf['probability']))
        assert cdf[0.0] == 1.0 and cdf[-1.0] == 0.0

    def test_fading_channel(self, fading_series):
        statistics = coupling_statistics(fading_series)
        assert statistics.summary['scintillation'] > 0
        assert 0 < statistics.summary['phase_correlation_time_s'] < fading_series.duration
        table = statistics.to_frame()
        assert list(table.columns) == ['quantity', 'value']
        assert 'cdf_-10dB' in set(table['quantity'])

    def test_constant_phase_correlation(self):
        assert phase_autocorrelation(ChannelSeries.constant(10, 5000.0)) == 0.0

    def test_empty(self):
        with pytest.raises(ValueError):
            coupling_statistics(ChannelSeries(5000.0, [], []))
