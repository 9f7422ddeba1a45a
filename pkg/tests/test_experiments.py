"""
Tests of the experiment drivers.
"""

import numpy as np
import pandas as pd
import pytest

from fsolink.lab.experiments import SWEEP_COLUMNS, constant_series, critical_snr, instability_rates, link_figures, phase_error_stats, phase_noise_neutrality, receiver_config, run_channel, run_link, sweep_snr
from fsolink.lkio.channel import ChannelSeries
from fsolink.lkio.config import ExperimentConfig
from fsolink.lkio.status import LockStatus, SampleBudgetError


class TestFigures:

    def test_reference_scenario(self):
        figures = link_figures(ExperimentConfig())
        assert figures['fried_parameter_m'] == pytest.approx(0.039, rel=0.1)
        assert figures['k1'] == pytest.approx(1.333e-3, rel=1e-3)
        assert figures['pull_in_time_s'] == pytest.approx(1.333e-3, rel=0.01)
        assert figures['rejection_bandwidth_hz'] > 0

    def test_no_turbulence(self):
        config = ExperimentConfig()
        config.set('turbulence_scale', '0')
        figures = link_figures(config)
        assert np.isnan(figures['fried_parameter_m'])
        assert figures['rytov_index'] == 0.0

    def test_receiver_settings(self):
        config = ExperimentConfig()
        config.override(['blt=1e-3', 'dump_samples=true'])
        settings = receiver_config(config)
        assert settings.blt == 1e-3
        assert settings.dump_samples > 0

    def test_agc_follows_the_channel(self, fading_series):
        config = ExperimentConfig()
        assert not receiver_config(config).agc
        assert not receiver_config(config, ChannelSeries.constant(100, 5000.0)).agc
        assert receiver_config(config, fading_series).agc

        config.set('agc', 'false')
        assert not receiver_config(config, fading_series).agc


class TestLink:

    def test_constant_series(self, link_config):
        series = constant_series(link_config)
        assert len(series) == 1001
        assert series.mean_db() == 0.0

    def test_locked_run(self, link_config):
        run = run_link(link_config, constant_series(link_config), esn0_db=15.0)
        report = run.report

        assert report.status is LockStatus.LOCKED
        assert report.mean_coupling_db == 0.0
        assert report.scintillation_index == 0.0
        assert set(report.predicted) == {'pull_in_time', 'crb', 'bpsk_as_written', 'bpsk_penalty', 'ber_theory'}
        assert report.phase_error_variance_rad2 == pytest.approx(report.predicted['bpsk_penalty'], rel=0.5)

    @pytest.mark.slow
    def test_fading_run(self, full_rate_config, fading_series):
        run = run_link(full_rate_config, fading_series, esn0_db=8.0, seed=2)
        report = run.report

        assert report.status is LockStatus.LOCKED
        assert report.acquisition_time_s == pytest.approx(1.4e-3, rel=0.2)
        assert report.cycle_slips == 0
        assert report.scintillation_index > 0
        assert report.mean_coupling_db == pytest.approx(fading_series.mean_db())
        assert not (run.traces['agc_out_power'] == run.traces['agc_in_power']).all()
        assert len(run.traces) == 25_000_000 // 4096 + 1

    def test_noiseless_run(self, link_config):
        run = run_link(link_config, constant_series(link_config), esn0_db=float('inf'))
        assert run.report.ber.errors == 0
        assert 'crb' not in run.report.predicted

    def test_sample_budget(self, link_config):
        link_config.set('sample_budget', '1000')
        with pytest.raises(SampleBudgetError):
            run_link(link_config, constant_series(link_config))


class TestAcquisition:

    @pytest.mark.slow
    def test_constant_channel_behind_the_agc(self, full_rate_config):
        report = run_link(full_rate_config, constant_series(full_rate_config), agc=True).report

        assert report.status is LockStatus.LOCKED
        assert report.acquisition_time_s == pytest.approx(1.4e-3, rel=0.2)
        assert report.cycle_slips == 0

    @pytest.mark.slow
    def test_mild_fading(self, full_rate_config):
        k = np.arange(50)
        series = ChannelSeries(5000.0, 1 + 0.1 * np.sin(2 * np.pi * k / 10), 0.2 * np.sin(2 * np.pi * k / 10))
        report = run_link(full_rate_config, series).report

        assert report.status is LockStatus.LOCKED
        assert report.acquisition_time_s == pytest.approx(1.4e-3, rel=0.2)
        assert report.cycle_slips == 0


class TestSweeps:

    def test_needs_two_points(self, link_config):
        with pytest.raises(ValueError):
            sweep_snr(link_config, constant_series(link_config))

    def test_sweep(self, link_config):
        link_config.override(['sweep=10,20', 'seeds=2'])
        table = sweep_snr(link_config, constant_series(link_config), processes=2)

        assert list(table.columns) == SWEEP_COLUMNS
        assert list(table['snr_db']) == [10, 10, 20, 20]
        assert list(table['seed']) == [0, 1, 0, 1]
        assert (table['status'] == 'LOCKED').all()
        assert (table['variance'] < table['crb'] * 2).all()

    def test_critical_snr(self, link_config):
        rates, threshold = critical_snr(link_config, constant_series(link_config), [20.0, 10.0], seeds=1, processes=2)
        assert list(rates['snr_db']) == [10.0, 20.0]
        assert threshold == 10.0

    @pytest.mark.slow
    def test_critical_snr_separates_unstable_points(self, link_config):
        rates, threshold = critical_snr(link_config, constant_series(link_config), [10.0, -20.0], seeds=2, processes=2)
        assert list(rates['snr_db']) == [-20.0, 10.0]
        assert list(rates['unstable_rate']) == [1.0, 0.0]
        assert threshold == 10.0

    def test_neutrality_without_phase(self, link_config):
        link_config.override(['sweep=12,16'])
        table = phase_noise_neutrality(link_config, constant_series(link_config), processes=2)
        assert list(table.columns) == ['snr_db', 'variance_with', 'variance_without', 'relative_difference']
        assert list(table['snr_db']) == [12.0, 16.0]
        assert (table['relative_difference'] == 0).all()

    def test_instability_rates(self):
        table = pd.DataFrame({'snr_db': [0, 0, 5, 5], 'status': ['LOCKED', 'NO_LOCK', 'UNSTABLE', 'UNSTABLE']})
        rates = instability_rates(table)
        assert list(rates['trials']) == [2, 2]
        assert list(rates['unstable_rate']) == [0.5, 1.0]


class TestPhaseErrorStats:

    def test_uniform_error(self):
        nco = np.random.default_rng(0).uniform(-np.pi, np.pi, 1000000)
        assert phase_error_stats(np.zeros_like(nco), nco) == pytest.approx(np.pi ** 2 / 12, rel=0.02)

    def test_exclusion(self):
        nco = np.concatenate([np.full(100, 1.0), np.zeros(100)])
        assert phase_error_stats(np.zeros(200), nco, exclusion=100) == 0.0

    def test_pi_ambiguity(self):
        nco = np.full(10, np.pi)
        assert phase_error_stats(np.zeros(10), nco) == pytest.approx(0.0)

    @pytest.mark.parametrize('exclusion', [-1, 10])
    def test_invalid(self, exclusion):
        with pytest.raises(ValueError):
            phase_error_stats(np.zeros(10), np.zeros(10), exclusion)


@pytest.mark.slow
class TestChannel:

    def test_series(self, small_config):
        run = run_channel(small_config, processes=2)

        assert len(run.series_noao) == len(run.series_ao) == 20
        assert set(run.statistics) == {'noao', 'ao'}
        assert np.isfinite(run.series_ao.mean_db())
        assert run.scintillation_index >= 0
        assert len(run.residuals) == 20

        summary = run.summary()
        assert set(summary['variant']) == {'noao', 'ao', 'pupil', 'theory'}

    def test_without_ao(self, small_config):
        run = run_channel(small_config, ao=False, processes=1)
        assert run.series_ao is None
        assert set(run.statistics) == {'noao'}

    def test_deterministic(self, small_config):
        first = run_channel(small_config, ao=False, processes=1)
        second = run_channel(small_config, ao=False, processes=2)
        np.testing.assert_allclose(first.series_noao.rho, second.series_noao.rho)

    def test_too_short(self, small_config):
        small_config.set('channel_duration', '1e-4')
        with pytest.raises(ValueError):
            run_channel(small_config)
