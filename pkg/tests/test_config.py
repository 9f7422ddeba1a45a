"""
Tests of the experiment configuration.
"""

from math import radians, sqrt

import pytest

from fsolink.lkio.config import ExperimentConfig
from fsolink.lkio.status import SampleBudgetError


class TestDefaults:

    def test_turbulence_and_geometry(self):
        config = ExperimentConfig()
        assert config.scenario.c0 == 1e-13
        assert config.scenario.v_rms == 20.0
        assert config.scenario.wavelength == 1.55e-6
        assert config.scenario.aperture == 0.5
        assert config.scenario.grid_n == 512
        assert config.elevation_rad == pytest.approx(radians(20))

    def test_loop_and_link(self):
        config = ExperimentConfig()
        assert config.receiver.xi == pytest.approx(1 / sqrt(2))
        assert config.receiver.blt == 5e-4
        assert config.link.symbol_rate == 1e10
        assert config.link.delta_f == 1e8
        assert config.ao.frame_rate == 5000.0
        assert config.ao.delay_frames == 2

    def test_snr_points_default_to_the_single_value(self):
        config = ExperimentConfig()
        assert config.snr_points == [8.0]


class TestParsing:

    def test_sections_and_comments(self):
        config = ExperimentConfig()
        config.loads("# campaign\n[link]\nesn0_db = 4.5  # dB\nsweep = 0, 5, 10\n\n[receiver]\nagc = off\ndetector = map\n")
        assert config.link.esn0_db == 4.5
        assert config.link.sweep == [0.0, 5.0, 10.0]
        assert config.receiver.agc is False
        assert config.receiver.detector == 'map'

    def test_unknown_key(self):
        config = ExperimentConfig()
        with pytest.raises(ValueError, match="Unknown key"):
            config.loads("[link]\nbaud = 3\n")

    def test_key_in_wrong_section(self):
        config = ExperimentConfig()
        with pytest.raises(ValueError, match="Unknown key"):
            config.loads("[scenario]\nesn0_db = 3\n")

    def test_unknown_section(self):
        config = ExperimentConfig()
        with pytest.raises(ValueError, match="Unknown section"):
            config.loads("[plotting]\n")

    def test_invalid_boolean(self):
        config = ExperimentConfig()
        with pytest.raises(ValueError):
            config.set('agc', 'maybe')

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            ExperimentConfig(str(tmp_path / "missing.txt"))

    def test_file(self, tmp_path):
        filename = tmp_path / "config.txt"
        filename.write_text("[scenario]\nn_layers = 10\nturbulence_scale = 0\n")
        config = ExperimentConfig(str(filename))
        assert config.scenario.n_layers == 10
        assert config.scenario.turbulence_scale == 0.0


class TestOverrides:

    def test_assignments(self):
        config = ExperimentConfig()
        config.override(['seed=4', 'integrator_gain = 0.3'])
        assert config.link.seed == 4
        assert config.ao.integrator_gain == 0.3

    def test_malformed_assignment(self):
        with pytest.raises(ValueError, match="Invalid override"):
            ExperimentConfig().override(['seed'])


class TestRoundTrip:

    def test_dumps_then_loads(self):
        config = ExperimentConfig()
        config.override(['sweep=-2,0,2', 'phase_noise=false', 'output_dir=runs/a'])

        reloaded = ExperimentConfig()
        reloaded.loads(config.dumps())

        assert reloaded == config

    def test_differs_after_change(self):
        config = ExperimentConfig()
        other = ExperimentConfig()
        other.set('esn0_db', '3')
        assert config != other


class TestBudget:

    def test_default_run_fits(self):
        assert ExperimentConfig().check_budget() == 20_000_000

    def test_over_budget(self):
        config = ExperimentConfig()
        config.set('duration', '0.01')
        with pytest.raises(SampleBudgetError):
            config.check_budget()
