"""
Tests of the closed-form figures and the BER statistics.
"""

from math import pi, sqrt

import numpy as np
import pytest

from fsolink.receiver.bounds import awgn_ber, ber_estimate, binomial_ci, debpsk_ber_theory, loop_variance_bounds, pull_in_time, q_function, snr_penalty_at_ber, theory_snr_at_ber


class TestPullIn:

    def test_reference_offset(self):
        assert pull_in_time(2 * pi * 1e8, 1 / sqrt(2), 9.43e6) == pytest.approx(1.333e-3, rel=5e-3)

    def test_quadratic_in_offset(self):
        assert pull_in_time(2.0, 0.7, 1.0) == pytest.approx(4 * pull_in_time(1.0, 0.7, 1.0))

    def test_invalid(self):
        with pytest.raises(ValueError):
            pull_in_time(1.0, 0.0, 1.0)


class TestVarianceBounds:

    def test_forms(self):
        bounds = loop_variance_bounds(5e-4, 10.0)
        assert bounds['crb'] == pytest.approx(5e-5)
        assert bounds['bpsk_as_written'] == pytest.approx(5e-5 * 20 / 21)
        assert bounds['bpsk_penalty'] == pytest.approx(5e-5 * 21 / 20)

    @pytest.mark.parametrize('esn0_db', [-15.0, -5.0, 0.0, 8.0, 20.0])
    def test_ordering(self, esn0_db):
        bounds = loop_variance_bounds(5e-4, 10 ** (esn0_db / 10))
        assert bounds['bpsk_as_written'] < bounds['crb'] < bounds['bpsk_penalty']
        assert bounds['bpsk_as_written'] * bounds['bpsk_penalty'] == pytest.approx(bounds['crb'] ** 2)

    def test_forms_meet_at_high_snr(self):
        bounds = loop_variance_bounds(5e-4, 1e6)
        assert bounds['bpsk_as_written'] == pytest.approx(bounds['bpsk_penalty'], rel=1e-5)

    def test_invalid(self):
        with pytest.raises(ValueError):
            loop_variance_bounds(5e-4, 0.0)


class TestTheory:

    def test_q_function(self):
        assert q_function(0.0) == pytest.approx(0.5)
        assert q_function(3.0) == pytest.approx(1.3499e-3, rel=1e-4)

    def test_debpsk(self):
        assert debpsk_ber_theory(10 ** 0.84) == pytest.approx(2.0e-4, rel=0.05)
        assert debpsk_ber_theory(0.0) == pytest.approx(0.5)

    def test_vectorized(self):
        ber = debpsk_ber_theory(np.array([1.0, 4.0, 10.0]))
        assert ber.shape == (3,)
        assert np.all(np.diff(ber) < 0)

    def test_snr_at_ber(self):
        snr_db = theory_snr_at_ber(1e-4)
        assert debpsk_ber_theory(10 ** (snr_db / 10)) == pytest.approx(1e-4, rel=1e-6)
        assert 8.5 < snr_db < 9.0

    @pytest.mark.parametrize('target', [0.0, 0.5])
    def test_invalid_target(self, target):
        with pytest.raises(ValueError):
            theory_snr_at_ber(target)


class TestBerStatistics:

    def test_interval(self):
        low, high = binomial_ci(10, 1000)
        assert low < 0.01 < high
        assert low == pytest.approx(4.8e-3, rel=0.02)
        assert high == pytest.approx(1.83e-2, rel=0.02)

    def test_no_error(self):
        low, high = binomial_ci(0, 100)
        assert low == 0.0
        assert high == pytest.approx(1 - 0.025 ** (1 / 100))

    def test_no_bit(self):
        assert binomial_ci(0, 0) == (0.0, 1.0)

    def test_invalid_counts(self):
        with pytest.raises(ValueError):
            binomial_ci(5, 4)

    def test_estimate(self):
        estimate = ber_estimate(3, 300)
        assert estimate.estimate == pytest.approx(0.01)
        assert estimate.ci_low < estimate.estimate < estimate.ci_high

    @pytest.mark.parametrize('snr_db', [4.0, 6.0])
    def test_awgn(self, snr_db):
        x = 10 ** (snr_db / 10)
        n_bits = 1 << 20
        estimate = awgn_ber(x, n_bits, seed=5, chunk_size=1 << 18)
        expected = debpsk_ber_theory(x)
        assert abs(estimate.estimate - expected) < 3 * sqrt(expected * (1 - expected) / n_bits)


class TestPenalty:

    def test_theory_curve(self):
        snr_db = np.arange(0.0, 12.5, 0.5)
        assert snr_penalty_at_ber(snr_db, debpsk_ber_theory(10 ** (snr_db / 10))) == pytest.approx(0.0, abs=0.05)

    def test_shifted_curve(self):
        snr_db = np.arange(0.0, 16.0, 0.5)
        ber = debpsk_ber_theory(10 ** ((snr_db - 2.3) / 10))
        assert snr_penalty_at_ber(snr_db, ber) == pytest.approx(2.3, abs=0.05)

    def test_zero_points_are_ignored(self):
        snr_db = np.arange(0.0, 14.0, 1.0)
        ber = debpsk_ber_theory(10 ** (snr_db / 10))
        ber[-1] = 0.0
        assert snr_penalty_at_ber(snr_db, ber) == pytest.approx(0.0, abs=0.1)

    def test_not_crossed(self):
        with pytest.raises(ValueError):
            snr_penalty_at_ber([0.0, 2.0, 4.0], [0.2, 0.1, 0.05])

    def test_too_short(self):
        with pytest.raises(ValueError):
            snr_penalty_at_ber([5.0], [1e-3])
