"""
Tests of the receiver chain: lock detection, cycle slips and whole runs.
"""

from dataclasses import replace
from math import pi

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from fsolink.lkio.channel import ChannelSeries
from fsolink.lkio.status import LockStatus, NumericFailure
from fsolink.receiver.bounds import loop_variance_bounds, pull_in_time
from fsolink.receiver.receiver import BLOCK, LockDetector, Receiver, ReceiverConfig, SlipCounter, count_cycle_slips, wrap_half_turn
from fsolink.receiver.synthesis import SampleChunk, synthesize_samples

SYMBOL_RATE = 1e6

# Constant channel long enough for a 1 s stream
CONSTANT = ChannelSeries.constant(5000, 5000.0)


def stream(delta_f, esn0_db, n_samples, seed=0, chunk_size=16 * BLOCK):
    return synthesize_samples(CONSTANT, delta_f, esn0_db, SYMBOL_RATE, n_samples, seed, chunk_size=chunk_size)


class TestLockDetector:

    def test_acquisition_index(self):
        detector = LockDetector(SYMBOL_RATE, 100.0, window=100, tolerance=5.0, hold=1e-4)
        f_lp = detector.process(np.full(1000, 2 * pi * 100.0 / SYMBOL_RATE))
        assert detector.acquired_at == 298
        assert f_lp[-1] == pytest.approx(100.0, abs=1e-3)

    def test_chunks(self):
        increments = np.full(1000, 2 * pi * 100.0 / SYMBOL_RATE)
        detector = LockDetector(SYMBOL_RATE, 100.0, window=100, tolerance=5.0, hold=1e-4)
        for first in range(0, 1000, 70):
            detector.process(increments[first:first + 70])
        assert detector.acquired_at == 298

    def test_hold_not_reached(self):
        detector = LockDetector(SYMBOL_RATE, 100.0, window=100, tolerance=5.0, hold=1e-3)
        detector.process(np.full(1000, 2 * pi * 100.0 / SYMBOL_RATE))
        assert detector.acquired_at is None

    def test_leaving_tolerance_resets_the_hold(self):
        detector = LockDetector(SYMBOL_RATE, 0.0, window=1, tolerance=5.0, hold=1e-4)
        increments = np.zeros(300)
        increments[150] = 2 * pi * 1e3 / SYMBOL_RATE
        detector.process(increments)
        assert detector.acquired_at == 0

        detector = LockDetector(SYMBOL_RATE, 0.0, window=1, tolerance=5.0, hold=1e-4)
        detector.process(np.roll(increments, -100))
        assert detector.acquired_at == 51


class TestCycleSlips:

    def test_wrap(self):
        assert wrap_half_turn(np.array([0.0, pi, 2.0])) == pytest.approx([0.0, 0.0, 2.0 - pi])

    def test_half_turn_is_a_slip(self):
        error = np.concatenate([np.zeros(10000), np.linspace(0.0, pi, 20000), np.full(20000, pi)])
        assert count_cycle_slips(error) == 1
        assert count_cycle_slips(error, start=40000) == 0

    def test_two_slips(self):
        error = np.concatenate([np.zeros(5000), np.linspace(0.0, -2 * pi, 20000), np.full(20000, -2 * pi)])
        assert count_cycle_slips(error) == 2

    def test_jitter_is_not_a_slip(self):
        error = 0.1 * np.random.default_rng(0).standard_normal(100000)
        assert count_cycle_slips(error) == 0

    def test_chunks(self):
        error = wrap_half_turn(np.linspace(0.0, 3 * pi, 60000))
        counter = SlipCounter()
        for first in range(0, 60000, 7000):
            counter.process(error[first:first + 7000])
        assert len(counter.slips) == count_cycle_slips(error) == 3


class TestReceiverConfig:

    def test_defaults(self):
        gains = ReceiverConfig().gains()
        assert gains.k1 == pytest.approx(1.333e-3, rel=1e-3)

    @pytest.mark.parametrize('options', [
        dict(detector='squarer'),
        dict(chunk_size=5000),
        dict(lock_window=0.5),
        dict(lock_tolerance=0.0),
    ])
    def test_invalid(self, options):
        with pytest.raises(ValueError):
            ReceiverConfig(**options)

    def test_detectors_are_listed(self):
        with pytest.raises(ValueError, match="expected one of product, map"):
            ReceiverConfig(detector='squarer')

    def test_agc_is_bypassed_by_default(self):
        assert ReceiverConfig().agc is False


class TestReceiver:

    @pytest.mark.slow
    def test_locked_run(self, fast_receiver):
        run = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(stream(0.0, 20.0, 400000), 20.0, 0)
        report = run.report

        assert report.status is LockStatus.LOCKED
        assert report.acquisition_time_s == pytest.approx(0.0)
        assert report.cycle_slips == 0
        assert report.ber.errors == 0
        assert report.ber.bits == 400000 - BLOCK

        bound = loop_variance_bounds(fast_receiver.blt, 100.0)['bpsk_penalty']
        assert report.phase_error_variance_rad2 == pytest.approx(bound, rel=0.3)

    @pytest.mark.slow
    def test_frequency_pull_in(self, fast_receiver):
        delta_f = 2e-3 * SYMBOL_RATE / (2 * pi)
        run = Receiver(fast_receiver, SYMBOL_RATE, delta_f).run(stream(delta_f, 20.0, 500000), 20.0, 0)

        assert run.report.locked
        assert 0.0 < run.report.acquisition_time_s < 0.3
        assert run.traces['f_est_hz'].iloc[-1] == pytest.approx(delta_f, abs=fast_receiver.lock_tolerance)

    def test_no_lock(self, fast_receiver):
        delta_f = 2e-3 * SYMBOL_RATE / (2 * pi)
        run = Receiver(fast_receiver, SYMBOL_RATE, 5e3).run(stream(delta_f, 20.0, 100000), 20.0, 0)

        assert run.report.status is LockStatus.NO_LOCK
        assert not run.report.locked
        assert run.report.phase_error_variance_rad2 is None

    def test_traces(self, fast_receiver):
        run = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(stream(0.0, 10.0, 10 * BLOCK))

        assert list(run.traces.columns) == ['t_s', 'f_est_hz', 'phase_error_rad', 'agc_in_power', 'agc_out_power']
        assert len(run.traces) == 10
        assert_array_equal(run.traces['agc_out_power'], run.traces['agc_in_power'])
        assert run.samples is None

    def test_agc_keeps_the_signal_power(self, fast_receiver):
        run = Receiver(replace(fast_receiver, agc=True), SYMBOL_RATE, 0.0).run(stream(0.0, 10.0, 10 * BLOCK), 10.0)
        assert run.traces['agc_out_power'].iloc[-1] == pytest.approx(1.1, rel=0.05)

    def test_sample_dump(self, fast_receiver):
        config = replace(fast_receiver, dump_samples=1000)
        run = Receiver(config, SYMBOL_RATE, 0.0).run(stream(0.0, 10.0, 5000))

        assert len(run.samples) == 1000
        assert list(run.samples.columns) == ['k', 're', 'im', 'nco_phase', 'f_est', 'true_phase']

    def test_deterministic(self, fast_receiver):
        first = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(stream(0.0, 5.0, 50000, seed=3), 5.0, 3)
        second = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(stream(0.0, 5.0, 50000, seed=3), 5.0, 3)
        assert first.report == second.report

    def test_empty_stream(self, fast_receiver):
        with pytest.raises(ValueError):
            Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(iter([]))

    def test_non_finite_samples(self, fast_receiver):
        samples = np.full(BLOCK, np.nan + 0j)
        chunk = SampleChunk(0, samples, np.zeros(BLOCK), np.ones(BLOCK), np.zeros(BLOCK, dtype=np.uint8))
        with pytest.raises(NumericFailure):
            Receiver(fast_receiver, SYMBOL_RATE, 0.0).run([chunk])


class TestLoopStatistics:

    @pytest.mark.slow
    def test_acquisition_follows_the_pull_in_time(self, fast_receiver):
        delta_f = 2e3
        settings = replace(fast_receiver, lock_window=400, lock_tolerance=20.0, lock_hold=0.04)
        receiver = Receiver(settings, SYMBOL_RATE, delta_f)
        report = receiver.run(stream(delta_f, float('inf'), 800000), float('inf')).report

        expected = pull_in_time(2 * pi * delta_f, receiver.gains.xi, receiver.gains.wnt * SYMBOL_RATE)
        assert expected == pytest.approx(0.533, rel=0.01)
        assert report.status is LockStatus.LOCKED
        assert report.acquisition_time_s == pytest.approx(expected, rel=0.2)

    @pytest.mark.slow
    @pytest.mark.parametrize('esn0_db', [10.0, 15.0])
    def test_linear_regime_variance(self, fast_receiver, esn0_db):
        series = ChannelSeries.constant(50000, 5000.0)
        samples = synthesize_samples(series, 0.0, esn0_db, SYMBOL_RATE, 8_000_000, 1, chunk_size=16 * BLOCK)
        report = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(samples, esn0_db, 1).report

        bound = loop_variance_bounds(fast_receiver.blt, 10 ** (esn0_db / 10))['bpsk_penalty']
        assert report.status is LockStatus.LOCKED
        assert report.phase_error_variance_rad2 == pytest.approx(bound, rel=0.05)

    @pytest.mark.slow
    @pytest.mark.parametrize('esn0_db', [0.0, 5.0, 10.0, 15.0])
    def test_variance_over_snr(self, fast_receiver, esn0_db):
        samples = synthesize_samples(ChannelSeries.constant(12000, 5000.0), 0.0, esn0_db, SYMBOL_RATE, 2_000_000, 2, chunk_size=16 * BLOCK)
        report = Receiver(fast_receiver, SYMBOL_RATE, 0.0).run(samples, esn0_db, 2).report

        bound = loop_variance_bounds(fast_receiver.blt, 10 ** (esn0_db / 10))['bpsk_penalty']
        assert report.phase_error_variance_rad2 == pytest.approx(bound, rel=0.10)
