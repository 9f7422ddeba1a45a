"""
Tests of the received sample synthesis.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from fsolink.lkio.channel import ChannelSeries
from fsolink.receiver.detector import differential_encode
from fsolink.receiver.synthesis import covered_mean, frame_of, noise_density, synthesize_samples

SYMBOL_RATE = 1e6


def stream(series, n_samples, **kwargs):
    options = dict(delta_f=0.0, esn0_db=float('inf'), symbol_rate=SYMBOL_RATE, n_samples=n_samples, seed=0)
    options.update(kwargs)
    return list(synthesize_samples(series, **options))


class TestHelpers:

    def test_noise_density(self):
        assert noise_density(0.0) == pytest.approx(1.0)
        assert noise_density(10.0) == pytest.approx(0.1)
        assert noise_density(float('inf')) == 0.0

    def test_frame_of(self):
        assert_array_equal(frame_of(np.array([0, 199, 200, 401]), 5000.0, SYMBOL_RATE), [0, 0, 1, 2])

    def test_covered_mean(self):
        series = ChannelSeries(5000.0, np.array([1.0, 3.0, 5.0]), np.zeros(3))
        assert covered_mean(series, 400, SYMBOL_RATE) == pytest.approx(2.0)
        assert covered_mean(series, 300, SYMBOL_RATE) == pytest.approx((200 + 3 * 100) / 300)

    def test_series_too_short(self):
        series = ChannelSeries(5000.0, np.ones(2), np.zeros(2))
        with pytest.raises(ValueError):
            covered_mean(series, 401, SYMBOL_RATE)


class TestSynthesis:

    def test_noiseless_samples(self, fading_series):
        chunk, = stream(fading_series, 5000, delta_f=1e3)
        symbols, _ = differential_encode(chunk.bits)
        expected = np.sqrt(chunk.energy) * np.exp(1j * (chunk.true_phase + symbols))
        assert_allclose(chunk.samples, expected)

    def test_true_phase(self, fading_series):
        chunk, = stream(fading_series, 1000, delta_f=1e3)
        ramp = 2 * np.pi * np.mod(1e3 * np.arange(1000) / SYMBOL_RATE, 1.0)
        assert_allclose(chunk.true_phase, ramp + fading_series.phi[0])

        chunk, = stream(fading_series, 1000, delta_f=1e3, phase_noise=False)
        assert_allclose(chunk.true_phase, ramp)

    def test_unit_mean_energy(self, fading_series):
        chunks = stream(fading_series, 100000, chunk_size=8192)
        assert np.mean(np.concatenate([chunk.energy for chunk in chunks])) == pytest.approx(1.0)

    def test_noise_density(self, fading_series):
        clean, = stream(fading_series, 200000, seed=4)
        noisy, = stream(fading_series, 200000, seed=4, esn0_db=3.0)
        assert np.var(noisy.samples - clean.samples) == pytest.approx(10 ** -0.3, rel=0.02)

    def test_chunks(self, fading_series):
        chunks = stream(fading_series, 2500, chunk_size=1000)
        assert [chunk.start for chunk in chunks] == [0, 1000, 2000]
        assert [len(chunk) for chunk in chunks] == [1000, 1000, 500]

    def test_determinism(self, fading_series):
        first, = stream(fading_series, 3000, seed=11, esn0_db=5.0)
        second, = stream(fading_series, 3000, seed=11, esn0_db=5.0)
        other, = stream(fading_series, 3000, seed=12, esn0_db=5.0)
        assert_array_equal(first.samples, second.samples)
        assert not np.array_equal(first.bits, other.bits)

    def test_bits_do_not_depend_on_noise(self, fading_series):
        clean, = stream(fading_series, 3000, seed=2)
        noisy, = stream(fading_series, 3000, seed=2, esn0_db=0.0)
        assert_array_equal(clean.bits, noisy.bits)

    def test_given_bits(self, fading_series):
        bits = np.tile(np.array([0, 1], dtype=np.uint8), 500)
        chunk, = stream(fading_series, 1000, bits=bits)
        assert_array_equal(chunk.bits, bits)

    @pytest.mark.parametrize('options', [
        dict(delta_f=SYMBOL_RATE / 2),
        dict(symbol_rate=1000.0),
        dict(n_samples=0),
        dict(bits=np.zeros(10, dtype=np.uint8)),
    ])
    def test_invalid(self, fading_series, options):
        with pytest.raises(ValueError):
            stream(fading_series, 1000, **options)

    def test_zero_coupling(self):
        series = ChannelSeries(5000.0, np.zeros(10), np.zeros(10))
        with pytest.raises(ValueError):
            stream(series, 1000)
