"""
Intradyne Sample Synthesis

One complex sample per symbol:
    s(k) = sqrt(Es(k)) exp(i (2 pi df k T + phi_m(k) + phi(k))) + n(k)
with the coupling efficiency and phase of the channel held over each AO
frame, the signal energy normalized to the series mean and complex white
Gaussian noise of total variance N0.

This file is part of FSOLink.

FSOLink is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

FSOLink is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with FSOLink. If not, see <https://www.gnu.org/licenses/>.
"""

from __future__ import annotations

__author__ = "FSOLink developers"
__license__ = "GPLv3"
__version__ = "1.0"

from dataclasses import dataclass
from logging import debug
from typing import Iterator, Optional

import numpy as np

from fsolink.lkio.channel import ChannelSeries
from fsolink.receiver.detector import differential_encode


@dataclass
class SampleChunk:
    """ Consecutive samples with their ground truth.

    Attributes
    ----------
    start : int
        Index of the first sample in the stream.
    samples : numpy.ndarray
        Complex baseband samples.
    true_phase : numpy.ndarray
        Carrier phase without modulation, 2 pi df k T + phi(k) (rad).
    energy : numpy.ndarray
        Symbol energy Es(k).
    bits : numpy.ndarray
        Transmitted data bits.
    """
    start: int
    samples: np.ndarray
    true_phase: np.ndarray
    energy: np.ndarray
    bits: np.ndarray

    def __len__(self) -> int:
        return len(self.samples)


def noise_density(esn0_db: float) -> float:
    """ N0 for a unit average symbol energy, 0 for a noiseless stream.
    """
    if esn0_db == float('inf'):
        return 0.0
    return 10 ** (-esn0_db / 10)


def frame_of(indices: np.ndarray, frame_rate: float, symbol_rate: float) -> np.ndarray:
    """ AO frame holding each sample, floor(k . frame_rate / symbol_rate).
    """
    return np.floor(indices * frame_rate / symbol_rate).astype(np.int64)


def covered_mean(series: ChannelSeries, n_samples: int, symbol_rate: float) -> float:
    """ Mean coupling efficiency seen by a stream, weighted by the samples of each frame.
    """
    n_frames = int(frame_of(np.array([n_samples - 1]), series.frame_rate, symbol_rate)[0]) + 1
    if n_frames > len(series):
        raise ValueError("Invalid series: {} frames needed, {} available".format(n_frames, len(series)))

    boundaries = np.minimum(np.ceil(np.arange(n_frames + 1) * symbol_rate / series.frame_rate), n_samples)
    counts = np.diff(boundaries)
    return float(np.dot(series.rho[:n_frames], counts) / n_samples)


def synthesize_samples(series: ChannelSeries, delta_f: float, esn0_db: float, symbol_rate: float, n_samples: int, seed: Optional[int] = 0, bits: Optional[np.ndarray] = None, phase_noise: bool = True, chunk_size: int = 1 << 20) -> Iterator[SampleChunk]:
    """ Stream of received samples, in chunks.

    Parameters
    ----------
    series : ChannelSeries
        Coupling efficiency and phase at the AO frame rate.
    delta_f : float
        Carrier frequency offset (Hz).
    esn0_db : float
        Average Es/N0 (dB), inf for a noiseless stream.
    symbol_rate : float
        Symbol rate (Bd).
    n_samples : int
        Stream length.
    seed : int, optional
        Seed of the data bits and of the noise.
    bits : numpy.ndarray, optional
        Data bits, drawn from the seed if not given.
    phase_noise : bool, optional
        Apply the coupling phase.
    chunk_size : int, optional
        Samples per chunk.

    Returns
    -------
    iterator of SampleChunk
        Chunks in stream order.
    """
    if not len(series):
        raise ValueError("Invalid series: empty")
    if symbol_rate <= 0:
        raise ValueError("Invalid symbol rate: must be positive")
    if symbol_rate < series.frame_rate:
        raise ValueError("Invalid symbol rate: below the frame rate")
    if abs(delta_f) >= symbol_rate / 2:
        raise ValueError("Invalid frequency offset: beyond symbol_rate / 2")
    if n_samples < 1 or chunk_size < 1:
        raise ValueError("Invalid stream: sizes must be positive")
    if bits is not None and len(bits) < n_samples:
        raise ValueError("Invalid bits: {} given, {} needed".format(len(bits), n_samples))

    mean_rho = covered_mean(series, n_samples, symbol_rate)
    if mean_rho <= 0:
        raise ValueError("Invalid series: zero mean coupling efficiency")

    sigma = np.sqrt(noise_density(esn0_db) / 2)
    bits_sequence, noise_sequence = np.random.SeedSequence(seed).spawn(2)
    bits_rng, noise_rng = np.random.default_rng(bits_sequence), np.random.default_rng(noise_sequence)

    debug("[SYNTHESIS] {} samples, mean rho {:.4g}, N0 {:.4g}".format(n_samples, mean_rho, sigma ** 2 * 2))

    encoder = 0
    for start in range(0, n_samples, chunk_size):
        indices = np.arange(start, min(start + chunk_size, n_samples), dtype=np.int64)
        frames = frame_of(indices, series.frame_rate, symbol_rate)

        data = bits_rng.integers(0, 2, len(indices), dtype=np.uint8) if bits is None else np.asarray(bits[start:start + len(indices)], dtype=np.uint8)
        symbols, encoder = differential_encode(data, encoder)

        true_phase = 2 * np.pi * np.mod(delta_f * indices / symbol_rate, 1.0)
        if phase_noise:
            true_phase = true_phase + series.phi[frames]

        energy = series.rho[frames] / mean_rho
        samples = np.sqrt(energy) * np.exp(1j * (true_phase + symbols))
        if sigma > 0:
            samples = samples + sigma * (noise_rng.standard_normal(len(indices)) + 1j * noise_rng.standard_normal(len(indices)))

        yield SampleChunk(start, samples, true_phase, energy, data)
