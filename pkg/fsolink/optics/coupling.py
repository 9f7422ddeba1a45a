"""
Coherent Coupling Module

Overlap integral between the received field and the Gaussian local
oscillator mode in the aperture plane, and statistics of the resulting
channel series.

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
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from fsolink.atmosphere.propagation import ComplexField, grid_coordinates, pupil_mask
from fsolink.lkio.channel import ChannelSeries
from fsolink.lkio.status import NumericFailure

# Waist of the local oscillator mode relative to the aperture
WAIST_RATIO = 2.2

# Fade thresholds of the CDF table (dB)
CDF_THRESHOLDS_DB = np.arange(-30.0, 6.0, 1.0)


def default_waist(pupil_d: float) -> float:
    """ Waist maximizing the coupling of a plane wave, w0 = D / 2.2.
    """
    return pupil_d / WAIST_RATIO


def gaussian_lo(n: int, pitch: float, pupil_d: float, w0: Optional[float] = None, wavelength: float = 1.55e-6) -> ComplexField:
    """ Gaussian local oscillator mode exp(-r^2 / w0^2).

    Parameters
    ----------
    n : int
        Grid size.
    pitch : float
        Pixel pitch (m).
    pupil_d : float
        Aperture diameter (m).
    w0 : float, optional
        Waist (m), D / 2.2 by default.
    wavelength : float, optional
        Wavelength (m).

    Returns
    -------
    ComplexField
        Local oscillator field (real, positive).
    """
    w0 = default_waist(pupil_d) if w0 is None else w0
    if w0 <= 0:
        raise ValueError("Invalid waist: must be positive")

    x, y = grid_coordinates(n, pitch)
    return ComplexField(np.exp(-(x ** 2 + y ** 2) / w0 ** 2).astype(complex), pitch, wavelength)


def complex_coupling(e_rx: ComplexField, e_lo: ComplexField, pupil_d: float) -> complex:
    """ Overlap integral over the pupil, C = sum(conj(E_LO) . E_RX) . pitch^2.

    Parameters
    ----------
    e_rx : ComplexField
        Received field.
    e_lo : ComplexField
        Local oscillator field.
    pupil_d : float
        Aperture diameter (m).

    Returns
    -------
    complex
        Coupling coefficient.
    """
    if not e_rx.same_geometry(e_lo):
        raise ValueError("Invalid fields: grid mismatch")

    mask = pupil_mask(e_rx.n, e_rx.pitch_m, pupil_d)
    return complex(np.sum(np.conj(e_lo.grid[mask]) * e_rx.grid[mask]) * e_rx.pitch_m ** 2)


def reference_coupling(lo: ComplexField, pupil_d: float) -> complex:
    """ Coupling of the unaberrated unit plane wave.

    Raises
    ------
    NumericFailure
        Vanishing reference.
    """
    reference = complex_coupling(ComplexField.plane_wave(lo.n, lo.pitch_m, lo.wavelength_m), lo, pupil_d)
    if abs(reference) == 0:
        raise NumericFailure("vanishing reference coupling")
    return reference


def build_channel_series(fields: Sequence[ComplexField], lo: ComplexField, pupil_d: float, frame_rate: float) -> ChannelSeries:
    """ Channel series of pupil fields sampled at the AO frame rate.

    Parameters
    ----------
    fields : sequence of ComplexField
        Residual fields (scintillation and corrected phase).
    lo : ComplexField
        Local oscillator field.
    pupil_d : float
        Aperture diameter (m).
    frame_rate : float
        Frame rate (Hz).

    Returns
    -------
    ChannelSeries
        rho_rel = |C|^2 / |C_ref|^2 and phi = arg(C).
    """
    reference = reference_coupling(lo, pupil_d)
    couplings = np.array([complex_coupling(field, lo, pupil_d) for field in fields])
    return series_from_couplings(couplings, reference, frame_rate)


def series_from_couplings(couplings: np.ndarray, reference: complex, frame_rate: float) -> ChannelSeries:
    """ Channel series of raw coupling coefficients.
    """
    if abs(reference) == 0:
        raise NumericFailure("vanishing reference coupling")
    normalized = np.asarray(couplings) / reference
    return ChannelSeries(frame_rate, np.abs(normalized) ** 2, np.angle(normalized))


def phase_autocorrelation(series: ChannelSeries, threshold: float = 0.5) -> float:
    """ Lag at which the normalized autocorrelation of the unwrapped phase drops below a threshold.

    Parameters
    ----------
    series : ChannelSeries
        Channel series.
    threshold : float, optional
        Correlation threshold.

    Returns
    -------
    float
        Lag (s), infinite if the correlation never drops below the threshold.
    """
    phase = series.unwrapped_phase()
    phase = phase - phase.mean()
    if len(phase) < 2 or not np.any(phase):
        return 0.0

    size = 1 << (2 * len(phase) - 1).bit_length()
    spectrum = np.fft.rfft(phase, size)
    correlation = np.fft.irfft(np.abs(spectrum) ** 2, size)[:len(phase)]
    correlation /= correlation[0]

    below = np.nonzero(correlation < threshold)[0]
    return float(below[0] / series.frame_rate) if len(below) else float('inf')


@dataclass
class CouplingStatistics:
    """ Statistics of a channel series.

    Attributes
    ----------
    summary : dict of str: float
        mean_linear, mean_db, variance, scintillation, phase_std_rad,
        phase_correlation_time_s.
    cdf : pandas.DataFrame
        Columns threshold_db, probability (P[rho_db <= threshold]).
    pdf : pandas.DataFrame
        Columns rho_db, density (histogram of rho in dB).
    """
    summary: dict[str, float]
    cdf: pd.DataFrame
    pdf: pd.DataFrame

    def to_frame(self) -> pd.DataFrame:
        """ Single table with the summary and the CDF.
        """
        rows = [{'quantity': key, 'value': value} for key, value in self.summary.items()]
        rows += [{'quantity': 'cdf_{:+.0f}dB'.format(threshold), 'value': probability} for threshold, probability in zip(self.cdf['threshold_db'], self.cdf['probability'])]
        return pd.DataFrame(rows, columns=['quantity', 'value'])


def coupling_statistics(series: ChannelSeries, bins: int = 50) -> CouplingStatistics:
    """ Mean penalty, fluctuations and fade statistics of a channel series.

    Parameters
    ----------
    series : ChannelSeries
        Channel series.
    bins : int, optional
        Number of histogram bins.

    Returns
    -------
    CouplingStatistics
        Statistics.
    """
    if not len(series):
        raise ValueError("Invalid series: empty")

    rho, rho_db = series.rho, series.rho_db()
    mean = float(rho.mean())
    summary = {
        'mean_linear': mean,
        'mean_db': series.mean_db(),
        'variance': float(rho.var()),
        'scintillation': float(rho.var() / mean ** 2) if mean > 0 else float('nan'),
        'phase_std_rad': float(series.unwrapped_phase().std()),
        'phase_correlation_time_s': phase_autocorrelation(series),
    }

    cdf = pd.DataFrame({'threshold_db': CDF_THRESHOLDS_DB, 'probability': [float(np.mean(rho_db <= threshold)) for threshold in CDF_THRESHOLDS_DB]})

    density, edges = np.histogram(rho_db, bins=bins, density=True)
    pdf = pd.DataFrame({'rho_db': 0.5 * (edges[1:] + edges[:-1]), 'density': density})

    return CouplingStatistics(summary, cdf, pdf)
