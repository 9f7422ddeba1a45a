"""
Propagation Module

Angular-spectrum Fresnel propagation and split-step downlink through the
frozen-flow screen bank.

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
from logging import warning
from typing import Sequence

import numpy as np

from fsolink.atmosphere.screens import ScreenBank, is_power_of_two
from fsolink.lkio.status import NumericFailure


def grid_coordinates(n: int, pitch: float) -> tuple[np.ndarray, np.ndarray]:
    """ Pixel coordinates x = (i - n/2) * pitch, so that the center pixel lies on the axis.
    """
    coordinates = (np.arange(n) - n // 2) * pitch
    return np.meshgrid(coordinates, coordinates)


def pupil_mask(n: int, pitch: float, diameter: float) -> np.ndarray:
    """ Boolean mask of the circular pupil, transmittance 1 if 2|r| <= D.
    """
    x, y = grid_coordinates(n, pitch)
    return 2 * np.hypot(x, y) <= diameter


@dataclass
class ComplexField:
    """ Sampled complex optical field.

    Attributes
    ----------
    grid : numpy.ndarray
        n x n complex amplitudes.
    pitch_m : float
        Pixel pitch (m).
    wavelength_m : float
        Wavelength (m).
    """
    grid: np.ndarray
    pitch_m: float
    wavelength_m: float

    def __post_init__(self) -> None:
        if self.grid.ndim != 2 or self.grid.shape[0] != self.grid.shape[1] or not is_power_of_two(self.grid.shape[0]):
            raise ValueError("Invalid field: grid must be square with a power of two size")
        if self.pitch_m <= 0 or self.wavelength_m <= 0:
            raise ValueError("Invalid field: pitch and wavelength must be positive")

    @classmethod
    def plane_wave(cls, n: int, pitch: float, wavelength: float) -> ComplexField:
        """ Unit-amplitude plane wave.
        """
        return cls(np.ones((n, n), dtype=complex), pitch, wavelength)

    @property
    def n(self) -> int:
        return self.grid.shape[0]

    def intensity(self) -> np.ndarray:
        return np.abs(self.grid) ** 2

    def power(self) -> float:
        """ Total grid power.
        """
        return float(np.sum(self.intensity()) * self.pitch_m ** 2)

    def same_geometry(self, other: ComplexField) -> bool:
        return self.grid.shape == other.grid.shape and self.pitch_m == other.pitch_m and self.wavelength_m == other.wavelength_m


def aliasing_ratio(n: int, pitch: float, wavelength: float, distance: float) -> float:
    """ Sampling criterion lambda * z / (n * pitch^2) of the transfer function.
    """
    return wavelength * abs(distance) / (n * pitch ** 2)


def check_aliasing(bank: ScreenBank) -> float:
    """ Worst aliasing ratio over the propagation steps of a screen bank.

    Note
    ----
    Logged once, by the caller of a whole channel run.
    """
    worst = max((aliasing_ratio(bank.n, bank.pitch, bank.wavelength, distance) for distance in bank.distances), default=0.0)
    if worst > 1:
        warning("[PROPAGATION] Aliasing: lambda.z/(n.pitch^2) = {:.2f} > 1, grid_n.grid_pitch^2 must reach {:.3g} m^2".format(worst, worst * bank.n * bank.pitch ** 2))
    return worst


def angular_spectrum_propagate(field: ComplexField, distance_m: float, check: bool = True) -> ComplexField:
    """ Fresnel propagation with the transfer function method.

    Note
    ----
    The transfer function has unit modulus, so the total power is
    conserved. A negative distance back-propagates.

    Parameters
    ----------
    field : ComplexField
        Input field.
    distance_m : float
        Propagation distance (m).
    check : bool, optional
        Warn on aliasing.

    Returns
    -------
    ComplexField
        Propagated field.
    """
    if distance_m == 0:
        return field

    if check:
        ratio = aliasing_ratio(field.n, field.pitch_m, field.wavelength_m, distance_m)
        if ratio > 1:
            warning("[PROPAGATION] Aliasing: lambda.z/(n.pitch^2) = {:.2f} > 1".format(ratio))

    f = np.fft.fftfreq(field.n, field.pitch_m)
    fx, fy = np.meshgrid(f, f)
    transfer = np.exp(-1j * np.pi * field.wavelength_m * distance_m * (fx ** 2 + fy ** 2))

    return ComplexField(np.fft.ifft2(np.fft.fft2(field.grid) * transfer), field.pitch_m, field.wavelength_m)


def downlink(bank: ScreenBank, t: float) -> tuple[ComplexField, np.ndarray]:
    """ Split-step propagation of a plane wave from the top of the atmosphere to the pupil.

    Note
    ----
    Also returns the accumulated screen phase, the turbulent phase seen
    by an ideal wavefront sensor.

    Parameters
    ----------
    bank : ScreenBank
        Frozen-flow screens (profile, grid, elevation and seed).
    t : float
        Time (s).

    Returns
    -------
    tuple of ComplexField, numpy.ndarray
        Field at the receiver pupil and accumulated phase (rad).

    Raises
    ------
    ScreenExhaustedError
        Time beyond the strips.
    NumericFailure
        Non-finite or vanishing field.
    """
    field = ComplexField.plane_wave(bank.n, bank.pitch, bank.wavelength)
    accumulated = np.zeros((bank.n, bank.n))
    for phase, distance in zip(bank.phases(t), bank.distances):
        accumulated += phase
        field = ComplexField(field.grid * np.exp(1j * phase), field.pitch_m, field.wavelength_m)
        field = angular_spectrum_propagate(field, distance, check=False)

    power = field.power()
    if not np.isfinite(power) or power <= 0:
        raise NumericFailure("propagated field power is {}".format(power))

    return field, accumulated


def propagate_downlink(bank: ScreenBank, t: float) -> ComplexField:
    """ Field at the receiver pupil at time t, see `downlink`.
    """
    return downlink(bank, t)[0]


def scintillation_index_empirical(fields: Sequence[ComplexField], pupil_d: float) -> float:
    """ Normalized irradiance variance over the pupil pixels and over time.

    Parameters
    ----------
    fields : sequence of ComplexField
        Fields sharing the same geometry (at least two).
    pupil_d : float
        Pupil diameter (m).

    Returns
    -------
    float
        <I^2>/<I>^2 - 1.
    """
    if len(fields) < 2:
        raise ValueError("Invalid field sequence: at least two fields required")

    mask = pupil_mask(fields[0].n, fields[0].pitch_m, pupil_d)
    if not mask.any():
        raise ValueError("Invalid pupil: empty")

    return irradiance_scintillation(np.concatenate([field.intensity()[mask] for field in fields]))


def irradiance_scintillation(irradiance: np.ndarray) -> float:
    """ <I^2>/<I>^2 - 1 of irradiance samples.
    """
    irradiance = np.asarray(irradiance, dtype=float)
    mean = irradiance.mean()
    if not mean > 0:
        raise NumericFailure("vanishing mean irradiance")
    return float(np.mean(irradiance ** 2) / mean ** 2 - 1)
