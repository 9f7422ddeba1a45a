"""
Phase Screens Module

Von Karman phase screens (FFT method with subharmonic compensation) and the
frozen-flow screen bank of a layered atmosphere.

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
from logging import debug, info
from math import atan2, ceil, cos, hypot, isinf, log2, sin, sqrt
from typing import Optional, Sequence, Union

import numpy as np
from scipy.ndimage import map_coordinates

from fsolink.atmosphere.profile import Cn2Profile, layer_fried_parameter, slew_velocity
from fsolink.lkio.status import ScreenExhaustedError

Seed = Union[int, np.random.SeedSequence, None]

SUBHARMONIC_LEVELS = 3


def is_power_of_two(n: int) -> bool:
    return n > 0 and (n & (n - 1)) == 0


def next_power_of_two(n: int) -> int:
    return 1 << max(0, ceil(log2(max(n, 1))))


def von_karman_psd(f: np.ndarray, r0: float, outer_scale: float) -> np.ndarray:
    """ Von Karman phase power spectral density (rad^2 m^2).

    Parameters
    ----------
    f : numpy.ndarray
        Spatial frequencies (cycles/m).
    r0 : float
        Fried parameter (m).
    outer_scale : float
        Outer scale (m).

    Returns
    -------
    numpy.ndarray
        PSD values.
    """
    return 0.023 * r0 ** (-5 / 3) * (f ** 2 + 1 / outer_scale ** 2) ** (-11 / 6)


@dataclass(frozen=True)
class PhaseScreen:
    """ Phase screen.

    Attributes
    ----------
    grid : numpy.ndarray
        Phase values (rad), rows by columns.
    pitch_m : float
        Pixel pitch (m).
    r0_layer_m : float
        Fried parameter of the layer (m).
    outer_scale_m : float
        Outer scale (m).
    """
    grid: np.ndarray
    pitch_m: float
    r0_layer_m: float
    outer_scale_m: float

    def __post_init__(self) -> None:
        if self.grid.ndim != 2 or not all(is_power_of_two(size) for size in self.grid.shape):
            raise ValueError("Invalid screen: sizes must be powers of two")
        if self.pitch_m <= 0:
            raise ValueError("Invalid screen: pitch must be positive")
        if not self.r0_layer_m > 0:
            raise ValueError("Invalid screen: r0 must be positive")
        if not np.all(np.isfinite(self.grid)):
            raise ValueError("Invalid screen: non-finite values")

    @property
    def n(self) -> int:
        return self.grid.shape[0]


def _subharmonics(rng: np.random.Generator, r0: float, outer_scale: float, n_rows: int, n_cols: int, pitch: float) -> np.ndarray:
    """ Low-frequency screen made of the 3x3 subharmonic grids (center excluded).
    """
    x = (np.arange(n_cols) - n_cols // 2) * pitch
    y = (np.arange(n_rows) - n_rows // 2) * pitch
    low = np.zeros((n_rows, n_cols))

    for level in range(1, SUBHARMONIC_LEVELS + 1):
        dfx = 1 / (3 ** level * n_cols * pitch)
        dfy = 1 / (3 ** level * n_rows * pitch)

        for i in (-1, 0, 1):
            for j in (-1, 0, 1):
                if i == 0 and j == 0:
                    continue
                fx, fy = j * dfx, i * dfy
                amplitude = sqrt(von_karman_psd(np.hypot(fx, fy), r0, outer_scale) * dfx * dfy)
                coefficient = (rng.standard_normal() + 1j * rng.standard_normal()) * amplitude
                # separable plane wave
                low += np.real(coefficient * np.outer(np.exp(2j * np.pi * fy * y), np.exp(2j * np.pi * fx * x)))

    return low - low.mean()


def make_phase_strip(r0_layer: float, outer_scale: float, n_rows: int, n_cols: int, pitch: float, seed: Seed = None) -> PhaseScreen:
    """ Rectangular von Karman phase screen.

    Parameters
    ----------
    r0_layer : float
        Fried parameter of the layer (m), infinite for an empty layer.
    outer_scale : float
        Outer scale (m).
    n_rows : int
        Number of rows (power of two).
    n_cols : int
        Number of columns (power of two).
    pitch : float
        Pixel pitch (m).
    seed : int or SeedSequence, optional
        Seed.

    Returns
    -------
    PhaseScreen
        Zero-mean Gaussian phase screen.
    """
    if not (is_power_of_two(n_rows) and is_power_of_two(n_cols)):
        raise ValueError("Invalid screen size: must be a power of two")
    if pitch <= 0 or outer_scale <= 0:
        raise ValueError("Invalid screen geometry")
    if not r0_layer > 0:
        raise ValueError("Invalid Fried parameter")

    if isinf(r0_layer):
        return PhaseScreen(np.zeros((n_rows, n_cols)), pitch, r0_layer, outer_scale)

    rng = np.random.default_rng(seed)

    # High frequencies from the FFT method
    fx = np.fft.fftfreq(n_cols, pitch)
    fy = np.fft.fftfreq(n_rows, pitch)
    f = np.hypot(fx[np.newaxis, :], fy[:, np.newaxis])
    psd = von_karman_psd(f, r0_layer, outer_scale)
    psd[0, 0] = 0
    df = 1 / (n_cols * pitch) * 1 / (n_rows * pitch)
    coefficients = (rng.standard_normal((n_rows, n_cols)) + 1j * rng.standard_normal((n_rows, n_cols))) * np.sqrt(psd * df)
    high = np.real(np.fft.ifft2(coefficients)) * n_rows * n_cols

    # Low frequencies
    low = _subharmonics(rng, r0_layer, outer_scale, n_rows, n_cols, pitch)

    return PhaseScreen(high + low, pitch, r0_layer, outer_scale)


def make_phase_screen(r0_layer: float, outer_scale: float, n: int, pitch: float, seed: Seed = None) -> PhaseScreen:
    """ Square von Karman phase screen, see `make_phase_strip`.
    """
    return make_phase_strip(r0_layer, outer_scale, n, n, pitch, seed)


def structure_function(screens: Sequence[Union[PhaseScreen, np.ndarray]], max_lag: int) -> tuple[np.ndarray, np.ndarray]:
    """ Ensemble phase structure function along both grid axes.

    Parameters
    ----------
    screens : sequence of PhaseScreen or numpy.ndarray
        Screens sharing the same shape.
    max_lag : int
        Largest separation (pixels).

    Returns
    -------
    tuple of numpy.ndarray
        Lags (pixels) and D(lag) (rad^2).
    """
    if not screens:
        raise ValueError("Invalid ensemble: no screen")

    grids = np.stack([screen.grid if isinstance(screen, PhaseScreen) else np.asarray(screen) for screen in screens])
    if max_lag < 1 or max_lag >= min(grids.shape[1:]):
        raise ValueError("Invalid maximal lag")

    lags = np.arange(1, max_lag + 1)
    values = np.empty(max_lag)
    for index, lag in enumerate(lags):
        along_x = (grids[:, :, lag:] - grids[:, :, :-lag]) ** 2
        along_y = (grids[:, lag:, :] - grids[:, :-lag, :]) ** 2
        values[index] = 0.5 * (along_x.mean() + along_y.mean())

    return lags, values


class ScreenBank:
    """ Frozen-flow phase screens of a layered atmosphere.

    Note
    ----
    Each layer owns a strip elongated along its transverse velocity
    (wind plus the apparent slew of the line of sight). The phase seen
    by the pupil grid at time t is read from the strip shifted by
    velocity * t with bilinear interpolation. The bank is immutable
    once built.

    Attributes
    ----------
    profile : Cn2Profile
        Turbulence profile.
    n : int
        Pupil grid size.
    pitch : float
        Pixel pitch (m).
    duration : float
        Validity span of the strips (s).
    velocities : list of tuple of float
        Transverse velocity (vx, vy) of each layer (m/s).
    r0_layers : list of float
        Fried parameter of each layer (m).
    distances : list of float
        Slant propagation distance after each layer, from the top (m).
    """

    def __init__(self, profile: Cn2Profile, n: int, pitch: float, wavelength: float, elevation_rad: float, duration: float, outer_scale: float = 5.0, transverse_velocity: float = 6500.0, satellite_altitude: float = 500e3, seed: Seed = 0) -> None:
        """ Initializer.

        Parameters
        ----------
        profile : Cn2Profile
            Turbulence profile.
        n : int
            Pupil grid size (power of two).
        pitch : float
            Pixel pitch (m).
        wavelength : float
            Wavelength (m).
        elevation_rad : float
            Elevation (rad).
        duration : float
            Time span to cover (s).
        outer_scale : float, optional
            Outer scale (m).
        transverse_velocity : float, optional
            Satellite transverse velocity (m/s).
        satellite_altitude : float, optional
            Satellite altitude (m).
        seed : int or SeedSequence, optional
            Seed.
        """
        if not is_power_of_two(n):
            raise ValueError("Invalid grid size: must be a power of two")
        if duration < 0:
            raise ValueError("Invalid duration")

        self.profile: Cn2Profile = profile
        self.n: int = n
        self.pitch: float = pitch
        self.wavelength: float = wavelength
        self.elevation_rad: float = elevation_rad
        self.duration: float = duration
        self.outer_scale: float = outer_scale

        secant = 1 / sin(elevation_rad)

        # Slew direction is the x axis of the pupil grid
        self.velocities: list[tuple[float, float]] = []
        for layer in profile.layers:
            slew = slew_velocity(layer.altitude_m, transverse_velocity, satellite_altitude, elevation_rad)
            self.velocities.append((layer.wind_speed_m_s * cos(layer.wind_direction_rad) + slew, layer.wind_speed_m_s * sin(layer.wind_direction_rad)))

        self.r0_layers: list[float] = [layer_fried_parameter(layer.strength, wavelength, elevation_rad) for layer in profile.layers]

        altitudes = [layer.altitude_m for layer in profile.layers]
        self.distances: list[float] = [(high - low) * secant for high, low in zip(altitudes[::-1], altitudes[-2::-1] + [0.0])]

        # Strips are generated from the top layer down
        sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
        children = sequence.spawn(len(profile))
        self._strips: list[Optional[np.ndarray]] = []
        self._angles: list[float] = []
        self._speeds: list[float] = []

        rows = next_power_of_two(ceil(sqrt(2) * n) + 2)
        for (vx, vy), r0, child in zip(self.velocities, self.r0_layers, children):
            speed = hypot(vx, vy)
            self._speeds.append(speed)
            self._angles.append(atan2(vy, vx))
            if isinf(r0):
                self._strips.append(None)
                continue
            cols = next_power_of_two(ceil(sqrt(2) * n + speed * duration / pitch) + 4)
            self._strips.append(make_phase_strip(r0, outer_scale, rows, cols, pitch, child).grid)

        info("[SCREENS] {} layers, {:.1f} MB of strips".format(len(profile), sum(strip.nbytes for strip in self._strips if strip is not None) / 2 ** 20))

    def __len__(self) -> int:
        return len(self._strips)

    def phase(self, index: int, t: float) -> np.ndarray:
        """ Phase screen of a layer seen by the pupil grid at time t.

        Parameters
        ----------
        index : int
            Layer index (increasing altitudes).
        t : float
            Time (s).

        Returns
        -------
        numpy.ndarray
            n x n phase map (rad).

        Raises
        ------
        ScreenExhaustedError
            The shift goes beyond the strip.
        """
        if t < 0:
            raise ValueError("Invalid time: must be nonnegative")

        strip = self._strips[index]
        if strip is None:
            return np.zeros((self.n, self.n))

        rows, cols = strip.shape
        angle, shift = self._angles[index], self._speeds[index] * t / self.pitch

        # Pupil grid expressed in the strip frame (u along the velocity)
        coordinates = np.arange(self.n) - self.n / 2
        x, y = np.meshgrid(coordinates, coordinates)
        u = x * cos(angle) + y * sin(angle)
        w = -x * sin(angle) + y * cos(angle)

        column = u + sqrt(2) * self.n / 2 + 1 + shift
        row = w + rows / 2

        if column.max() > cols - 1 or column.min() < 0:
            raise ScreenExhaustedError()

        return map_coordinates(strip, [row, column], order=1, mode='nearest')

    def phases(self, t: float) -> list[np.ndarray]:
        """ Phase maps of all layers, from the top layer down.
        """
        debug("[SCREENS] Sampling t={:.6f} s".format(t))
        return [self.phase(index, t) for index in reversed(range(len(self)))]
