"""
Turbulence Profile Module

Hufnagel-Valley refractive-index structure constant (ITU-R P.1621-1 form),
Bufton wind profile and the layered description of the atmosphere used by
the split-step propagator.

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

from dataclasses import dataclass, field
from logging import debug
from math import cos, exp, pi, sin, sqrt
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.special import gamma, gammainc

from fsolink.lkio.status import NoTurbulenceError

# Hufnagel-Valley coefficients (h in meters)
HV_UPPER = 8.148e-56
HV_MIDDLE = 2.7e-16
HV_MIDDLE_SCALE = 1500.0
HV_UPPER_SCALE = 1000.0
HV_GROUND_SCALE = 100.0

# Bufton jet-stream altitude and width
BUFTON_ALTITUDE = 9400.0
BUFTON_WIDTH = 4800.0

EARTH_RADIUS = 6371e3
H_MAX = 20000.0

PLACEMENTS = ['equal-cn2', 'equal-altitude']


def _check_nonnegative(**values: float) -> None:
    for name, value in values.items():
        if value < 0:
            raise ValueError("Invalid {}: must be nonnegative".format(name))


def _zenith_secant(elevation_rad: float) -> float:
    if not 0 < elevation_rad <= pi / 2:
        raise ValueError("Invalid elevation: must be in (0, pi/2]")
    return 1 / sin(elevation_rad)


def hv_cn2(h_m: float, c0: float, v_rms: float) -> float:
    """ Hufnagel-Valley Cn2 at a given altitude.

    Parameters
    ----------
    h_m : float
        Altitude (m).
    c0 : float
        Ground-level Cn2 (m^-2/3).
    v_rms : float
        RMS high-altitude wind speed (m/s).

    Returns
    -------
    float
        Cn2 (m^-2/3).
    """
    _check_nonnegative(h_m=h_m, c0=c0, v_rms=v_rms)

    return HV_UPPER * v_rms ** 2 * h_m ** 10 * exp(-h_m / HV_UPPER_SCALE) \
        + HV_MIDDLE * exp(-h_m / HV_MIDDLE_SCALE) \
        + c0 * exp(-h_m / HV_GROUND_SCALE)


def _exponential_moment(scale: float, power: float, h_low: float, h_high: float) -> float:
    """ Closed form of the integral of h^power * exp(-h/scale) over [h_low, h_high].
    """
    s = power + 1
    return scale ** s * gamma(s) * (gammainc(s, h_high / scale) - gammainc(s, h_low / scale))


def hv_integral(c0: float, v_rms: float, h_low: float = 0.0, h_high: float = H_MAX, moment: float = 0.0) -> float:
    """ Closed-form integral of Cn2(h) * h^moment between two altitudes.

    Parameters
    ----------
    c0 : float
        Ground-level Cn2 (m^-2/3).
    v_rms : float
        RMS wind speed (m/s).
    h_low : float, optional
        Lower altitude (m).
    h_high : float, optional
        Upper altitude (m).
    moment : float, optional
        Power of the altitude weight.

    Returns
    -------
    float
        Integral value (m^(1/3 + moment)).
    """
    _check_nonnegative(c0=c0, v_rms=v_rms, h_low=h_low)
    if h_high < h_low:
        raise ValueError("Invalid altitude range")

    return HV_UPPER * v_rms ** 2 * _exponential_moment(HV_UPPER_SCALE, 10 + moment, h_low, h_high) \
        + HV_MIDDLE * _exponential_moment(HV_MIDDLE_SCALE, moment, h_low, h_high) \
        + c0 * _exponential_moment(HV_GROUND_SCALE, moment, h_low, h_high)


def cn2_integral(cn2: Callable[[float], float], h_max: float = H_MAX, moment: float = 0.0) -> float:
    """ Adaptive quadrature of Cn2(h) * h^moment over [0, h_max].

    Parameters
    ----------
    cn2 : callable
        Cn2 as a function of the altitude (m).
    h_max : float, optional
        Top altitude (m).
    moment : float, optional
        Power of the altitude weight.

    Returns
    -------
    float
        Integral value.
    """
    breakpoints = [p for p in (50.0, 200.0, 1000.0, 5000.0, 10000.0) if p < h_max]
    value, _ = quad(lambda h: cn2(h) * h ** moment, 0, h_max, points=breakpoints, limit=400, epsabs=0, epsrel=1e-10)
    return value


def bufton_wind(h_m: float, v_ground: float, v_tropopause: float) -> float:
    """ Bufton wind speed profile.

    Parameters
    ----------
    h_m : float
        Altitude (m).
    v_ground : float
        Ground wind speed (m/s).
    v_tropopause : float
        Jet-stream peak excess (m/s).

    Returns
    -------
    float
        Wind speed (m/s).
    """
    _check_nonnegative(h_m=h_m)

    return v_ground + v_tropopause * exp(-((h_m - BUFTON_ALTITUDE) / BUFTON_WIDTH) ** 2)


def slant_range(satellite_altitude: float, elevation_rad: float) -> float:
    """ Distance from the ground station to the satellite (spherical Earth).
    """
    _zenith_secant(elevation_rad)
    radius = EARTH_RADIUS + satellite_altitude
    return sqrt(radius ** 2 - (EARTH_RADIUS * cos(elevation_rad)) ** 2) - EARTH_RADIUS * sin(elevation_rad)


def slew_velocity(h_m: float, transverse_velocity: float, satellite_altitude: float, elevation_rad: float) -> float:
    """ Apparent transverse speed of the line of sight at a given altitude.

    Parameters
    ----------
    h_m : float
        Altitude of the layer (m).
    transverse_velocity : float
        Satellite velocity transverse to the line of sight (m/s).
    satellite_altitude : float
        Satellite altitude (m).
    elevation_rad : float
        Elevation (rad).

    Returns
    -------
    float
        Slew speed (m/s).
    """
    return transverse_velocity / slant_range(satellite_altitude, elevation_rad) * h_m * _zenith_secant(elevation_rad)


@dataclass(frozen=True)
class Layer:
    """ Turbulent layer.

    Attributes
    ----------
    altitude_m : float
        Altitude of the equivalent thin screen (m).
    thickness_m : float
        Thickness of the slab represented by the layer (m).
    cn2 : float
        Mean Cn2 over the slab (m^-2/3).
    wind_speed_m_s : float
        Wind speed (m/s).
    wind_direction_rad : float
        Wind direction (rad).
    base_m : float
        Bottom of the slab (m).
    """
    altitude_m: float
    thickness_m: float
    cn2: float
    wind_speed_m_s: float
    wind_direction_rad: float
    base_m: float

    @property
    def strength(self) -> float:
        """ Integrated Cn2 of the slab (m^1/3).
        """
        return self.cn2 * self.thickness_m


@dataclass
class Cn2Profile:
    """ Layered Cn2 profile with wind.

    Attributes
    ----------
    layers : list of Layer
        Layers, increasing altitudes.
    c0 : float
        Ground-level Cn2 (m^-2/3).
    v_rms : float
        RMS wind (m/s).
    h_max_m : float
        Top altitude (m).
    """
    layers: list[Layer]
    c0: float
    v_rms: float
    h_max_m: float = H_MAX
    placement: str = field(default='equal-cn2')

    def __post_init__(self) -> None:
        if not self.layers:
            raise ValueError("Invalid profile: at least one layer required")

        altitudes = [layer.altitude_m for layer in self.layers]
        if altitudes[0] <= 0 or altitudes[-1] > self.h_max_m or any(a >= b for a, b in zip(altitudes, altitudes[1:])):
            raise ValueError("Invalid profile: altitudes must increase strictly in (0, h_max]")

        if any(layer.cn2 < 0 for layer in self.layers):
            raise ValueError("Invalid profile: negative Cn2")

        # Slabs tile (0, h_max]
        top = 0.0
        for layer in self.layers:
            if abs(layer.base_m - top) > 1e-6 * self.h_max_m or not layer.base_m < layer.altitude_m <= layer.base_m + layer.thickness_m:
                raise ValueError("Invalid profile: slabs must tile (0, h_max]")
            top = layer.base_m + layer.thickness_m
        if abs(top - self.h_max_m) > 1e-6 * self.h_max_m:
            raise ValueError("Invalid profile: slabs must tile (0, h_max]")

    def __len__(self) -> int:
        return len(self.layers)

    def moment(self, power: float = 0.0) -> float:
        """ Layered integral of Cn2(h) * h^power.
        """
        return sum(layer.strength * layer.altitude_m ** power for layer in self.layers)

    def scaled(self, factor: float) -> Cn2Profile:
        """ Same geometry and winds with every Cn2 multiplied by a factor.
        """
        layers = [Layer(layer.altitude_m, layer.thickness_m, layer.cn2 * factor, layer.wind_speed_m_s, layer.wind_direction_rad, layer.base_m) for layer in self.layers]
        return Cn2Profile(layers, self.c0 * factor, self.v_rms, self.h_max_m, self.placement)


def _slab_boundaries(c0: float, v_rms: float, n_layers: int, h_max: float, placement: str) -> list[float]:
    if placement == 'equal-altitude':
        return list(np.linspace(0.0, h_max, n_layers + 1))

    if placement != 'equal-cn2':
        raise ValueError("Invalid layer placement: {}".format(placement))

    total = hv_integral(c0, v_rms, 0.0, h_max)
    boundaries = [0.0]
    for index in range(1, n_layers):
        target = total * index / n_layers
        boundaries.append(brentq(lambda h: hv_integral(c0, v_rms, 0.0, h) - target, boundaries[-1], h_max, xtol=1e-9, rtol=1e-12))
    boundaries.append(h_max)

    return boundaries


def build_profile(c0: float, v_rms: float, v_ground: float = 10.0, v_tropopause: float = 20.0, n_layers: int = 35, h_max: float = H_MAX, placement: str = 'equal-cn2', seed: Optional[int] = 0) -> Cn2Profile:
    """ Discretize the Hufnagel-Valley profile in thin layers.

    Note
    ----
    Each layer carries the exact slab integral of Cn2 and sits at the
    h^(5/6)-weighted altitude of its slab, so the layered profile keeps
    both the Fried parameter and the Rytov index of the continuous one.

    Parameters
    ----------
    c0 : float
        Ground-level Cn2 (m^-2/3).
    v_rms : float
        RMS wind speed (m/s).
    v_ground : float, optional
        Bufton ground wind (m/s).
    v_tropopause : float, optional
        Bufton jet-stream excess (m/s).
    n_layers : int, optional
        Number of layers.
    h_max : float, optional
        Top altitude (m).
    placement : str, optional
        'equal-cn2' or 'equal-altitude'.
    seed : int, optional
        Seed of the wind directions.

    Returns
    -------
    Cn2Profile
        Layered profile.
    """
    _check_nonnegative(c0=c0, v_rms=v_rms, v_ground=v_ground, v_tropopause=v_tropopause)
    if n_layers < 1:
        raise ValueError("Invalid number of layers")

    # A vanishing profile keeps the geometry of the equal-altitude split
    if hv_integral(c0, v_rms, 0.0, h_max) == 0:
        placement_used = 'equal-altitude'
    else:
        placement_used = placement
    boundaries = _slab_boundaries(c0, v_rms, n_layers, h_max, placement_used)

    rng = np.random.default_rng(seed)
    directions = rng.uniform(0.0, 2 * pi, n_layers)

    layers = []
    for index, (low, high) in enumerate(zip(boundaries, boundaries[1:])):
        strength = hv_integral(c0, v_rms, low, high)
        weighted = hv_integral(c0, v_rms, low, high, moment=5 / 6)
        altitude = (weighted / strength) ** (6 / 5) if strength > 0 else 0.5 * (low + high)
        altitude = min(max(altitude, np.nextafter(low, high)), high)
        layers.append(Layer(altitude, high - low, strength / (high - low), bufton_wind(altitude, v_ground, v_tropopause), float(directions[index]), low))

    debug("[PROFILE] {} layers ({}), lowest at {:.2f} m, highest at {:.0f} m".format(n_layers, placement_used, layers[0].altitude_m, layers[-1].altitude_m))

    return Cn2Profile(layers, c0, v_rms, h_max, placement)


def fried_parameter(profile: Cn2Profile, wavelength: float, elevation_rad: float) -> float:
    """ Fried parameter along the line of sight.

    Parameters
    ----------
    profile : Cn2Profile
        Turbulence profile.
    wavelength : float
        Wavelength (m).
    elevation_rad : float
        Elevation (rad).

    Returns
    -------
    float
        r0 (m).

    Raises
    ------
    NoTurbulenceError
        Zero turbulence integral.
    """
    secant = _zenith_secant(elevation_rad)
    integral = profile.moment(0.0)
    if integral <= 0:
        raise NoTurbulenceError()

    k = 2 * pi / wavelength
    return (0.423 * k ** 2 * secant * integral) ** (-3 / 5)


def layer_fried_parameter(strength: float, wavelength: float, elevation_rad: float) -> float:
    """ Fried parameter of a single slab (infinite when the slab is empty).
    """
    if strength <= 0:
        return float('inf')
    k = 2 * pi / wavelength
    return (0.423 * k ** 2 * _zenith_secant(elevation_rad) * strength) ** (-3 / 5)


def rytov_index(profile: Cn2Profile, wavelength: float, elevation_rad: float) -> float:
    """ Plane-wave scintillation index in the weak-fluctuation regime.

    Parameters
    ----------
    profile : Cn2Profile
        Turbulence profile.
    wavelength : float
        Wavelength (m).
    elevation_rad : float
        Elevation (rad).

    Returns
    -------
    float
        Rytov variance of the irradiance.
    """
    secant = _zenith_secant(elevation_rad)
    k = 2 * pi / wavelength
    return 2.25 * k ** (7 / 6) * secant ** (11 / 6) * profile.moment(5 / 6)


def isoplanatic_angle(profile: Cn2Profile, wavelength: float, elevation_rad: float) -> float:
    """ Isoplanatic angle (rad).
    """
    secant = _zenith_secant(elevation_rad)
    integral = profile.moment(5 / 3)
    if integral <= 0:
        raise NoTurbulenceError()
    k = 2 * pi / wavelength
    return (2.914 * k ** 2 * secant ** (8 / 3) * integral) ** (-3 / 5)


def greenwood_frequency(profile: Cn2Profile, wavelength: float, elevation_rad: float, velocities: Optional[list[float]] = None) -> float:
    """ Greenwood frequency (Hz).

    Parameters
    ----------
    profile : Cn2Profile
        Turbulence profile.
    wavelength : float
        Wavelength (m).
    elevation_rad : float
        Elevation (rad).
    velocities : list of float, optional
        Transverse speed of each layer (wind only by default).

    Returns
    -------
    float
        Greenwood frequency.
    """
    secant = _zenith_secant(elevation_rad)
    if velocities is None:
        velocities = [layer.wind_speed_m_s for layer in profile.layers]
    k = 2 * pi / wavelength
    integral = sum(layer.strength * abs(v) ** (5 / 3) for layer, v in zip(profile.layers, velocities))
    return (0.102 * k ** 2 * secant * integral) ** (3 / 5)
