"""
Experiment Configuration

Input format (.txt):
    # comment
    [section]
    key = value

Sections: scenario, ao, link, receiver, outputs.
Every key has a default value; keys are unique across sections.

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

from dataclasses import dataclass, field, fields
from math import radians, sqrt
from re import fullmatch, split
from typing import Any, Optional

from fsolink.lkio.status import SampleBudgetError


@dataclass
class Scenario:
    """ Turbulence and geometry of the link.

    Attributes
    ----------
    c0 : float
        Ground-level Cn2 (m^-2/3).
    v_rms : float
        RMS wind speed parameter (m/s).
    v_ground : float
        Wind speed at the ground level (m/s).
    v_tropopause : float
        Wind speed at the tropopause (m/s).
    h_max : float
        Top of the atmosphere (m).
    outer_scale : float
        Outer scale (m).
    wavelength : float
        Wavelength (m).
    elevation_deg : float
        Elevation (deg).
    transverse_velocity : float
        Satellite transverse velocity (m/s).
    satellite_altitude : float
        Satellite altitude (m).
    aperture : float
        Receiver aperture diameter (m).
    n_layers : int
        Number of turbulent layers.
    layer_placement : str
        'equal-cn2' or 'equal-altitude'.
    grid_n : int
        Grid size (power of two). The propagation steps are alias-free
        while grid_n . grid_pitch^2 >= wavelength . z for the longest step
        z between layers, a coarser grid logs the worst ratio once per
        channel run.
    grid_pitch : float
        Grid pitch (m).
    turbulence_scale : float
        Factor applied to every Cn2 of the profile (0 for a turbulence-free link).
    """
    c0: float = 1e-13
    v_rms: float = 20.0
    v_ground: float = 10.0
    v_tropopause: float = 20.0
    h_max: float = 20000.0
    outer_scale: float = 5.0
    wavelength: float = 1.55e-6
    elevation_deg: float = 20.0
    transverse_velocity: float = 6500.0
    satellite_altitude: float = 500e3
    aperture: float = 0.5
    n_layers: int = 35
    layer_placement: str = 'equal-cn2'
    grid_n: int = 512
    grid_pitch: float = 2.0 / 512
    turbulence_scale: float = 1.0


@dataclass
class Ao:
    """ Adaptive-optics loop.
    """
    frame_rate: float = 5000.0
    delay_frames: int = 2
    integrator_gain: float = 0.5
    n_modes: int = 91
    correct_piston: bool = False


@dataclass
class Link:
    """ Modulated stream.

    Attributes
    ----------
    symbol_rate : float
        Symbol rate (Bd).
    delta_f : float
        Carrier frequency offset (Hz).
    esn0_db : float
        Average Es/N0 (dB).
    sweep : list of float
        Es/N0 values of a sweep (dB).
    duration : float
        Duration of a receiver run (s).
    channel_duration : float
        Duration of a channel series (s).
    seed : int
        Base seed.
    seeds : int
        Number of seeded trials per point.
    phase_noise : bool
        Apply the coupling phase series to the stream.
    """
    symbol_rate: float = 1e10
    delta_f: float = 1e8
    esn0_db: float = 8.0
    sweep: list[float] = field(default_factory=list)
    duration: float = 2e-3
    channel_duration: float = 0.2
    seed: int = 0
    seeds: int = 1
    phase_noise: bool = True


@dataclass
class Receiver:
    """ AGC, DPLL and lock detector settings.

    Note
    ----
    `agc` puts the AGC in front of the DPLL on fading channels, constant
    channels always bypass it so that the DPLL runs with its design gain.
    """
    xi: float = 1 / sqrt(2)
    blt: float = 5e-4
    kd: float = 1.0
    k0: float = 1.0
    g0: float = 0.1
    p_ref: float = 1.0
    detector: str = 'product'
    agc: bool = True
    sample_budget: int = 50_000_000
    chunk_size: int = 1 << 20
    lock_window: float = 1e4
    lock_tolerance: float = 1e6
    lock_hold: float = 1e-4


@dataclass
class Outputs:
    """ Run directory and dumps.
    """
    output_dir: str = 'run'
    dump_samples: bool = False


SECTIONS = {'scenario': Scenario, 'ao': Ao, 'link': Link, 'receiver': Receiver, 'outputs': Outputs}


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ('true', 'yes', 'on', '1'):
        return True
    if lowered in ('false', 'no', 'off', '0'):
        return False
    raise ValueError("Invalid boolean: {}".format(value))


def _parse_value(default: Any, value: str) -> Any:
    if isinstance(default, bool):
        return _parse_bool(value)
    if isinstance(default, int):
        return int(value) if fullmatch(r'[+-]?\d+', value) else int(float(value))
    if isinstance(default, float):
        return float(value)
    if isinstance(default, list):
        return [float(item) for item in split(r'[\s,]+', value) if item]
    return value


def _format_value(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, list):
        return ', '.join(repr(float(item)) for item in value)
    return str(value)


class ExperimentConfig:
    """ Experiment configuration.

    Attributes
    ----------
    scenario : Scenario
        Turbulence and geometry.
    ao : Ao
        Adaptive-optics loop.
    link : Link
        Modulated stream.
    receiver : Receiver
        Receiver settings.
    outputs : Outputs
        Output settings.
    """

    def __init__(self, filename: Optional[str] = None) -> None:
        """ Initializer.

        Parameters
        ----------
        filename : str, optional
            Configuration file.
        """
        self.scenario: Scenario = Scenario()
        self.ao: Ao = Ao()
        self.link: Link = Link()
        self.receiver: Receiver = Receiver()
        self.outputs: Outputs = Outputs()

        if filename is not None:
            self.parse_config(filename)

    def __str__(self) -> str:
        return self.dumps()

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ExperimentConfig):
            return NotImplemented
        return all(getattr(self, name) == getattr(other, name) for name in SECTIONS)

    def section_of(self, key: str) -> str:
        """ Section holding a key.

        Raises
        ------
        ValueError
            Unknown key.
        """
        for name, section in SECTIONS.items():
            if key in (f.name for f in fields(section)):
                return name
        raise ValueError("Unknown key: {}".format(key))

    def set(self, key: str, value: str, section: Optional[str] = None) -> None:
        """ Set a key from its text value.

        Parameters
        ----------
        key : str
            Key.
        value : str
            Text value.
        section : str, optional
            Expected section.
        """
        owner = self.section_of(key)
        if section is not None and section != owner:
            raise ValueError("Unknown key: {} in [{}]".format(key, section))

        current = getattr(self, owner)
        setattr(current, key, _parse_value(getattr(current, key), value.strip()))

    def override(self, assignments: list[str]) -> None:
        """ Apply `key=value` overrides.
        """
        for assignment in assignments:
            key, sep, value = assignment.partition('=')
            if not sep:
                raise ValueError("Invalid override: {}".format(assignment))
            self.set(key.strip(), value)

    def parse_config(self, filename: str) -> None:
        """ Configuration parser.

        Parameters
        ----------
        filename : str
            Configuration file (.txt format).

        Raises
        ------
        FileNotFoundError
            Configuration file not found.
        """
        with open(filename, 'r') as fp:
            self.loads(fp.read())

    def loads(self, text: str) -> None:
        """ Parse a configuration text.
        """
        section = None
        for line in text.splitlines():

            # Skip comments and empty lines
            content = line.split('#', 1)[0].strip()
            if not content:
                continue

            header = fullmatch(r'\[\s*(\w+)\s*\]', content)
            if header:
                section = header.group(1)
                if section not in SECTIONS:
                    raise ValueError("Unknown section: {}".format(section))
                continue

            key_value = split(r'\s*=\s*', content, maxsplit=1)
            if len(key_value) != 2:
                raise ValueError("Invalid line: {}".format(line))
            self.set(key_value[0], key_value[1], section)

    def dumps(self) -> str:
        """ Render the configuration as a text that `loads` parses back.
        """
        text = ""
        for name in SECTIONS:
            text += "[{}]\n".format(name)
            current = getattr(self, name)
            for f in fields(current):
                text += "{} = {}\n".format(f.name, _format_value(getattr(current, f.name)))
            text += "\n"
        return text

    @property
    def elevation_rad(self) -> float:
        return radians(self.scenario.elevation_deg)

    @property
    def snr_points(self) -> list[float]:
        """ Sweep points, or the single Es/N0.
        """
        return self.link.sweep if self.link.sweep else [self.link.esn0_db]

    def check_budget(self, duration: Optional[float] = None) -> int:
        """ Number of samples of a receiver run.

        Raises
        ------
        SampleBudgetError
            More samples than the budget.
        """
        duration = self.link.duration if duration is None else duration
        n_samples = int(round(duration * self.link.symbol_rate))
        if n_samples > self.receiver.sample_budget:
            raise SampleBudgetError("{} samples requested, budget is {}".format(n_samples, self.receiver.sample_budget))
        return n_samples
