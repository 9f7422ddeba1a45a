"""
Adaptive Optics Loop Module

Discrete-time modal integrator with pure loop delay and an ideal wavefront
sensor (direct modal measurement of the residual phase).

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

from collections import deque
from dataclasses import dataclass
from logging import info
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from fsolink.optics.zernike import ZernikeBasis, modal_decompose


@dataclass(frozen=True)
class AoLoopConfig:
    """ AO loop configuration.

    Attributes
    ----------
    frame_rate_hz : float
        Loop rate (Hz).
    delay_frames : int
        Pure delay between measurement and correction (frames).
    integrator_gain : float
        Integrator gain.
    n_modes : int
        Number of Zernike modes of the basis.
    correct_piston : bool
        Correct the piston mode.
    enabled : bool
        Apply the correction (False gives the uncorrected channel).
    """
    frame_rate_hz: float = 5000.0
    delay_frames: int = 2
    integrator_gain: float = 0.5
    n_modes: int = 91
    correct_piston: bool = False
    enabled: bool = True

    def __post_init__(self) -> None:
        if self.delay_frames < 1:
            raise ValueError("Invalid AO loop: delay must be at least one frame")
        if not 0 < self.integrator_gain < 1:
            raise ValueError("Invalid AO loop: gain must be in (0, 1)")
        if self.n_modes < 1:
            raise ValueError("Invalid AO loop: at least one mode required")
        if self.frame_rate_hz <= 0:
            raise ValueError("Invalid AO loop: frame rate must be positive")

    def corrected(self) -> np.ndarray:
        """ Mask of the corrected modes (Noll order).
        """
        mask = np.full(self.n_modes, self.enabled)
        if not self.correct_piston:
            mask[0] = False
        return mask


class AoLoop:
    """ Modal integrator with delay.

    Note
    ----
    At frame k the command is c(k) = c(k-1) + g * a_meas(k - delay), the
    residual is a_tur(k) - c(k) over the corrected modes and its
    measurement enters the delay line.

    Attributes
    ----------
    config : AoLoopConfig
        Loop configuration.
    command : numpy.ndarray
        Current modal command (rad).
    """

    def __init__(self, config: AoLoopConfig) -> None:
        self.config: AoLoopConfig = config
        self.command: np.ndarray = np.zeros(config.n_modes)
        self._corrected: np.ndarray = config.corrected()
        self._measurements: deque[np.ndarray] = deque()

    def step(self, turbulent: np.ndarray) -> np.ndarray:
        """ Advance one frame.

        Parameters
        ----------
        turbulent : numpy.ndarray
            Modal coefficients of the turbulent phase at this frame.

        Returns
        -------
        numpy.ndarray
            Command applied at this frame.
        """
        if len(self._measurements) == self.config.delay_frames:
            self.command = self.command + self.config.integrator_gain * self._measurements.popleft()

        command = self.command.copy()
        self._measurements.append(np.where(self._corrected, turbulent - command, 0.0))

        return command


def ao_closed_loop(frames: Sequence[np.ndarray], basis: ZernikeBasis, config: AoLoopConfig) -> list[np.ndarray]:
    """ Residual phase frames after AO correction.

    Parameters
    ----------
    frames : sequence of numpy.ndarray
        Turbulent phase maps at the loop rate.
    basis : ZernikeBasis
        Zernike basis (config.n_modes modes).
    config : AoLoopConfig
        Loop configuration.

    Returns
    -------
    list of numpy.ndarray
        Residual phase maps, one per input frame.
    """
    if len(basis) != config.n_modes:
        raise ValueError("Invalid basis: {} modes expected".format(config.n_modes))
    if len(frames) < config.delay_frames:
        raise ValueError("Invalid series: fewer frames than the loop delay")

    loop = AoLoop(config)
    residuals = []
    for frame in frames:
        command = loop.step(modal_decompose(frame, basis))
        residuals.append(frame - basis.expand(basis.synthesize(command)))

    return residuals


def run_modal_loop(turbulent: np.ndarray, config: AoLoopConfig) -> np.ndarray:
    """ Commands of the loop for a whole series of modal coefficients.

    Parameters
    ----------
    turbulent : numpy.ndarray
        Frames x modes turbulent coefficients.
    config : AoLoopConfig
        Loop configuration.

    Returns
    -------
    numpy.ndarray
        Frames x modes commands.
    """
    if turbulent.shape[0] < config.delay_frames:
        raise ValueError("Invalid series: fewer frames than the loop delay")

    loop = AoLoop(config)
    commands = np.array([loop.step(coefficients) for coefficients in turbulent])

    info("[AO-LOOP] {} frames, {} corrected modes".format(len(commands), int(config.corrected().sum())))

    return commands


def rejection_transfer(f: Union[float, np.ndarray], frame_rate: float, gain: float, delay: int) -> Union[float, np.ndarray]:
    """ Modulus of the residual/input transfer function of the loop.

    Parameters
    ----------
    f : float or numpy.ndarray
        Frequency (Hz).
    frame_rate : float
        Loop rate (Hz).
    gain : float
        Integrator gain.
    delay : int
        Loop delay (frames).

    Returns
    -------
    float or numpy.ndarray
        |(1 - z^-1) / (1 - z^-1 + g z^-delay)|.
    """
    z = np.exp(2j * np.pi * np.asarray(f) / frame_rate)
    transfer = (1 - 1 / z) / (1 - 1 / z + gain * z ** (-delay))
    return np.abs(transfer)


def rejection_bandwidth(frame_rate: float, gain: float, delay: int) -> float:
    """ Frequency at which the rejection transfer crosses unity (Hz).
    """
    f = np.linspace(1e-3, 0.5, 50001) * frame_rate
    above = np.nonzero(rejection_transfer(f, frame_rate, gain, delay) >= 1)[0]
    return float(f[above[0]]) if len(above) else frame_rate / 2


def residual_statistics(frames: Iterable[np.ndarray], basis: ZernikeBasis) -> pd.DataFrame:
    """ Per-frame residual RMS over the pupil and Strehl proxy.

    Parameters
    ----------
    frames : iterable of numpy.ndarray
        Residual phase maps.
    basis : ZernikeBasis
        Basis giving the pupil and the piston mode.

    Returns
    -------
    pandas.DataFrame
        Columns frame, rms_rad, rms_no_piston_rad, strehl.
    """
    rows = []
    for index, frame in enumerate(frames):
        values = frame[basis.mask]
        piston_removed = values - values.mean()
        rms_no_piston = float(np.sqrt(np.mean(piston_removed ** 2)))
        rows.append({'frame': index, 'rms_rad': float(np.sqrt(np.mean(values ** 2))), 'rms_no_piston_rad': rms_no_piston, 'strehl': float(np.exp(-rms_no_piston ** 2))})
    return pd.DataFrame(rows, columns=['frame', 'rms_rad', 'rms_no_piston_rad', 'strehl'])
