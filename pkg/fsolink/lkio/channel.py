"""
Channel Series Module

Time series of relative coupling efficiency and coupling phase.

Binary format (.fsoc, little-endian):
    magic "FSOC" | version u32 | frame_rate f64 | n_frames u64
    then n_frames x (rho_rel f64, phi f64)

CSV format (.csv):
    t_s, rho_rel, rho_rel_db, phi_rad

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

from struct import calcsize, pack, unpack
from typing import Union

import numpy as np
import pandas as pd

MAGIC = b'FSOC'
VERSION = 1
HEADER = '<4sIdQ'

# Floor of the dB conversion (deep fades)
DB_FLOOR = 1e-30


def wrap_phase(phi: np.ndarray) -> np.ndarray:
    """ Wrap to (-pi, pi], values already inside are left untouched.
    """
    phi = np.asarray(phi, dtype=float)
    outside = (phi <= -np.pi) | (phi > np.pi)
    if not outside.any():
        return phi.copy()
    wrapped = np.pi - np.mod(np.pi - phi, 2 * np.pi)
    return np.where(outside, wrapped, phi)


class ChannelSeries:
    """ Coupling efficiency and phase series at the AO frame rate.

    Attributes
    ----------
    frame_rate : float
        Frame rate (Hz).
    rho : numpy.ndarray
        Relative coupling efficiency (linear, 1 = turbulence-free).
    phi : numpy.ndarray
        Coupling phase (rad), wrapped to (-pi, pi].
    """

    def __init__(self, frame_rate: float, rho: Union[np.ndarray, list[float]], phi: Union[np.ndarray, list[float]]) -> None:
        """ Initializer.

        Parameters
        ----------
        frame_rate : float
            Frame rate (Hz).
        rho : array_like
            Relative coupling efficiency.
        phi : array_like
            Coupling phase (rad).
        """
        rho = np.asarray(rho, dtype=float)
        phi = np.asarray(phi, dtype=float)

        if not frame_rate > 0:
            raise ValueError("Invalid frame rate: must be positive")
        if rho.ndim != 1 or rho.shape != phi.shape:
            raise ValueError("Invalid series: rho and phi must be vectors of the same length")
        if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(phi))):
            raise ValueError("Invalid series: non-finite values")
        if np.any(rho < 0):
            raise ValueError("Invalid series: negative coupling efficiency")

        self.frame_rate: float = float(frame_rate)
        self.rho: np.ndarray = rho
        self.phi: np.ndarray = wrap_phase(phi)

    def __len__(self) -> int:
        return len(self.rho)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ChannelSeries):
            return NotImplemented
        return self.frame_rate == other.frame_rate and np.array_equal(self.rho, other.rho) and np.array_equal(self.phi, other.phi)

    def __str__(self) -> str:
        return "ChannelSeries({} frames at {} Hz, mean {:.2f} dB)".format(len(self), self.frame_rate, self.mean_db())

    @classmethod
    def constant(cls, n_frames: int, frame_rate: float, rho: float = 1.0, phi: float = 0.0) -> ChannelSeries:
        """ Constant-amplitude reference channel.
        """
        return cls(frame_rate, np.full(n_frames, rho), np.full(n_frames, phi))

    @property
    def duration(self) -> float:
        return len(self) / self.frame_rate

    @property
    def fading(self) -> bool:
        """ Coupling efficiency varies over the series.
        """
        return bool(len(self)) and float(np.ptp(self.rho)) > 0

    def times(self) -> np.ndarray:
        return np.arange(len(self)) / self.frame_rate

    def unwrapped_phase(self) -> np.ndarray:
        """ Phase continued by the nearest multiple of 2 pi.
        """
        return np.unwrap(self.phi)

    def rho_db(self) -> np.ndarray:
        return 10 * np.log10(np.maximum(self.rho, DB_FLOOR))

    def mean_db(self) -> float:
        """ Mean coupling efficiency in dB (average flux penalty).
        """
        if not len(self):
            raise ValueError("Invalid series: empty")
        return float(10 * np.log10(max(self.rho.mean(), DB_FLOOR)))

    def slice(self, t0: float, t1: float) -> ChannelSeries:
        """ Frames with t0 <= t < t1.
        """
        start, stop = int(np.ceil(t0 * self.frame_rate)), int(np.ceil(t1 * self.frame_rate))
        return ChannelSeries(self.frame_rate, self.rho[start:stop], self.phi[start:stop])

    def without_phase(self) -> ChannelSeries:
        """ Same coupling efficiency, zero phase.
        """
        return ChannelSeries(self.frame_rate, self.rho, np.zeros_like(self.phi))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({'t_s': self.times(), 'rho_rel': self.rho, 'rho_rel_db': self.rho_db(), 'phi_rad': self.phi})

    def to_bytes(self) -> bytes:
        header = pack(HEADER, MAGIC, VERSION, self.frame_rate, len(self))
        return header + np.column_stack((self.rho, self.phi)).astype('<f8').tobytes()

    @classmethod
    def from_bytes(cls, data: bytes) -> ChannelSeries:
        """ Decode a FSOC payload.

        Raises
        ------
        ValueError
            Bad magic, unsupported version or truncated payload.
        """
        size = calcsize(HEADER)
        if len(data) < size:
            raise ValueError("Invalid channel file: truncated header")

        magic, version, frame_rate, n_frames = unpack(HEADER, data[:size])
        if magic != MAGIC:
            raise ValueError("Invalid channel file: bad magic")
        if version != VERSION:
            raise ValueError("Invalid channel file: unsupported version {}".format(version))
        if len(data) != size + 16 * n_frames:
            raise ValueError("Invalid channel file: truncated payload")

        frames = np.frombuffer(data, dtype='<f8', offset=size).reshape(n_frames, 2)
        return cls(frame_rate, frames[:, 0].astype(float), frames[:, 1].astype(float))


def write_channel(series: ChannelSeries, filename: str) -> None:
    """ Write a channel series (.fsoc format).
    """
    with open(filename, 'wb') as fp:
        fp.write(series.to_bytes())


def read_channel(filename: str) -> ChannelSeries:
    """ Read a channel series (.fsoc format).

    Raises
    ------
    FileNotFoundError
        Channel file not found.
    """
    with open(filename, 'rb') as fp:
        return ChannelSeries.from_bytes(fp.read())


def write_channel_csv(series: ChannelSeries, filename: str) -> None:
    """ Export a channel series (.csv format).
    """
    series.to_frame().to_csv(filename, index=False)
