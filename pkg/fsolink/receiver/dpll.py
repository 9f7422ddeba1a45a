"""
Digital Phase-Locked Loop Module

Second-order decision-free DPLL for BPSK: phase detector, proportional plus
integral loop filter F(z) = K1 (1 + K2 / (z - 1)) and NCO K0 / (z - 1).
The phase estimate is removed from the next sample (one-sample feedback
delay).

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
from math import pi, sqrt

import numpy as np
from numba import njit

from fsolink.receiver.abstractloop import AbstractLoop

DETECTORS = {'product': 0, 'map': 1}

TWO_PI = 2 * pi


def detector_code(mode: str) -> int:
    """ Numeric code of a phase detector mode.

    Raises
    ------
    ValueError
        Unknown mode.
    """
    if mode not in DETECTORS:
        raise ValueError("Invalid detector: {} (expected one of {})".format(mode, ", ".join(DETECTORS)))
    return DETECTORS[mode]


@dataclass(frozen=True)
class LoopGains:
    """ DPLL design constants.

    Attributes
    ----------
    kd : float
        Phase detector gain (average signal power).
    k0 : float
        NCO gain.
    k1 : float
        Proportional gain of the loop filter.
    k2 : float
        Integral gain of the loop filter.
    xi : float
        Damping factor.
    blt : float
        Normalized loop bandwidth B_L.T.
    wnt : float
        Normalized natural frequency w_n.T.
    """
    kd: float
    k0: float
    k1: float
    k2: float
    xi: float
    blt: float
    wnt: float

    def __post_init__(self) -> None:
        if min(self.kd, self.k0, self.k1, self.k2, self.xi, self.blt, self.wnt) <= 0:
            raise ValueError("Invalid loop gains: must be positive")

    @property
    def total_gain(self) -> float:
        """ K = Kd.K1.K0.
        """
        return self.kd * self.k1 * self.k0

    def forward(self) -> tuple[float, float, float]:
        """ (xi, B_L.T, w_n.T) from the gains.
        """
        total = self.total_gain
        return 0.5 * sqrt(total / self.k2), (total + self.k2) / 4, sqrt(total * self.k2)


def design_loop_gains(xi: float, blt: float, kd: float = 1.0, k0: float = 1.0) -> LoopGains:
    """ Loop filter gains of a damping factor and a normalized bandwidth.

    Parameters
    ----------
    xi : float
        Damping factor.
    blt : float
        Normalized loop bandwidth, in (0, 0.25).
    kd : float, optional
        Phase detector gain.
    k0 : float, optional
        NCO gain.

    Returns
    -------
    LoopGains
        Design constants.
    """
    if xi <= 0 or kd <= 0 or k0 <= 0:
        raise ValueError("Invalid loop design: gains and damping must be positive")
    if not 0 < blt < 0.25:
        raise ValueError("Invalid loop design: B_L.T must be in (0, 0.25)")

    k2 = 4 * blt / (1 + 4 * xi ** 2)
    total = 4 * xi ** 2 * k2
    return LoopGains(kd, k0, total / (kd * k0), k2, xi, blt, sqrt(total * k2))


@njit(cache=True)
def detector_output(re: float, im: float, mode: int) -> float:
    if mode == 0:
        return re * im
    return im * np.tanh(re)


@njit(cache=True)
def wrap_phase(phase: float) -> float:
    """ Wrap to (-pi, pi].
    """
    return phase - TWO_PI * np.ceil((phase - np.pi) / TWO_PI)


@njit(cache=True)
def dpll_update(nco: float, accumulator: float, re: float, im: float, k0: float, k1: float, k2: float, mode: int) -> tuple[float, float, float, float, float, float]:
    """ One DPLL sample: derotation, detection, filtering and NCO update.
    """
    c, s = np.cos(nco), np.sin(nco)
    out_re = re * c + im * s
    out_im = im * c - re * s

    error = detector_output(out_re, out_im, mode)
    filtered = k1 * error + accumulator
    accumulator = accumulator + k1 * k2 * error
    increment = k0 * filtered

    return wrap_phase(nco + increment), accumulator, out_re, out_im, error, increment


@njit(cache=True)
def dpll_block(samples: np.ndarray, nco: float, accumulator: float, k0: float, k1: float, k2: float, mode: int, out: np.ndarray, nco_out: np.ndarray, increment_out: np.ndarray) -> tuple[float, float]:
    for k in range(samples.shape[0]):
        nco_out[k] = nco
        nco, accumulator, re, im, _, increment = dpll_update(nco, accumulator, samples[k].real, samples[k].imag, k0, k1, k2, mode)
        out[k] = complex(re, im)
        increment_out[k] = increment
    return nco, accumulator


def phase_detector(sample: complex, mode: str = 'product') -> float:
    """ Phase error of a derotated sample.

    Note
    ----
    product: e = I.Q, noiseless response (Kd / 2) sin(2 phi).
    map: e = Q.tanh(I).

    Parameters
    ----------
    sample : complex
        Derotated sample.
    mode : str, optional
        'product' or 'map'.

    Returns
    -------
    float
        Phase error.
    """
    return detector_output(sample.real, sample.imag, detector_code(mode))


@dataclass(frozen=True)
class DpllState:
    """ DPLL runtime state.

    Attributes
    ----------
    nco_phase : float
        NCO phase (rad), in (-pi, pi].
    accumulator : float
        Integral branch of the loop filter (rad/sample).
    increment : float
        Last NCO increment K0.u (rad/sample).
    """
    nco_phase: float = 0.0
    accumulator: float = 0.0
    increment: float = 0.0

    def f_est(self, symbol_period: float) -> float:
        """ Frequency estimate (Hz).
        """
        return self.increment / (TWO_PI * symbol_period)


def dpll_step(state: DpllState, gains: LoopGains, sample: complex, mode: str = 'product') -> tuple[DpllState, complex, float]:
    """ Pure DPLL transition.

    Parameters
    ----------
    state : DpllState
        Current state.
    gains : LoopGains
        Loop gains.
    sample : complex
        Input sample.
    mode : str, optional
        Phase detector.

    Returns
    -------
    tuple of DpllState, complex, float
        Next state, derotated sample and phase error.
    """
    nco, accumulator, re, im, error, increment = dpll_update(state.nco_phase, state.accumulator, sample.real, sample.imag, gains.k0, gains.k1, gains.k2, detector_code(mode))
    return DpllState(nco, accumulator, increment), complex(re, im), error


class Dpll(AbstractLoop):
    """ Chunked DPLL.

    Attributes
    ----------
    gains : LoopGains
        Loop gains.
    mode : str
        Phase detector.
    state : DpllState
        Current state.
    nco : numpy.ndarray
        NCO phase applied to each sample of the last chunk.
    increments : numpy.ndarray
        NCO increments of the last chunk.
    """

    def __init__(self, gains: LoopGains, mode: str = 'product') -> None:
        detector_code(mode)

        self.gains: LoopGains = gains
        self.mode: str = mode
        self.state: DpllState = DpllState()
        self.nco: np.ndarray = np.empty(0)
        self.increments: np.ndarray = np.empty(0)

    def reset(self) -> None:
        self.state = DpllState()

    def process(self, samples: np.ndarray) -> np.ndarray:
        out = np.empty_like(samples, dtype=complex)
        self.nco = np.empty(len(samples))
        self.increments = np.empty(len(samples))

        nco, accumulator = dpll_block(samples.astype(complex), self.state.nco_phase, self.state.accumulator, self.gains.k0, self.gains.k1, self.gains.k2, detector_code(self.mode), out, self.nco, self.increments)
        self.state = DpllState(nco, accumulator, float(self.increments[-1]) if len(samples) else self.state.increment)

        return out
