"""
Automatic Gain Control Module

Feedback AGC with exponential gain characteristic: the output power error
e(k) = |s_agc(k)|^2 - P_ref drives a first-order integrator v, and the
gain is g(k) = exp(-v(k) / 2).

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

from dataclasses import dataclass, replace
from logging import warning
from math import exp, isfinite

import numpy as np
from numba import njit

from fsolink.receiver.abstractloop import AbstractLoop

# Overflow guard of the integrator
V_LIMIT = 700.0


def signal_reference(p_ref: float, esn0_db: float) -> float:
    """ Total output power that leaves the signal at power `p_ref`.

    Note
    ----
    The AGC holds signal plus noise at its reference, at Es/N0 = x the
    signal share is x / (1 + x). The reference is raised by (1 + x) / x
    so that the DPLL sees the detector gain it was designed with. An
    unknown or infinite Es/N0 leaves `p_ref` unchanged.

    Parameters
    ----------
    p_ref : float
        Signal power expected by the DPLL.
    esn0_db : float
        Es/N0 of the stream (dB).

    Returns
    -------
    float
        AGC reference power.
    """
    if not isfinite(esn0_db):
        return p_ref
    return p_ref * (1 + 10 ** (-esn0_db / 10))


@njit(cache=True)
def agc_update(v: float, re: float, im: float, g0: float, p_ref: float) -> tuple[float, float, float, bool]:
    """ One AGC sample, the gain of the current state is applied first.
    """
    g = np.exp(-v / 2)
    out_re, out_im = g * re, g * im
    v = v + g0 * (out_re * out_re + out_im * out_im - p_ref)

    clamped = False
    if v > V_LIMIT:
        v, clamped = V_LIMIT, True
    elif v < -V_LIMIT:
        v, clamped = -V_LIMIT, True

    return v, out_re, out_im, clamped


@njit(cache=True)
def agc_block(samples: np.ndarray, v: float, g0: float, p_ref: float, out: np.ndarray) -> tuple[float, int]:
    clamps = 0
    for k in range(samples.shape[0]):
        v, re, im, clamped = agc_update(v, samples[k].real, samples[k].imag, g0, p_ref)
        out[k] = complex(re, im)
        if clamped:
            clamps += 1
    return v, clamps


@dataclass(frozen=True)
class AgcState:
    """ AGC state.

    Attributes
    ----------
    v : float
        Integrator state.
    g0 : float
        Loop gain.
    p_ref : float
        Reference power.
    """
    v: float = 0.0
    g0: float = 0.1
    p_ref: float = 1.0

    @property
    def gain(self) -> float:
        return exp(-self.v / 2)


def agc_step(state: AgcState, sample: complex) -> tuple[AgcState, complex]:
    """ Pure AGC transition.

    Parameters
    ----------
    state : AgcState
        Current state.
    sample : complex
        Input sample.

    Returns
    -------
    tuple of AgcState, complex
        Next state and scaled sample.
    """
    v, re, im, _ = agc_update(state.v, sample.real, sample.imag, state.g0, state.p_ref)
    return replace(state, v=v), complex(re, im)


class Agc(AbstractLoop):
    """ Chunked AGC.

    Attributes
    ----------
    state : AgcState
        Current state.
    clamps : int
        Number of integrator clamps so far.
    """

    def __init__(self, g0: float = 0.1, p_ref: float = 1.0, v: float = 0.0) -> None:
        if g0 <= 0 or p_ref <= 0:
            raise ValueError("Invalid AGC: gain and reference power must be positive")

        self._initial: AgcState = AgcState(v, g0, p_ref)
        self.state: AgcState = self._initial
        self.clamps: int = 0

    def reset(self) -> None:
        self.state = self._initial
        self.clamps = 0

    def process(self, samples: np.ndarray) -> np.ndarray:
        out = np.empty_like(samples, dtype=complex)
        v, clamps = agc_block(samples.astype(complex), self.state.v, self.state.g0, self.state.p_ref, out)
        self.state = replace(self.state, v=v)

        if clamps:
            warning("[AGC] Integrator clamped on {} samples".format(clamps))
        self.clamps += clamps

        return out
