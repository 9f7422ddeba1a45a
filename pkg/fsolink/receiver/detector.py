"""
Differential Encoding and Symbol Detection

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

import numpy as np


def differential_encode(bits: np.ndarray, previous: int = 0) -> tuple[np.ndarray, int]:
    """ Differential encoding d(k) = d(k-1) xor b(k).

    Parameters
    ----------
    bits : numpy.ndarray
        Data bits in {0, 1}.
    previous : int, optional
        Encoder state d(-1).

    Returns
    -------
    tuple of numpy.ndarray, int
        Phase symbols pi.d(k) and the last encoder state.
    """
    bits = np.asarray(bits, dtype=np.uint8)
    if np.any(bits > 1):
        raise ValueError("Invalid bits: must be 0 or 1")
    if not len(bits):
        return np.empty(0), previous

    encoded = np.bitwise_xor.accumulate(np.concatenate(([previous], bits)).astype(np.uint8))[1:]
    return np.pi * encoded, int(encoded[-1])


def differential_decode(decisions: np.ndarray, previous: int = 0) -> tuple[np.ndarray, int]:
    """ Differential decoding b(k) = d(k) xor d(k-1).

    Returns
    -------
    tuple of numpy.ndarray, int
        Bits and the last decision, to chain chunks.
    """
    decisions = np.asarray(decisions, dtype=np.uint8)
    if not len(decisions):
        return np.empty(0, dtype=np.uint8), previous

    delayed = np.concatenate(([previous], decisions[:-1])).astype(np.uint8)
    return np.bitwise_xor(decisions, delayed), int(decisions[-1])


def hard_decisions(derotated: np.ndarray) -> np.ndarray:
    """ d(k) = 1 if Re < 0.
    """
    return (np.real(derotated) < 0).astype(np.uint8)


def detect_bits(derotated: np.ndarray, previous: int = 0) -> tuple[np.ndarray, int]:
    """ Hard decision then differential decoding.

    Parameters
    ----------
    derotated : numpy.ndarray
        Derotated samples, one per symbol.
    previous : int, optional
        Last decision of the previous chunk.

    Returns
    -------
    tuple of numpy.ndarray, int
        Decoded bits and the last decision.
    """
    return differential_decode(hard_decisions(derotated), previous)
