"""
Zernike Module

Noll-indexed Zernike polynomials sampled on the discrete pupil, modal
decomposition and reconstruction.

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

from logging import debug
from math import factorial, isqrt, sqrt
from typing import Optional

import numpy as np

from fsolink.atmosphere.propagation import grid_coordinates, pupil_mask
from fsolink.lkio.status import NumericFailure, UnderResolvedPupilError

# Minimal number of pixels across the pupil
MIN_PUPIL_PIXELS = 16


def noll_to_zernike(j: int) -> tuple[int, int]:
    """ Radial order and azimuthal frequency of a Noll index.

    Note
    ----
    Even j carry the cosine terms (m > 0), odd j the sine terms (m < 0).

    Parameters
    ----------
    j : int
        Noll index (starts at 1).

    Returns
    -------
    tuple of int
        (n, m).
    """
    if j < 1:
        raise ValueError("Invalid Noll index: must be positive")

    n = (isqrt(8 * (j - 1) + 1) - 1) // 2
    p = j - n * (n + 1) // 2
    parity = n % 2
    m = 2 * ((p + parity) // 2) - parity

    if m != 0 and j % 2:
        m = -m

    return n, m


def radial_polynomial(n: int, m: int, rho: np.ndarray) -> np.ndarray:
    """ Zernike radial polynomial R_n^|m|.
    """
    m = abs(m)
    if (n - m) % 2:
        return np.zeros_like(rho)

    result = np.zeros_like(rho)
    for s in range((n - m) // 2 + 1):
        coefficient = (-1) ** s * factorial(n - s) / (factorial(s) * factorial((n + m) // 2 - s) * factorial((n - m) // 2 - s))
        result += coefficient * rho ** (n - 2 * s)
    return result


def _check_pupil(pitch: float, pupil_d: float) -> None:
    if pupil_d / pitch < MIN_PUPIL_PIXELS:
        raise UnderResolvedPupilError()


def zernike_mode(j: int, n: int, pitch: float, pupil_d: float) -> np.ndarray:
    """ Noll-normalized Zernike mode, zero outside the pupil.

    Parameters
    ----------
    j : int
        Noll index.
    n : int
        Grid size.
    pitch : float
        Pixel pitch (m).
    pupil_d : float
        Pupil diameter (m).

    Returns
    -------
    numpy.ndarray
        n x n mode map.

    Raises
    ------
    UnderResolvedPupilError
        Pupil smaller than 16 pixels across.
    """
    _check_pupil(pitch, pupil_d)

    radial, azimuthal = noll_to_zernike(j)
    x, y = grid_coordinates(n, pitch)
    rho, theta = np.hypot(x, y) / (pupil_d / 2), np.arctan2(y, x)

    if azimuthal == 0:
        mode = sqrt(radial + 1) * radial_polynomial(radial, 0, rho)
    elif azimuthal > 0:
        mode = sqrt(2 * (radial + 1)) * radial_polynomial(radial, azimuthal, rho) * np.cos(azimuthal * theta)
    else:
        mode = sqrt(2 * (radial + 1)) * radial_polynomial(radial, azimuthal, rho) * np.sin(-azimuthal * theta)

    return np.where(pupil_mask(n, pitch, pupil_d), mode, 0.0)


class ZernikeBasis:
    """ Zernike modes on the discrete pupil.

    Attributes
    ----------
    n_modes : int
        Number of modes J (Noll indices 1..J).
    n : int
        Grid size.
    pitch : float
        Pixel pitch (m).
    pupil_d : float
        Pupil diameter (m).
    mask : numpy.ndarray
        Pupil mask.
    matrix : numpy.ndarray
        Modes over the pupil pixels (pixels x J).
    gram : numpy.ndarray
        Pupil-averaged inner products (J x J).
    fit_matrix : numpy.ndarray
        Least-squares projector gram^-1 . matrix^T / pixels (J x pixels).
    """

    def __init__(self, n_modes: int, n: int, pitch: float, pupil_d: float) -> None:
        """ Initializer.

        Parameters
        ----------
        n_modes : int
            Number of modes.
        n : int
            Grid size.
        pitch : float
            Pixel pitch (m).
        pupil_d : float
            Pupil diameter (m).

        Raises
        ------
        NumericFailure
            Singular Gram matrix.
        """
        if n_modes < 1:
            raise ValueError("Invalid number of modes")
        _check_pupil(pitch, pupil_d)

        self.n_modes: int = n_modes
        self.n: int = n
        self.pitch: float = pitch
        self.pupil_d: float = pupil_d

        self.mask: np.ndarray = pupil_mask(n, pitch, pupil_d)
        self.matrix: np.ndarray = np.column_stack([zernike_mode(j, n, pitch, pupil_d)[self.mask] for j in range(1, n_modes + 1)])

        pixels = self.matrix.shape[0]
        self.gram: np.ndarray = self.matrix.T @ self.matrix / pixels

        if np.linalg.cond(self.gram) > 1e10:
            raise NumericFailure("singular Gram matrix")
        self.fit_matrix: np.ndarray = np.linalg.solve(self.gram, self.matrix.T / pixels)

        debug("[ZERNIKE] {} modes over {} pupil pixels, max |G - I| = {:.3e}".format(n_modes, pixels, self.gram_error()))

    def __len__(self) -> int:
        return self.n_modes

    def gram_error(self, n_modes: Optional[int] = None) -> float:
        """ Largest deviation of the (leading block of the) Gram matrix from identity.
        """
        size = self.n_modes if n_modes is None else n_modes
        return float(np.abs(self.gram[:size, :size] - np.eye(size)).max())

    def mode(self, j: int) -> np.ndarray:
        """ Mode map of Noll index j.
        """
        return self.expand(self.matrix[:, j - 1])

    def expand(self, values: np.ndarray) -> np.ndarray:
        """ Map pupil-pixel values back to the grid (zero outside).
        """
        grid = np.zeros((self.n, self.n))
        grid[self.mask] = values
        return grid

    def project(self, values: np.ndarray) -> np.ndarray:
        """ Coefficients of pupil-pixel values.
        """
        return self.fit_matrix @ values

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        """ Pupil-pixel values of coefficients.
        """
        return self.matrix @ coefficients


def modal_decompose(phase: np.ndarray, basis: ZernikeBasis) -> np.ndarray:
    """ Least-squares modal coefficients a_1..a_J of a phase map.

    Parameters
    ----------
    phase : numpy.ndarray
        n x n phase map (rad).
    basis : ZernikeBasis
        Basis sharing the grid geometry.

    Returns
    -------
    numpy.ndarray
        Coefficients (rad).
    """
    if phase.shape != (basis.n, basis.n):
        raise ValueError("Invalid phase map: grid mismatch")
    return basis.project(phase[basis.mask])


def modal_reconstruct(coefficients: np.ndarray, basis: ZernikeBasis) -> np.ndarray:
    """ Phase map of modal coefficients.

    Parameters
    ----------
    coefficients : numpy.ndarray
        Coefficients a_1..a_J (rad).
    basis : ZernikeBasis
        Basis.

    Returns
    -------
    numpy.ndarray
        n x n phase map, zero outside the pupil.
    """
    coefficients = np.asarray(coefficients, dtype=float)
    if coefficients.shape != (basis.n_modes,):
        raise ValueError("Invalid coefficients: expected {} values".format(basis.n_modes))
    return basis.expand(basis.synthesize(coefficients))
