"""
Field Dump Module

Binary format (.fsof, little-endian):
    magic "FSOF" | version u32 | n u32 | pitch f64 | wavelength f64
    then n x n complex64 values (row-major)

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

__author__ = "FSOLink developers"
__license__ = "GPLv3"
__version__ = "1.0"

from struct import calcsize, pack, unpack

import numpy as np

from fsolink.atmosphere.propagation import ComplexField

MAGIC = b'FSOF'
VERSION = 1
HEADER = '<4sIIdd'


def write_field(field: ComplexField, filename: str) -> None:
    """ Dump a field (.fsof format), amplitudes are stored in single precision.
    """
    with open(filename, 'wb') as fp:
        fp.write(pack(HEADER, MAGIC, VERSION, field.n, field.pitch_m, field.wavelength_m))
        fp.write(field.grid.astype('<c8').tobytes())


def read_field(filename: str) -> ComplexField:
    """ Load a field (.fsof format).

    Raises
    ------
    FileNotFoundError
        Field file not found.
    ValueError
        Bad magic, unsupported version or truncated payload.
    """
    with open(filename, 'rb') as fp:
        data = fp.read()

    size = calcsize(HEADER)
    if len(data) < size:
        raise ValueError("Invalid field file: truncated header")

    magic, version, n, pitch, wavelength = unpack(HEADER, data[:size])
    if magic != MAGIC or version != VERSION:
        raise ValueError("Invalid field file: bad magic or version")
    if len(data) != size + 8 * n * n:
        raise ValueError("Invalid field file: truncated payload")

    grid = np.frombuffer(data, dtype='<c8', offset=size).reshape(n, n).astype(complex)
    return ComplexField(grid, pitch, wavelength)
