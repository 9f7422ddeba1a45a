"""
Abstract Feedback Loop

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

from abc import ABC, abstractmethod

import numpy as np


class AbstractLoop(ABC):
    """ Abstract sample-rate feedback loop.

        Note
        ----
        Can be: AGC, DPLL
    """

    @abstractmethod
    def reset(self) -> None:
        """ Back to the initial state.
        """
        pass

    @abstractmethod
    def process(self, samples: np.ndarray) -> np.ndarray:
        """ Run the loop over a chunk of samples, the state is carried to the next chunk.

        Parameters
        ----------
        samples : numpy.ndarray
            Complex input samples.

        Returns
        -------
        numpy.ndarray
            Complex output samples.
        """
        pass
