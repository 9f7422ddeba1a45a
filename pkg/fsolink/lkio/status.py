"""
Status Module

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

from enum import Enum, IntEnum


class LockStatus(Enum):
    """ Lock status enum.

        Note
        ----
        LOCKED -> acquisition detected, no cycle slip afterwards
        UNSTABLE -> acquisition detected, cycle slips afterwards
        NO_LOCK -> no acquisition within the run
    """
    LOCKED = 1
    UNSTABLE = 2
    NO_LOCK = 3


class ExitCode(IntEnum):
    """ Process exit codes of the command line interface.
    """
    OK = 0
    USAGE = 1
    NUMERIC_FAILURE = 2
    NO_LOCK = 3


class FsoLinkError(Exception):
    """ Base class of the domain errors.
    """


class NoTurbulenceError(FsoLinkError):
    """ The turbulence integral along the line of sight vanishes.
    """

    def __init__(self, message: str = "no turbulence") -> None:
        super().__init__(message)


class ScreenExhaustedError(FsoLinkError):
    """ A frozen-flow shift goes beyond the generated strip.
    """

    def __init__(self, message: str = "screen exhausted") -> None:
        super().__init__(message)


class UnderResolvedPupilError(FsoLinkError):
    """ The pupil spans too few pixels for modal analysis.
    """

    def __init__(self, message: str = "under-resolved pupil") -> None:
        super().__init__(message)


class SampleBudgetError(FsoLinkError):
    """ A run asks for more samples than the configured budget.
    """


class NumericFailure(FsoLinkError):
    """ A computation produced non-finite or degenerate values.
    """


class WorkerError(FsoLinkError):
    """ A worker process died before returning its result.
    """
