"""
Metrics Report Module

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

import json
from dataclasses import asdict, dataclass, field
from typing import Optional

from fsolink.lkio.status import LockStatus

NO_LOCK = "no-lock"


@dataclass
class BerEstimate:
    """ Bit error rate with its 95% binomial confidence interval.
    """
    errors: int = 0
    bits: int = 0
    ci_low: float = 0.0
    ci_high: float = 1.0

    def __post_init__(self) -> None:
        if self.errors < 0 or self.bits < 0 or self.errors > self.bits:
            raise ValueError("Invalid BER counts")

    @property
    def estimate(self) -> float:
        return self.errors / self.bits if self.bits else float('nan')


@dataclass
class MetricsReport:
    """ Outcome of a receiver run.

    Attributes
    ----------
    esn0_db : float
        Average Es/N0 (dB).
    delta_f : float
        Carrier frequency offset (Hz).
    seed : int
        Seed of the run.
    status : LockStatus
        Lock status.
    acquisition_time_s : float, optional
        Acquisition time, None if the loop never locked.
    phase_error_variance_rad2 : float, optional
        Post-acquisition phase error variance.
    cycle_slips : int
        Cycle slips after acquisition.
    predicted : dict of str: float
        Theoretical values (crb, bpsk_as_written, bpsk_penalty, pull_in_time).
    ber : BerEstimate
        Post-acquisition bit error rate.
    mean_coupling_db : float, optional
        Mean coupling efficiency of the channel (dB).
    scintillation_index : float, optional
        Scintillation index of the coupled flux.
    """
    esn0_db: float
    delta_f: float
    seed: int
    status: LockStatus = LockStatus.NO_LOCK
    acquisition_time_s: Optional[float] = None
    phase_error_variance_rad2: Optional[float] = None
    cycle_slips: int = 0
    predicted: dict[str, float] = field(default_factory=dict)
    ber: BerEstimate = field(default_factory=BerEstimate)
    mean_coupling_db: Optional[float] = None
    scintillation_index: Optional[float] = None

    def __post_init__(self) -> None:
        if self.phase_error_variance_rad2 is not None and self.phase_error_variance_rad2 < 0:
            raise ValueError("Invalid report: negative variance")

    @property
    def locked(self) -> bool:
        return self.acquisition_time_s is not None

    def to_dict(self) -> dict:
        content = asdict(self)
        content['status'] = self.status.name
        content['acquisition_time_s'] = NO_LOCK if self.acquisition_time_s is None else self.acquisition_time_s
        content['ber']['estimate'] = self.ber.estimate
        return content

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, content: dict) -> MetricsReport:
        content = dict(content)
        content['status'] = LockStatus[content['status']]
        if content['acquisition_time_s'] == NO_LOCK:
            content['acquisition_time_s'] = None
        ber = dict(content['ber'])
        ber.pop('estimate', None)
        content['ber'] = BerEstimate(**ber)
        return cls(**content)

    @classmethod
    def from_json(cls, text: str) -> MetricsReport:
        return cls.from_dict(json.loads(text))
