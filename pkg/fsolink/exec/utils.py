"""
Utils to Manage Worker Processes

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

import signal
from os import cpu_count, getpid, kill
from typing import Optional

STOP = signal.SIGTERM
KILL = signal.SIGKILL


def send_signal_pids(pids: list[Optional[int]], signal_to_send: signal.Signals) -> None:
    """ Send a signal to a list of processes
        (except the current process).

    Parameters
    ----------
    pids : list of int
        List of processes, None entries (never started) are skipped.
    signal_to_send : Signals
        Signal to send.
    """
    current_pid = getpid()

    for pid in pids:
        if pid is None or pid == current_pid:
            continue

        try:
            kill(pid, signal_to_send)
        except OSError:
            pass


def worker_count(requested: Optional[int] = None, jobs: Optional[int] = None) -> int:
    """ Number of worker processes, at most one per job and per CPU.
    """
    count = requested if requested else (cpu_count() or 1)
    if jobs is not None:
        count = min(count, jobs)
    return max(1, count)
