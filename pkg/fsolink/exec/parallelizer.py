"""
Parallelizer for Independent Runs

Sweeps run every (SNR, seed) point in its own process and collect the
results through a queue; a failing or timed-out point does not stop the
others. Channel generation maps a function over frames with a pool of
forked workers sharing the screens.

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

from concurrent.futures import ProcessPoolExecutor
from concurrent.futures.process import BrokenProcessPool
from dataclasses import dataclass, field
from itertools import repeat
from logging import info, warning
from multiprocessing import get_context
from queue import Empty
from time import time
from typing import Any, Callable, Optional, Sequence

from fsolink.exec.utils import STOP, send_signal_pids, worker_count
from fsolink.lkio.status import WorkerError

# Objects inherited by forked pool workers
_SHARED: dict[str, Any] = {}

# Result queue polling period (s)
POLL_INTERVAL = 0.5


@dataclass
class Job:
    """ Independent unit of work.

    Attributes
    ----------
    name : str
        Label of the job (e.g. "snr=8.0 seed=1").
    function : callable
        Module-level function to call.
    args : tuple
        Positional arguments.
    """
    name: str
    function: Callable[..., Any]
    args: tuple = field(default_factory=tuple)


@dataclass
class JobResult:
    """ Result of a job, or the error that stopped it.
    """
    name: str
    value: Any = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


class Parallelizer:
    """ Helper to run independent jobs in parallel.

    Attributes
    ----------
    jobs : list of Job
        Jobs to run.
    processes : int
        Number of simultaneous processes.
    computation_time : float
        Computation time.
    """

    def __init__(self, jobs: list[Job], processes: Optional[int] = None) -> None:
        """ Initializer.

        Parameters
        ----------
        jobs : list of Job
            Jobs to run.
        processes : int, optional
            Number of simultaneous processes (one per CPU by default).
        """
        self.jobs: list[Job] = jobs
        self.processes: int = worker_count(processes, len(jobs))
        self.computation_time: float = 0

    @staticmethod
    def execute(index: int, job: Job, results) -> None:
        """ Job runner, the outcome goes through the results queue.

        Parameters
        ----------
        index : int
            Index of the job.
        job : Job
            Job to run.
        results : Queue of tuple of int, Any, str
            Queue of (index, value, error).
        """
        try:
            results.put((index, job.function(*job.args), None))
        except Exception as error:
            results.put((index, None, "{}: {}".format(type(error).__name__, error)))

    def run(self, timeout: Optional[float] = None) -> list[JobResult]:
        """ Run the jobs, `processes` at a time.

        Parameters
        ----------
        timeout : float, optional
            Time limit of each batch (s).

        Returns
        -------
        list of JobResult
            One result per job, in job order.
        """
        start_time = time()
        outcomes: list[JobResult] = [JobResult(job.name, error="not run") for job in self.jobs]

        context = get_context('fork')
        for first in range(0, len(self.jobs), self.processes):
            batch = list(range(first, min(first + self.processes, len(self.jobs))))
            results = context.Queue()
            processes = [context.Process(target=self.execute, args=(index, self.jobs[index], results)) for index in batch]
            for proc in processes:
                proc.start()

            self.handle(batch, processes, results, outcomes, timeout)

        self.computation_time = time() - start_time
        info("[PARALLELIZER] {} jobs in {:.1f} s".format(len(self.jobs), self.computation_time))

        return outcomes

    def handle(self, batch: list[int], processes: list, results, outcomes: list[JobResult], timeout: Optional[float]) -> None:
        """ Collect the results of a batch, stop the processes that exceed the time limit.

        Note
        ----
        A process found dead on two consecutive polls without a result
        (killed, out of memory) fails its job with its exit code.
        """
        start_time = time()
        pending = set(batch)
        suspects: set[int] = set()

        # Results are drained before joining to let the processes flush the queue
        while pending:
            if timeout is not None and time() - start_time >= timeout:
                break
            try:
                index, value, error = results.get(timeout=POLL_INTERVAL)
            except Empty:
                for index, proc in zip(batch, processes):
                    if index not in pending or proc.exitcode is None:
                        continue
                    if index in suspects:
                        pending.discard(index)
                        outcomes[index] = JobResult(self.jobs[index].name, error="worker died (exit code {})".format(proc.exitcode))
                        warning("[PARALLELIZER] {} died with exit code {}".format(self.jobs[index].name, proc.exitcode))
                    suspects.add(index)
                continue

            pending.discard(index)
            outcomes[index] = JobResult(self.jobs[index].name, value, error)
            if error is not None:
                warning("[PARALLELIZER] {} failed: {}".format(self.jobs[index].name, error))

        for index in pending:
            outcomes[index] = JobResult(self.jobs[index].name, error="timeout")
            warning("[PARALLELIZER] {} timed out".format(self.jobs[index].name))

        self.stop(processes)

    @staticmethod
    def stop(processes: list) -> None:
        """ Stop the remaining processes.
        """
        send_signal_pids([proc.pid for proc in processes if proc.is_alive()], STOP)
        for proc in processes:
            proc.join()


def _call_shared(function: Callable[..., Any], item: Any) -> Any:
    return function(_SHARED['payload'], item)


def parallel_map(function: Callable[[Any, Any], Any], items: Sequence[Any], shared: Any, processes: Optional[int] = None) -> list[Any]:
    """ Map `function(shared, item)` over items with forked workers.

    Note
    ----
    The shared payload is inherited by the workers at fork time and is
    never pickled.

    Parameters
    ----------
    function : callable
        Module-level function of (shared, item).
    items : sequence
        Items, results keep their order.
    shared : Any
        Read-only payload.
    processes : int, optional
        Number of workers.

    Returns
    -------
    list
        function(shared, item) for each item.

    Raises
    ------
    WorkerError
        A worker process died (killed, out of memory).
    """
    count = worker_count(processes, len(items))
    if count == 1:
        return [function(shared, item) for item in items]

    _SHARED['payload'] = shared
    try:
        with ProcessPoolExecutor(max_workers=count, mp_context=get_context('fork')) as pool:
            return list(pool.map(_call_shared, repeat(function), items, chunksize=max(1, len(items) // (4 * count))))
    except BrokenProcessPool as error:
        raise WorkerError("a worker process died: {}".format(error)) from error
    finally:
        _SHARED.clear()
