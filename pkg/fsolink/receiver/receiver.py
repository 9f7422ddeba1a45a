"""
Receiver Chain

AGC, DPLL, lock detector, cycle-slip counter and differential detection
run chunk by chunk over a sample stream. Statistics are kept per block so
that the post-acquisition quantities (phase error variance, slips, BER)
can be computed once the acquisition time is known.

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
from logging import debug, info, warning
from math import pi, sqrt
from time import time
from typing import Iterable, Optional

import numpy as np
import pandas as pd
from numba import njit
from scipy.signal import lfilter, lfilter_zi

from fsolink.lkio.report import MetricsReport
from fsolink.lkio.status import LockStatus, NumericFailure
from fsolink.receiver.agc import Agc, signal_reference
from fsolink.receiver.bounds import ber_estimate
from fsolink.receiver.detector import detect_bits
from fsolink.receiver.dpll import Dpll, LoopGains, design_loop_gains, detector_code
from fsolink.receiver.synthesis import SampleChunk

# Samples per statistics block
BLOCK = 4096

# Smoothing of the unwrapped phase error before the slip decision
SLIP_SMOOTHING = 1e-3


@dataclass(frozen=True)
class ReceiverConfig:
    """ Receiver settings.

    Attributes
    ----------
    xi : float
        Damping factor.
    blt : float
        Normalized loop bandwidth.
    kd : float
        Phase detector gain.
    k0 : float
        NCO gain.
    g0 : float
        AGC loop gain.
    p_ref : float
        Signal power at the AGC output, the total reference is raised
        by the noise share at the Es/N0 of the run.
    detector : str
        'product' or 'map'.
    agc : bool
        AGC in front of the DPLL.
    lock_window : float
        Low-pass window of the frequency estimate (samples).
    lock_tolerance : float
        Lock tolerance on the frequency estimate (Hz).
    lock_hold : float
        Time the estimate must stay within tolerance (s).
    chunk_size : int
        Samples per processing chunk.
    dump_samples : int
        Leading samples kept for the sample dump.
    """
    xi: float = 1 / sqrt(2)
    blt: float = 5e-4
    kd: float = 1.0
    k0: float = 1.0
    g0: float = 0.1
    p_ref: float = 1.0
    detector: str = 'product'
    agc: bool = False
    lock_window: float = 1e4
    lock_tolerance: float = 1e6
    lock_hold: float = 1e-4
    chunk_size: int = 1 << 20
    dump_samples: int = 0

    def __post_init__(self) -> None:
        detector_code(self.detector)
        if self.lock_window < 1 or self.lock_tolerance <= 0 or self.lock_hold < 0:
            raise ValueError("Invalid lock detector settings")
        if self.chunk_size < BLOCK or self.chunk_size % BLOCK:
            raise ValueError("Invalid chunk size: must be a multiple of {}".format(BLOCK))

    def gains(self) -> LoopGains:
        return design_loop_gains(self.xi, self.blt, self.kd, self.k0)


@njit(cache=True)
def lock_block(increments: np.ndarray, scale: float, target: float, tolerance: float, alpha: float, hold: int, start: int, f_lp: float, inside_since: int, acquired_at: int, f_out: np.ndarray) -> tuple[float, int, int]:
    for k in range(increments.shape[0]):
        f_lp += alpha * (increments[k] * scale - f_lp)
        f_out[k] = f_lp
        if abs(f_lp - target) < tolerance:
            if inside_since < 0:
                inside_since = start + k
            if acquired_at < 0 and start + k - inside_since + 1 >= hold:
                acquired_at = inside_since
        else:
            inside_since = -1
    return f_lp, inside_since, acquired_at


class LockDetector:
    """ Frequency lock detector.

    Note
    ----
    The NCO frequency estimate is low-passed over `window` samples, the loop
    is declared locked when the estimate stays within `tolerance` of the
    expected offset during `hold` samples. The acquisition index is the
    first sample of that interval.

    Attributes
    ----------
    acquired_at : int, optional
        Acquisition index, None before lock.
    """

    def __init__(self, symbol_rate: float, delta_f: float, window: float = 1e4, tolerance: float = 1e6, hold: float = 1e-4) -> None:
        self.scale: float = symbol_rate / (2 * pi)
        self.target: float = delta_f
        self.tolerance: float = tolerance
        self.alpha: float = 1 / window
        self.hold: int = max(1, int(round(hold * symbol_rate)))

        self.f_lp: float = 0.0
        self._inside_since: int = -1
        self._acquired_at: int = -1
        self._index: int = 0

    @property
    def acquired_at(self) -> Optional[int]:
        return self._acquired_at if self._acquired_at >= 0 else None

    def process(self, increments: np.ndarray) -> np.ndarray:
        """ Low-passed frequency estimate (Hz) of a chunk of NCO increments.
        """
        f_out = np.empty(len(increments))
        self.f_lp, self._inside_since, self._acquired_at = lock_block(increments, self.scale, self.target, self.tolerance, self.alpha, self.hold, self._index, self.f_lp, self._inside_since, self._acquired_at, f_out)
        self._index += len(increments)
        return f_out


def wrap_half_turn(phase: np.ndarray) -> np.ndarray:
    """ Wrap modulo pi to [-pi/2, pi/2].
    """
    return phase - pi * np.round(phase / pi)


class SlipCounter:
    """ Cycle slips of the phase error modulo pi.

    Note
    ----
    The wrapped error is unwrapped, low-passed and quantized to the
    nearest multiple of pi; every change of that branch is a slip.

    Attributes
    ----------
    slips : list of int
        Sample indices of the slips.
    """

    def __init__(self, smoothing: float = SLIP_SMOOTHING) -> None:
        self._b: np.ndarray = np.array([smoothing])
        self._a: np.ndarray = np.array([1.0, smoothing - 1.0])
        self._zi: Optional[np.ndarray] = None
        self._previous: float = 0.0
        self._unwrapped: float = 0.0
        self._branch: int = 0
        self._index: int = 0
        self.slips: list[int] = []

    def process(self, error: np.ndarray) -> None:
        if not len(error):
            return

        if self._zi is None:
            self._previous = self._unwrapped = float(error[0])
            self._zi = lfilter_zi(self._b, self._a) * self._unwrapped

        steps = wrap_half_turn(np.diff(np.concatenate(([self._previous], error))))
        unwrapped = self._unwrapped + np.cumsum(steps)
        smoothed, self._zi = lfilter(self._b, self._a, unwrapped, zi=self._zi)

        branches = np.round(smoothed / pi).astype(np.int64)
        changes = np.nonzero(np.diff(np.concatenate(([self._branch], branches))))[0]
        self.slips.extend((self._index + changes).tolist())

        self._previous, self._unwrapped, self._branch = float(error[-1]), float(unwrapped[-1]), int(branches[-1])
        self._index += len(error)


def count_cycle_slips(phase_error: np.ndarray, start: int = 0, smoothing: float = SLIP_SMOOTHING) -> int:
    """ Number of cycle slips of a phase error sequence.

    Parameters
    ----------
    phase_error : numpy.ndarray
        Phase error (rad), any branch.
    start : int, optional
        Slips before this index are ignored (acquisition).
    smoothing : float, optional
        Low-pass coefficient.

    Returns
    -------
    int
        Number of pi-branch changes at or after `start`.
    """
    counter = SlipCounter(smoothing)
    counter.process(wrap_half_turn(np.asarray(phase_error, dtype=float)))
    return sum(1 for index in counter.slips if index >= start)


@dataclass
class ReceiverRun:
    """ Outcome of a receiver run.

    Attributes
    ----------
    report : MetricsReport
        Lock status, acquisition, variance, slips and BER.
    traces : pandas.DataFrame
        Per-block traces: t_s, f_est_hz, phase_error_rad, agc_in_power,
        agc_out_power.
    samples : pandas.DataFrame, optional
        Leading samples: k, re, im, nco_phase, f_est, true_phase.
    """
    report: MetricsReport
    traces: pd.DataFrame
    samples: Optional[pd.DataFrame] = None


class Receiver:
    """ AGC, DPLL and differential detector.

    Attributes
    ----------
    config : ReceiverConfig
        Receiver settings.
    gains : LoopGains
        Loop gains.
    symbol_rate : float
        Symbol rate (Bd).
    delta_f : float
        Expected frequency offset, target of the lock detector (Hz).
    """

    def __init__(self, config: ReceiverConfig, symbol_rate: float, delta_f: float) -> None:
        self.config: ReceiverConfig = config
        self.gains: LoopGains = config.gains()
        self.symbol_rate: float = symbol_rate
        self.delta_f: float = delta_f

    def run(self, stream: Iterable[SampleChunk], esn0_db: float = float('nan'), seed: int = 0) -> ReceiverRun:
        """ Process a whole stream.

        Parameters
        ----------
        stream : iterable of SampleChunk
            Received samples with their ground truth.
        esn0_db : float, optional
            Es/N0 of the stream, recorded in the report.
        seed : int, optional
            Seed of the stream, recorded in the report.

        Returns
        -------
        ReceiverRun
            Report and traces.

        Raises
        ------
        NumericFailure
            Non-finite loop state.
        """
        config = self.config
        agc = Agc(config.g0, signal_reference(config.p_ref, esn0_db)) if config.agc else None
        dpll = Dpll(self.gains, config.detector)
        lock = LockDetector(self.symbol_rate, self.delta_f, config.lock_window, config.lock_tolerance, config.lock_hold)
        slips = SlipCounter()

        blocks: dict[str, list] = {key: [] for key in ('start', 'count', 'sum', 'sum_sq', 'errors', 'f_est', 'error', 'agc_in', 'agc_out')}
        dumps, decoder, n_samples = [], 0, 0
        start_time = time()

        for chunk in stream:
            samples = chunk.samples
            scaled = agc.process(samples) if agc is not None else samples
            derotated = dpll.process(scaled)

            if not np.isfinite(dpll.state.nco_phase) or not np.isfinite(dpll.state.accumulator):
                raise NumericFailure("non-finite DPLL state at sample {}".format(chunk.start + len(chunk)))

            f_lp = lock.process(dpll.increments)
            error = wrap_half_turn(dpll.nco - chunk.true_phase)
            slips.process(error)

            decoded, decoder = detect_bits(derotated, decoder)
            wrong = (decoded != chunk.bits)

            for offset in range(0, len(chunk), BLOCK):
                window = slice(offset, offset + BLOCK)
                blocks['start'].append(chunk.start + offset)
                blocks['count'].append(len(error[window]))
                blocks['sum'].append(float(error[window].sum()))
                blocks['sum_sq'].append(float(np.dot(error[window], error[window])))
                blocks['errors'].append(int(np.count_nonzero(wrong[window])))
                blocks['f_est'].append(float(f_lp[window][-1]))
                blocks['error'].append(float(error[window][-1]))
                blocks['agc_in'].append(float(np.mean(np.abs(samples[window]) ** 2)))
                blocks['agc_out'].append(float(np.mean(np.abs(scaled[window]) ** 2)))

            if n_samples < config.dump_samples:
                keep = min(len(chunk), config.dump_samples - n_samples)
                dumps.append(pd.DataFrame({'k': np.arange(chunk.start, chunk.start + keep), 're': samples[:keep].real, 'im': samples[:keep].imag, 'nco_phase': dpll.nco[:keep], 'f_est': dpll.increments[:keep] * lock.scale, 'true_phase': chunk.true_phase[:keep]}))

            n_samples += len(chunk)
            debug("[DPLL] {} samples, f_est {:.4g} Hz".format(n_samples, lock.f_lp))

        if not n_samples:
            raise ValueError("Invalid stream: empty")

        table = pd.DataFrame(blocks)
        acquired_at = lock.acquired_at
        report = MetricsReport(esn0_db, self.delta_f, seed)

        if acquired_at is None:
            warning("[DPLL] No lock after {} samples".format(n_samples))
            report.status = LockStatus.NO_LOCK
        else:
            report.acquisition_time_s = acquired_at / self.symbol_rate
            # steady state starts when the lock is declared
            settled_at = acquired_at + lock.hold
            retained = table[table['start'] >= settled_at]
            count = int(retained['count'].sum())
            if count:
                mean = retained['sum'].sum() / count
                report.phase_error_variance_rad2 = max(0.0, float(retained['sum_sq'].sum() / count - mean ** 2))
            report.ber = ber_estimate(int(retained['errors'].sum()), count)
            report.cycle_slips = sum(1 for index in slips.slips if index >= settled_at)
            report.status = LockStatus.UNSTABLE if report.cycle_slips else LockStatus.LOCKED
            info("[DPLL] Locked after {:.4g} ms, {} slips".format(report.acquisition_time_s * 1e3, report.cycle_slips))

        debug("[DPLL] {} samples in {:.2f} s".format(n_samples, time() - start_time))

        traces = pd.DataFrame({'t_s': table['start'] / self.symbol_rate, 'f_est_hz': table['f_est'], 'phase_error_rad': table['error'], 'agc_in_power': table['agc_in'], 'agc_out_power': table['agc_out']})
        return ReceiverRun(report, traces, pd.concat(dumps, ignore_index=True) if dumps else None)
