"""
Theoretical Bounds

Closed-form loop figures (pull-in time, phase error variance bounds),
DE-BPSK error probability and the Monte-Carlo references they are checked
against.

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
from typing import Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfc
from scipy.stats import beta

from fsolink.lkio.report import BerEstimate
from fsolink.receiver.detector import detect_bits, differential_encode


def pull_in_time(delta_omega: float, xi: float, omega_n: float) -> float:
    """ Pull-in time of a second-order loop, 2 dw^2 / (xi wn^3).

    Parameters
    ----------
    delta_omega : float
        Initial angular frequency offset (rad/s).
    xi : float
        Damping factor.
    omega_n : float
        Natural angular frequency (rad/s).

    Returns
    -------
    float
        Pull-in time (s).
    """
    if xi <= 0 or omega_n <= 0:
        raise ValueError("Invalid loop: damping and natural frequency must be positive")
    return 2 * delta_omega ** 2 / (xi * omega_n ** 3)


def loop_variance_bounds(blt: float, esn0_linear: float) -> dict[str, float]:
    """ Phase error variance bounds of the loop (rad^2).

    Note
    ----
    crb: B_L.T / x.
    bpsk_as_written: crb . 2x / (2x + 1), below the CRB.
    bpsk_penalty: crb . (2x + 1) / 2x, the squaring-loss form.

    Parameters
    ----------
    blt : float
        Normalized loop bandwidth.
    esn0_linear : float
        Es/N0 (linear).

    Returns
    -------
    dict of str: float
        crb, bpsk_as_written, bpsk_penalty.
    """
    if blt <= 0 or esn0_linear <= 0:
        raise ValueError("Invalid bounds: bandwidth and SNR must be positive")

    crb = blt / esn0_linear
    ratio = 2 * esn0_linear / (2 * esn0_linear + 1)
    return {'crb': crb, 'bpsk_as_written': crb * ratio, 'bpsk_penalty': crb / ratio}


def q_function(x: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    return 0.5 * erfc(np.asarray(x) / np.sqrt(2))


def debpsk_ber_theory(esn0_linear: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """ Bit error probability of DE-BPSK with coherent detection, 2 Q(sqrt(2x)) (1 - Q(sqrt(2x))).
    """
    x = np.asarray(esn0_linear, dtype=float)
    if np.any(x < 0):
        raise ValueError("Invalid SNR: must be nonnegative")

    p = q_function(np.sqrt(2 * x))
    ber = 2 * p * (1 - p)
    return float(ber) if ber.ndim == 0 else ber


def binomial_ci(errors: int, bits: int, level: float = 0.95) -> tuple[float, float]:
    """ Clopper-Pearson interval of an error probability.

    Parameters
    ----------
    errors : int
        Number of errors.
    bits : int
        Number of trials.
    level : float, optional
        Confidence level.

    Returns
    -------
    tuple of float, float
        Lower and upper bounds.
    """
    if errors < 0 or bits < 0 or errors > bits:
        raise ValueError("Invalid counts")
    if not 0 < level < 1:
        raise ValueError("Invalid confidence level")
    if bits == 0:
        return 0.0, 1.0

    alpha = 1 - level
    low = float(beta.ppf(alpha / 2, errors, bits - errors + 1)) if errors > 0 else 0.0
    high = float(beta.ppf(1 - alpha / 2, errors + 1, bits - errors)) if errors < bits else 1.0
    return low, high


def ber_estimate(errors: int, bits: int, level: float = 0.95) -> BerEstimate:
    return BerEstimate(errors, bits, *binomial_ci(errors, bits, level))


def awgn_ber(esn0_linear: float, n_bits: int, seed: Optional[int] = 0, chunk_size: int = 1 << 22) -> BerEstimate:
    """ Monte-Carlo BER of DE-BPSK with perfect synchronization.

    Parameters
    ----------
    esn0_linear : float
        Es/N0 (linear).
    n_bits : int
        Number of bits.
    seed : int, optional
        Seed.
    chunk_size : int, optional
        Bits per chunk.

    Returns
    -------
    BerEstimate
        Errors, bits and 95% confidence interval.
    """
    if esn0_linear <= 0 or n_bits < 1:
        raise ValueError("Invalid AWGN run: SNR and bit count must be positive")

    rng = np.random.default_rng(seed)
    sigma = np.sqrt(1 / (2 * esn0_linear))

    errors, encoder, decoder = 0, 0, 0
    for start in range(0, n_bits, chunk_size):
        size = min(chunk_size, n_bits - start)
        bits = rng.integers(0, 2, size, dtype=np.uint8)
        phases, encoder = differential_encode(bits, encoder)
        received = np.cos(phases) + sigma * rng.standard_normal(size)
        decoded, decoder = detect_bits(received, decoder)
        errors += int(np.count_nonzero(decoded != bits))

    debug("[BER] AWGN x={:.4g}: {} errors / {} bits".format(esn0_linear, errors, n_bits))

    return ber_estimate(errors, n_bits)


def theory_snr_at_ber(target: float) -> float:
    """ Es/N0 (dB) at which the DE-BPSK theory reaches a BER.
    """
    if not 0 < target < 0.5:
        raise ValueError("Invalid target BER: must be in (0, 0.5)")
    return brentq(lambda snr_db: np.log(debpsk_ber_theory(10 ** (snr_db / 10))) - np.log(target), -30.0, 30.0)


def snr_penalty_at_ber(snr_db: Sequence[float], ber: Sequence[float], target: float = 1e-4) -> float:
    """ SNR penalty of a measured BER curve at a target BER.

    Parameters
    ----------
    snr_db : sequence of float
        Es/N0 points (dB), increasing.
    ber : sequence of float
        Measured BER at each point, zero values are ignored.
    target : float, optional
        Target BER.

    Returns
    -------
    float
        SNR of the measured curve at the target minus the theoretical SNR (dB).

    Raises
    ------
    ValueError
        The measured curve does not cross the target.
    """
    snr_db, ber = np.asarray(snr_db, dtype=float), np.asarray(ber, dtype=float)
    if snr_db.shape != ber.shape or len(snr_db) < 2:
        raise ValueError("Invalid curve: at least two points required")

    keep = ber > 0
    snr_db, log_ber = snr_db[keep], np.log10(ber[keep])
    log_target = np.log10(target)

    for index in range(len(snr_db) - 1):
        high, low = log_ber[index], log_ber[index + 1]
        if high >= log_target >= low and high != low:
            crossing = snr_db[index] + (high - log_target) / (high - low) * (snr_db[index + 1] - snr_db[index])
            return float(crossing - theory_snr_at_ber(target))

    raise ValueError("Invalid curve: target BER not crossed")
