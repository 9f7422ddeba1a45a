"""
Experiment Runners

Channel generation, single receiver runs, SNR sweeps and the derived
experiments (critical SNR, phase noise neutrality).
Library code: every result is returned, the CLI owns the files.

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

from dataclasses import dataclass, field, replace
from logging import info
from math import ceil, hypot, isfinite, pi
from typing import Optional, Sequence

import numpy as np
import pandas as pd

from fsolink.atmosphere.profile import Cn2Profile, build_profile, fried_parameter, greenwood_frequency, isoplanatic_angle, rytov_index
from fsolink.atmosphere.propagation import check_aliasing, downlink, irradiance_scintillation
from fsolink.atmosphere.screens import ScreenBank
from fsolink.exec.parallelizer import Job, Parallelizer, parallel_map
from fsolink.lkio.channel import ChannelSeries
from fsolink.lkio.config import ExperimentConfig
from fsolink.lkio.report import MetricsReport
from fsolink.lkio.status import LockStatus, NoTurbulenceError
from fsolink.optics.aoloop import AoLoopConfig, rejection_bandwidth, residual_statistics, run_modal_loop
from fsolink.optics.coupling import CouplingStatistics, coupling_statistics, gaussian_lo, reference_coupling, series_from_couplings
from fsolink.optics.zernike import ZernikeBasis
from fsolink.receiver.bounds import debpsk_ber_theory, loop_variance_bounds, pull_in_time
from fsolink.receiver.receiver import Receiver, ReceiverConfig, ReceiverRun, wrap_half_turn
from fsolink.receiver.synthesis import synthesize_samples

# Leading samples of the optional sample dump
DUMP_SAMPLES = 100_000

SWEEP_COLUMNS = ['snr_db', 'seed', 'status', 'acquisition_time_s', 'variance', 'crb', 'bpsk_as_written', 'bpsk_penalty', 'slips', 'errors', 'bits', 'ber', 'ber_low', 'ber_high', 'ber_theory', 'error']


def scenario_profile(config: ExperimentConfig) -> Cn2Profile:
    """ Layered profile of the scenario.
    """
    scenario = config.scenario
    profile = build_profile(scenario.c0, scenario.v_rms, scenario.v_ground, scenario.v_tropopause, scenario.n_layers, scenario.h_max, scenario.layer_placement, config.link.seed)
    return profile if scenario.turbulence_scale == 1 else profile.scaled(scenario.turbulence_scale)


def ao_loop_config(config: ExperimentConfig, enabled: bool = True) -> AoLoopConfig:
    ao = config.ao
    return AoLoopConfig(ao.frame_rate, ao.delay_frames, ao.integrator_gain, ao.n_modes, ao.correct_piston, enabled)


def receiver_config(config: ExperimentConfig, series: Optional[ChannelSeries] = None) -> ReceiverConfig:
    """ Receiver settings, the AGC only runs over a fading series.
    """
    receiver = config.receiver
    agc = receiver.agc and series is not None and series.fading
    return ReceiverConfig(receiver.xi, receiver.blt, receiver.kd, receiver.k0, receiver.g0, receiver.p_ref, receiver.detector, agc, receiver.lock_window, receiver.lock_tolerance, receiver.lock_hold, receiver.chunk_size, DUMP_SAMPLES if config.outputs.dump_samples else 0)


def constant_series(config: ExperimentConfig, duration: Optional[float] = None) -> ChannelSeries:
    """ Turbulence-free channel covering a receiver run.
    """
    duration = config.link.duration if duration is None else duration
    return ChannelSeries.constant(ceil(duration * config.ao.frame_rate) + 1, config.ao.frame_rate)


def link_figures(config: ExperimentConfig, profile: Optional[Cn2Profile] = None) -> dict[str, float]:
    """ Closed-form figures of the link: turbulence, AO loop and DPLL.

    Parameters
    ----------
    config : ExperimentConfig
        Configuration.
    profile : Cn2Profile, optional
        Profile, built from the configuration if not given.

    Returns
    -------
    dict of str: float
        Figures, NaN when undefined (no turbulence).
    """
    scenario, link = config.scenario, config.link
    profile = scenario_profile(config) if profile is None else profile
    elevation = config.elevation_rad
    gains = receiver_config(config).gains()

    figures = {'rytov_index': rytov_index(profile, scenario.wavelength, elevation)}
    try:
        figures['fried_parameter_m'] = fried_parameter(profile, scenario.wavelength, elevation)
        figures['isoplanatic_angle_rad'] = isoplanatic_angle(profile, scenario.wavelength, elevation)
    except NoTurbulenceError:
        figures['fried_parameter_m'] = figures['isoplanatic_angle_rad'] = float('nan')

    figures['greenwood_frequency_hz'] = greenwood_frequency(profile, scenario.wavelength, elevation)
    figures['rejection_bandwidth_hz'] = rejection_bandwidth(config.ao.frame_rate, config.ao.integrator_gain, config.ao.delay_frames)
    figures['k1'], figures['k2'], figures['wnt'] = gains.k1, gains.k2, gains.wnt
    figures['omega_n_rad_s'] = gains.wnt * link.symbol_rate
    figures['pull_in_time_s'] = pull_in_time(2 * pi * link.delta_f, gains.xi, gains.wnt * link.symbol_rate)

    return figures


@dataclass
class ChannelRun:
    """ Channel series of a scenario and their statistics.

    Attributes
    ----------
    series_ao : ChannelSeries, optional
        Series with AO correction, None when the AO is off.
    series_noao : ChannelSeries
        Series without correction.
    statistics : dict of str: CouplingStatistics
        Statistics per variant ('ao', 'noao').
    scintillation_index : float
        Empirical pupil-plane scintillation index.
    residuals : pandas.DataFrame
        Per-frame residual phase statistics of the AO loop.
    figures : dict of str: float
        Closed-form figures of the scenario.
    """
    series_ao: Optional[ChannelSeries]
    series_noao: ChannelSeries
    statistics: dict[str, CouplingStatistics] = field(default_factory=dict)
    scintillation_index: float = float('nan')
    residuals: Optional[pd.DataFrame] = None
    figures: dict[str, float] = field(default_factory=dict)

    def summary(self) -> pd.DataFrame:
        """ Statistics of every variant in one table.
        """
        tables = []
        for variant, statistics in self.statistics.items():
            table = statistics.to_frame()
            table.insert(0, 'variant', variant)
            tables.append(table)
        extra = pd.DataFrame([{'variant': 'pupil', 'quantity': 'scintillation_index', 'value': self.scintillation_index}] + [{'variant': 'theory', 'quantity': key, 'value': value} for key, value in self.figures.items()])
        return pd.concat(tables + [extra], ignore_index=True)


def _propagate_frame(shared: tuple, index: int) -> tuple[np.ndarray, np.ndarray]:
    bank, mask, frame_rate = shared
    received, phase = downlink(bank, index / frame_rate)
    return received.grid[mask].astype(np.complex64), phase[mask]


def run_channel(config: ExperimentConfig, ao: bool = True, processes: Optional[int] = None) -> ChannelRun:
    """ Generate the channel series of a scenario.

    Note
    ----
    Fields and turbulent phases are propagated in parallel over frames,
    then the AO loop runs over the modal coefficients and the coupling
    with the local oscillator is taken with and without correction.

    Parameters
    ----------
    config : ExperimentConfig
        Configuration.
    ao : bool, optional
        Produce the corrected series.
    processes : int, optional
        Number of worker processes.

    Returns
    -------
    ChannelRun
        Series, statistics and figures.
    """
    scenario = config.scenario
    loop = ao_loop_config(config, ao)
    n_frames = int(round(config.link.channel_duration * loop.frame_rate_hz))
    if n_frames < max(2, loop.delay_frames):
        raise ValueError("Invalid channel duration: too few frames")

    profile = scenario_profile(config)
    bank = ScreenBank(profile, scenario.grid_n, scenario.grid_pitch, scenario.wavelength, config.elevation_rad, (n_frames - 1) / loop.frame_rate_hz, scenario.outer_scale, scenario.transverse_velocity, scenario.satellite_altitude, config.link.seed)
    check_aliasing(bank)
    basis = ZernikeBasis(loop.n_modes, scenario.grid_n, scenario.grid_pitch, scenario.aperture)

    info("[CHANNEL] RUNNING {} frames".format(n_frames))
    frames = parallel_map(_propagate_frame, range(n_frames), (bank, basis.mask, loop.frame_rate_hz), processes)
    fields = np.array([pupil for pupil, _ in frames])
    phases = np.array([phase for _, phase in frames])

    lo = gaussian_lo(scenario.grid_n, scenario.grid_pitch, scenario.aperture, wavelength=scenario.wavelength)
    lo_pupil = np.conj(lo.grid[basis.mask]) * scenario.grid_pitch ** 2
    reference = reference_coupling(lo, scenario.aperture)

    series_noao = series_from_couplings(fields @ lo_pupil, reference, loop.frame_rate_hz)
    run = ChannelRun(None, series_noao)
    run.statistics['noao'] = coupling_statistics(series_noao)

    commands = run_modal_loop(phases @ basis.fit_matrix.T, loop)
    corrections = commands @ basis.matrix.T
    if ao:
        run.series_ao = series_from_couplings((fields * np.exp(-1j * corrections)) @ lo_pupil, reference, loop.frame_rate_hz)
        run.statistics['ao'] = coupling_statistics(run.series_ao)

    run.residuals = residual_statistics((basis.expand(values) for values in phases - corrections), basis)
    run.scintillation_index = irradiance_scintillation(np.abs(fields) ** 2)
    velocities = [hypot(vx, vy) for vx, vy in bank.velocities]
    run.figures = link_figures(config, profile)
    run.figures['greenwood_frequency_hz'] = greenwood_frequency(profile, scenario.wavelength, config.elevation_rad, velocities)

    info("[CHANNEL] DONE mean coupling {:.2f} dB without AO{}".format(series_noao.mean_db(), ", {:.2f} dB with AO".format(run.series_ao.mean_db()) if ao else ""))

    return run


def run_link(config: ExperimentConfig, series: ChannelSeries, esn0_db: Optional[float] = None, seed: Optional[int] = None, delta_f: Optional[float] = None, phase_noise: Optional[bool] = None, agc: Optional[bool] = None) -> ReceiverRun:
    """ Single receiver run over a channel series.

    Parameters
    ----------
    config : ExperimentConfig
        Configuration.
    series : ChannelSeries
        Channel series.
    esn0_db : float, optional
        Average Es/N0 (dB), from the configuration by default, as the other overrides.
    seed : int, optional
        Seed of the stream.
    delta_f : float, optional
        Frequency offset (Hz).
    phase_noise : bool, optional
        Apply the coupling phase.
    agc : bool, optional
        AGC in front of the DPLL, by default on fading series only when
        the configuration enables it.

    Returns
    -------
    ReceiverRun
        Report (with theoretical predictions) and traces.
    """
    link = config.link
    esn0_db = link.esn0_db if esn0_db is None else esn0_db
    seed = link.seed if seed is None else seed
    delta_f = link.delta_f if delta_f is None else delta_f
    phase_noise = link.phase_noise if phase_noise is None else phase_noise

    n_samples = config.check_budget()
    settings = receiver_config(config, series)
    if agc is not None:
        settings = replace(settings, agc=agc)

    stream = synthesize_samples(series, delta_f, esn0_db, link.symbol_rate, n_samples, seed, phase_noise=phase_noise, chunk_size=settings.chunk_size)
    run = Receiver(settings, link.symbol_rate, delta_f).run(stream, esn0_db, seed)

    gains = settings.gains()
    predicted = {'pull_in_time': pull_in_time(2 * pi * delta_f, gains.xi, gains.wnt * link.symbol_rate)}
    if isfinite(esn0_db):
        predicted.update(loop_variance_bounds(gains.blt, 10 ** (esn0_db / 10)))
        predicted['ber_theory'] = debpsk_ber_theory(10 ** (esn0_db / 10))
    run.report.predicted = predicted

    rho = series.rho
    run.report.mean_coupling_db = series.mean_db()
    run.report.scintillation_index = float(rho.var() / rho.mean() ** 2) if rho.mean() > 0 else None

    return run


def _link_point(config: ExperimentConfig, series: ChannelSeries, esn0_db: float, seed: int, phase_noise: Optional[bool] = None, agc: Optional[bool] = None, delta_f: Optional[float] = None) -> MetricsReport:
    return run_link(config, series, esn0_db, seed, delta_f, phase_noise, agc).report


def _report_row(snr_db: float, seed: int, report: Optional[MetricsReport], error: Optional[str], blt: float) -> dict:
    row = {column: float('nan') for column in SWEEP_COLUMNS}
    row.update({'snr_db': snr_db, 'seed': seed, 'error': error or ''})
    row.update(loop_variance_bounds(blt, 10 ** (snr_db / 10)) if isfinite(snr_db) else {})
    row['ber_theory'] = debpsk_ber_theory(10 ** (snr_db / 10)) if isfinite(snr_db) else 0.0

    if report is not None:
        row.update({
            'status': report.status.name,
            'acquisition_time_s': report.acquisition_time_s if report.acquisition_time_s is not None else float('nan'),
            'variance': report.phase_error_variance_rad2 if report.phase_error_variance_rad2 is not None else float('nan'),
            'slips': report.cycle_slips,
            'errors': report.ber.errors,
            'bits': report.ber.bits,
            'ber': report.ber.estimate,
            'ber_low': report.ber.ci_low,
            'ber_high': report.ber.ci_high,
        })
    else:
        row['status'] = 'ERROR'

    return row


def run_points(config: ExperimentConfig, series: ChannelSeries, snr_db: Sequence[float], seeds: Sequence[int], processes: Optional[int] = None, **overrides) -> pd.DataFrame:
    """ Receiver runs over (SNR, seed) points in parallel, one row per point.
    """
    points = [(snr, seed) for snr in snr_db for seed in seeds]
    jobs = [Job("snr={} seed={}".format(snr, seed), _link_point, (config, series, snr, seed, overrides.get('phase_noise'), overrides.get('agc'), overrides.get('delta_f'))) for snr, seed in points]

    results = Parallelizer(jobs, processes).run()
    rows = [_report_row(snr, seed, result.value, result.error, config.receiver.blt) for (snr, seed), result in zip(points, results)]

    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def sweep_snr(config: ExperimentConfig, series: ChannelSeries, processes: Optional[int] = None, **overrides) -> pd.DataFrame:
    """ SNR sweep with theory columns.

    Parameters
    ----------
    config : ExperimentConfig
        Configuration, `link.sweep` holds the Es/N0 points and `link.seeds` the trials per point.
    series : ChannelSeries
        Channel series.
    processes : int, optional
        Number of worker processes.

    Returns
    -------
    pandas.DataFrame
        One row per SNR and seed: status, acquisition, variance, bounds, BER and theory.
    """
    if len(config.link.sweep) < 2:
        raise ValueError("Invalid sweep: at least two SNR points required")

    seeds = [config.link.seed + index for index in range(config.link.seeds)]
    return run_points(config, series, config.link.sweep, seeds, processes, **overrides)


def phase_error_stats(true_phase: np.ndarray, nco_phase: np.ndarray, exclusion: int = 0) -> float:
    """ Phase error variance modulo pi, acquisition excluded.

    Parameters
    ----------
    true_phase : numpy.ndarray
        True carrier phase (rad).
    nco_phase : numpy.ndarray
        NCO phase (rad).
    exclusion : int, optional
        Leading samples to drop.

    Returns
    -------
    float
        Population variance of the centered error wrapped modulo pi.
    """
    true_phase, nco_phase = np.asarray(true_phase, dtype=float), np.asarray(nco_phase, dtype=float)
    if true_phase.shape != nco_phase.shape:
        raise ValueError("Invalid phases: lengths differ")
    if exclusion < 0 or exclusion >= len(true_phase):
        raise ValueError("Invalid exclusion: empty retained set")

    return float(np.var(wrap_half_turn(nco_phase[exclusion:] - true_phase[exclusion:])))


def instability_rates(table: pd.DataFrame) -> pd.DataFrame:
    """ Fraction of trials without a stable lock per SNR.
    """
    unstable = table['status'] != LockStatus.LOCKED.name
    rates = unstable.groupby(table['snr_db']).agg(['size', 'mean']).reset_index()
    return rates.rename(columns={'size': 'trials', 'mean': 'unstable_rate'})


def critical_snr(config: ExperimentConfig, series: ChannelSeries, snr_db: Sequence[float], seeds: int = 20, processes: Optional[int] = None, **overrides) -> tuple[pd.DataFrame, float]:
    """ Instability rate per SNR and the critical SNR.

    Parameters
    ----------
    config : ExperimentConfig
        Configuration.
    series : ChannelSeries
        Channel series.
    snr_db : sequence of float
        Es/N0 points (dB).
    seeds : int, optional
        Trials per point.
    processes : int, optional
        Number of worker processes.

    Returns
    -------
    tuple of pandas.DataFrame, float
        Rates (snr_db, trials, unstable_rate) and the lowest SNR above
        which every point locks stably in at least half of the trials
        (NaN if none).
    """
    table = run_points(config, series, sorted(snr_db), [config.link.seed + index for index in range(seeds)], processes, **overrides)
    rates = instability_rates(table)

    threshold = float('nan')
    for snr, rate in zip(rates['snr_db'][::-1], rates['unstable_rate'][::-1]):
        if rate > 0.5:
            break
        threshold = float(snr)

    info("[CRITICAL] threshold {} dB".format(threshold))

    return rates, threshold


def phase_noise_neutrality(config: ExperimentConfig, series: ChannelSeries, processes: Optional[int] = None) -> pd.DataFrame:
    """ Phase error variance with and without the coupling phase.

    Returns
    -------
    pandas.DataFrame
        snr_db, variance_with, variance_without, relative_difference.
    """
    seeds = [config.link.seed + index for index in range(config.link.seeds)]
    with_phase = run_points(config, series, config.snr_points, seeds, processes, phase_noise=True)
    without_phase = run_points(config, series, config.snr_points, seeds, processes, phase_noise=False)

    table = pd.DataFrame({
        'snr_db': with_phase.groupby('snr_db')['variance'].mean().index,
        'variance_with': with_phase.groupby('snr_db')['variance'].mean().values,
        'variance_without': without_phase.groupby('snr_db')['variance'].mean().values,
    })
    table['relative_difference'] = (table['variance_with'] - table['variance_without']).abs() / table['variance_without']

    return table
