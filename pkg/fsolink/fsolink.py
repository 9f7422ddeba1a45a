#!/usr/bin/env python3

"""
FSOLink: Coherent LEO-to-Ground Optical Link Simulator

Turbulent downlink, adaptive optics, coherent coupling and carrier
synchronization of a BPSK receiver at desk scale.

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

from argparse import ArgumentParser, Namespace
from logging import DEBUG, basicConfig
from os import makedirs, path
from sys import exit
from time import time
from typing import Optional

import numpy as np
import pandas as pd

from fsolink.atmosphere.propagation import check_aliasing, propagate_downlink
from fsolink.atmosphere.screens import ScreenBank
from fsolink.lab.experiments import constant_series, critical_snr, link_figures, phase_noise_neutrality, receiver_config, run_channel, run_link, scenario_profile, sweep_snr
from fsolink.lab.validation import bound_table, validate
from fsolink.lkio.channel import ChannelSeries, read_channel, write_channel, write_channel_csv
from fsolink.lkio.config import ExperimentConfig
from fsolink.lkio.field import write_field
from fsolink.lkio.status import ExitCode, FsoLinkError, LockStatus, NumericFailure, WorkerError

# Es/N0 grid of the bound tables when no sweep is configured (dB)
BOUNDS_GRID = np.arange(-15.0, 21.0, 3.0)


def output_file(config: ExperimentConfig, name: str) -> str:
    """ Path of a file of the run directory.
    """
    return path.join(config.outputs.output_dir, name)


def load_series(config: ExperimentConfig, filename: Optional[str] = None) -> ChannelSeries:
    """ Channel series of a receiver run, constant amplitude without a channel file.
    """
    if filename is None:
        print("# No channel file, constant-amplitude channel")
        return constant_series(config)

    series = read_channel(filename)
    print("# Channel: {}".format(series))
    return series


def command_channel(config: ExperimentConfig, results: Namespace) -> ExitCode:
    run = run_channel(config, not results.no_ao, results.processes)

    variants = {'noao': run.series_noao}
    if run.series_ao is not None:
        variants['ao'] = run.series_ao

    for variant, series in variants.items():
        write_channel(series, output_file(config, "channel_{}.fsoc".format(variant)))
        write_channel_csv(series, output_file(config, "channel_{}.csv".format(variant)))
        print("# Mean coupling ({}): {:.2f} dB".format(variant, series.mean_db()))

    run.summary().to_csv(output_file(config, "channel_stats.csv"), index=False)
    if run.residuals is not None:
        run.residuals.to_csv(output_file(config, "channel_residuals.csv"), index=False)

    if results.dump_field:
        scenario = config.scenario
        bank = ScreenBank(scenario_profile(config), scenario.grid_n, scenario.grid_pitch, scenario.wavelength, config.elevation_rad, 0.0, scenario.outer_scale, scenario.transverse_velocity, scenario.satellite_altitude, config.link.seed)
        check_aliasing(bank)
        write_field(propagate_downlink(bank, 0.0), output_file(config, "field_t0.fsof"))

    print("# Scintillation index (pupil): {:.3f}".format(run.scintillation_index))
    return ExitCode.OK


def command_link(config: ExperimentConfig, results: Namespace) -> ExitCode:
    series = load_series(config, results.channel)
    run = run_link(config, series)
    report = run.report

    with open(output_file(config, "report.json"), 'w') as fp:
        fp.write(report.to_json())
    run.traces.to_csv(output_file(config, "traces.csv"), index=False)
    if run.samples is not None:
        run.samples.to_csv(output_file(config, "samples.csv"), index=False)

    print("# Status: {}".format(report.status.name))
    if report.locked:
        print("# Acquisition time: {:.3f} ms (predicted {:.3f} ms)".format(report.acquisition_time_s * 1e3, report.predicted['pull_in_time'] * 1e3))
        print("# Phase error variance: {:.3e} rad^2".format(report.phase_error_variance_rad2 if report.phase_error_variance_rad2 is not None else float('nan')))
        print("# Cycle slips: {}".format(report.cycle_slips))
        print("# BER: {:.3e} [{:.3e}, {:.3e}]".format(report.ber.estimate, report.ber.ci_low, report.ber.ci_high))

    return ExitCode.NO_LOCK if report.status is LockStatus.NO_LOCK else ExitCode.OK


def command_sweep(config: ExperimentConfig, results: Namespace) -> ExitCode:
    series = load_series(config, results.channel)

    table = sweep_snr(config, series, results.processes)
    table.to_csv(output_file(config, "sweep.csv"), index=False)
    print(table[['snr_db', 'seed', 'status', 'variance', 'bpsk_penalty', 'ber', 'ber_theory']].to_string(index=False))
    failed = int((table['status'] == 'ERROR').sum())

    if results.critical:
        rates, threshold = critical_snr(config, series, config.link.sweep, config.link.seeds, results.processes)
        rates.to_csv(output_file(config, "critical.csv"), index=False)
        print("# Critical SNR: {} dB".format(threshold))

    if results.neutrality:
        neutrality = phase_noise_neutrality(config, series, results.processes)
        neutrality.to_csv(output_file(config, "neutrality.csv"), index=False)
        print("# Phase noise neutrality: max relative difference {:.1%}".format(neutrality['relative_difference'].max()))

    if failed:
        print("# {} / {} points failed".format(failed, len(table)))
        return ExitCode.NUMERIC_FAILURE

    return ExitCode.OK


def command_bounds(config: ExperimentConfig, results: Namespace) -> ExitCode:
    gains = receiver_config(config).gains()
    print("# K1 = {:.4e}, K2 = {:.4e}, wnT = {:.4e}".format(gains.k1, gains.k2, gains.wnt))

    for key, value in link_figures(config).items():
        print("# {} = {:.4g}".format(key, value))

    grid = config.link.sweep if config.link.sweep else BOUNDS_GRID.tolist()
    table = pd.DataFrame(bound_table(gains.blt, grid))
    table.to_csv(output_file(config, "bounds.csv"), index=False)
    print(table.to_string(index=False))

    return ExitCode.OK


def command_validate(config: ExperimentConfig, results: Namespace) -> ExitCode:
    checks = validate(config, results.quick, results.processes)

    for check in checks:
        print(check)

    failed = sum(not check.passed for check in checks)
    print("# {} / {} checks passed".format(len(checks) - failed, len(checks)))

    return ExitCode.NUMERIC_FAILURE if failed else ExitCode.OK


COMMANDS = {
    'channel': command_channel,
    'link': command_link,
    'sweep': command_sweep,
    'bounds': command_bounds,
    'validate': command_validate,
}


def main():
    """ Main function.
    """
    # Start time
    start_time = time()

    # Arguments parser
    parser = ArgumentParser(description='FSOLink: Coherent LEO-to-Ground Optical Link Simulator')

    parser.add_argument('--version',
                        action='version',
                        version='%(prog)s 1.0',
                        help="show the version number and exit")

    parser.add_argument('-v', '--verbose',
                        action='store_true',
                        help="increase output verbosity")

    parser.add_argument('--config',
                        action='store',
                        dest='path_config',
                        type=str,
                        help='path to the configuration (.txt format)')

    parser.add_argument('--set',
                        action='append',
                        dest='assignments',
                        default=[],
                        metavar='KEY=VALUE',
                        help='override a configuration key (repeatable)')

    parser.add_argument('--esn0',
                        action='store',
                        type=float,
                        help='average Es/N0 (dB)')

    parser.add_argument('--delta-f',
                        action='store',
                        dest='delta_f',
                        type=float,
                        help='carrier frequency offset (Hz)')

    parser.add_argument('--seed',
                        action='store',
                        type=int,
                        help='base seed')

    parser.add_argument('-o', '--output-dir',
                        action='store',
                        dest='output_dir',
                        type=str,
                        help='run directory')

    parser.add_argument('--processes',
                        action='store',
                        type=int,
                        help='number of worker processes (one per CPU by default)')

    subparsers = parser.add_subparsers(dest='command', required=True)

    parser_channel = subparsers.add_parser('channel', help='generate the channel series')
    parser_channel.add_argument('--no-ao',
                                action='store_true',
                                help='skip the AO-corrected series')

    parser_channel.add_argument('--dump-field',
                                action='store_true',
                                help='write the pupil field of the first frame (.fsof format)')

    parser_link = subparsers.add_parser('link', help='single receiver run')
    parser_sweep = subparsers.add_parser('sweep', help='SNR sweep')
    for subparser in [parser_link, parser_sweep]:
        subparser.add_argument('--channel',
                               action='store',
                               type=str,
                               help='path to the channel series (.fsoc format), constant amplitude by default')

    parser_sweep.add_argument('--critical',
                              action='store_true',
                              help='instability rate per SNR and critical SNR')

    parser_sweep.add_argument('--neutrality',
                              action='store_true',
                              help='phase error variance with and without the coupling phase')

    subparsers.add_parser('bounds', help='print the closed-form figures and bound tables')

    parser_validate = subparsers.add_parser('validate', help='run the acceptance checks')
    parser_validate.add_argument('--quick',
                                 action='store_true',
                                 help='closed forms and property checks only')

    results = parser.parse_args()

    print("# Hello")

    # Set the verbose level
    if results.verbose:
        basicConfig(format="%(message)s", level=DEBUG)
    else:
        basicConfig(format="%(message)s")

    try:
        # Read the configuration and apply the overrides
        config = ExperimentConfig(results.path_config)

        assignments = list(results.assignments)
        for key in ['esn0', 'delta_f', 'seed', 'output_dir']:
            value = getattr(results, key)
            if value is not None:
                assignments.append("{}={}".format('esn0_db' if key == 'esn0' else key, value))
        config.override(assignments)

        # Record the configuration in the run directory
        makedirs(config.outputs.output_dir, exist_ok=True)
        with open(output_file(config, "config.txt"), 'w') as fp:
            fp.write(config.dumps())

        code = COMMANDS[results.command](config, results)

    except FileNotFoundError as e:
        print("# Error: {}".format(e))
        exit(ExitCode.USAGE)

    except NumericFailure as e:
        print("# Numeric failure: {}".format(e))
        exit(ExitCode.NUMERIC_FAILURE)

    except WorkerError as e:
        print("# Worker failure: {}".format(e))
        exit(ExitCode.NUMERIC_FAILURE)

    except (FsoLinkError, ValueError) as e:
        print("# Error: {}".format(e))
        exit(ExitCode.USAGE)

    print("# Time: {:.1f} s".format(time() - start_time))
    print("# Bye bye")
    exit(code)


if __name__ == '__main__':
    main()
