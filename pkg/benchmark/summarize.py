#!/usr/bin/env python3

"""
Run directories to .csv summary script.
"""

import argparse
import glob
import json
import os
import shutil

import numpy as np
import pandas as pd


def sweep_summary(path_outputs):
    """ Per-SNR averages of every `sweep.csv` file.
    """
    tables = []
    for filename in glob.iglob('{}/**/sweep.csv'.format(path_outputs), recursive=True):
        table = pd.read_csv(filename)
        run = os.path.relpath(os.path.dirname(filename), path_outputs)
        table.insert(0, 'RUN', run)
        tables.append(table)

    if not tables:
        return pd.DataFrame()

    sweeps = pd.concat(tables, ignore_index=True)
    sweeps['unstable'] = sweeps['status'] != 'LOCKED'

    summary = sweeps.groupby(['RUN', 'snr_db']).agg(
        trials=('seed', 'size'),
        unstable_rate=('unstable', 'mean'),
        variance=('variance', 'mean'),
        bpsk_penalty=('bpsk_penalty', 'first'),
        errors=('errors', 'sum'),
        bits=('bits', 'sum'),
        ber_theory=('ber_theory', 'first'),
    ).reset_index()
    summary['ber'] = summary['errors'] / summary['bits'].replace(0, np.nan)

    return summary


def report_summary(path_outputs):
    """ One row per `report.json` file.
    """
    rows = []
    for filename in glob.iglob('{}/**/report.json'.format(path_outputs), recursive=True):
        with open(filename) as fp:
            report = json.load(fp)
        rows.append({
            'RUN': os.path.relpath(os.path.dirname(filename), path_outputs),
            'STATUS': report['status'],
            'ACQUISITION': report['acquisition_time_s'],
            'VARIANCE': report['phase_error_variance_rad2'],
            'SLIPS': report['cycle_slips'],
            'BER': report['ber']['estimate'],
        })
    return pd.DataFrame(rows)


def channel_summary(path_outputs):
    """ Channel statistics of every scenario.
    """
    tables = []
    for filename in glob.iglob('{}/**/channel_stats.csv'.format(path_outputs), recursive=True):
        table = pd.read_csv(filename)
        table.insert(0, 'RUN', os.path.relpath(os.path.dirname(filename), path_outputs))
        tables.append(table)
    return pd.concat(tables, ignore_index=True) if tables else pd.DataFrame()


def main():
    """ Main function.
    """
    # Arguments parser
    parser = argparse.ArgumentParser(description='FSOLink Benchmark Script')

    parser.add_argument('path_outputs',
                        metavar='outputs',
                        type=str,
                        help='path to outputs directory')

    results = parser.parse_args()

    merged_path = '{}/merged/'.format(results.path_outputs)

    # Delete `merged` directory
    if os.path.exists(merged_path):
        shutil.rmtree(merged_path)
    os.makedirs(merged_path)

    for name, table in [('sweeps.csv', sweep_summary(results.path_outputs)), ('reports.csv', report_summary(results.path_outputs)), ('channels.csv', channel_summary(results.path_outputs))]:
        print(name)
        if not table.empty:
            table.to_csv(merged_path + name, index=False, encoding='utf-8')
            print(table.to_string(index=False))


if __name__ == "__main__":
    main()
    print("DONE")
    exit(0)
