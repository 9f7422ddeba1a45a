"""
Shared fixtures: small grids, fast scenarios and synthetic fading series.
"""

import numpy as np
import pytest

from fsolink.lkio.channel import ChannelSeries
from fsolink.lkio.config import ExperimentConfig
from fsolink.receiver.receiver import BLOCK, ReceiverConfig


@pytest.fixture
def small_config():
    """ Scenario on a 64 x 64 grid (16 pixels across the pupil) with a few layers.
    """
    config = ExperimentConfig()
    config.override([
        'grid_n=64',
        'grid_pitch=0.03125',
        'n_layers=5',
        'n_modes=15',
        'channel_duration=0.004',
        'transverse_velocity=650',
    ])
    return config


@pytest.fixture
def fast_receiver():
    """ Receiver settings scaled to the 1 MBd stream.
    """
    return ReceiverConfig(lock_window=1e3, lock_tolerance=20.0, lock_hold=2e-3, chunk_size=16 * BLOCK)


@pytest.fixture
def link_config():
    """ Configuration of short receiver runs at 1 MBd.
    """
    config = ExperimentConfig()
    config.override([
        'symbol_rate=1e6',
        'delta_f=0',
        'duration=0.2',
        'lock_window=1e3',
        'lock_tolerance=20',
        'lock_hold=2e-3',
        'chunk_size=65536',
    ])
    return config


@pytest.fixture
def full_rate_config():
    """ Reference scenario at 10 GBd, long enough for the pull-in.
    """
    config = ExperimentConfig()
    config.set('duration', '2.5e-3')
    return config


@pytest.fixture
def fading_series():
    """ Log-normal coupling efficiency and random-walk phase at 5 kHz (1 s).
    """
    rng = np.random.default_rng(7)
    n_frames = 5000
    log_rho = np.convolve(rng.standard_normal(n_frames + 9), np.ones(10) / np.sqrt(10), mode='valid')[:n_frames]
    rho = np.exp(0.5 * log_rho - 0.125)
    phi = np.cumsum(0.05 * rng.standard_normal(n_frames))
    return ChannelSeries(5000.0, rho, phi)
