"""
Tests of the acceptance checks that run in seconds.
"""

import pytest

from fsolink.lab.validation import Check, bound_table, check_loop_design, check_properties, check_turbulence, validate
from fsolink.lkio.config import ExperimentConfig


@pytest.fixture
def medium_config():
    config = ExperimentConfig()
    config.override(['grid_n=256', 'grid_pitch=0.00390625', 'n_modes=21'])
    return config


def test_loop_design():
    checks = check_loop_design()
    assert len(checks) == 3
    assert all(check.passed for check in checks)


def test_turbulence():
    assert all(check.passed for check in check_turbulence(ExperimentConfig()))


def test_turbulence_failure_is_reported():
    config = ExperimentConfig()
    config.set('c0', '1e-12')
    checks = check_turbulence(config)
    assert not any(check.passed for check in checks)


def test_properties(medium_config):
    checks = check_properties(medium_config)
    failed = [str(check) for check in checks if not check.passed]
    assert not failed


def test_quick_validation(medium_config):
    checks = validate(medium_config, quick=True)
    assert all(check.passed for check in checks)
    assert len(checks) == 3 + 2 + 7


def test_check_text():
    assert str(Check("loop", "loop gains", True, "ok")) == "PASS [loop] loop gains: ok"
    assert str(Check("loop", "pull-in", False, "slow")) == "FAIL [loop] pull-in: slow"


def test_bound_table():
    rows = bound_table(5e-4, [0.0, 10.0])
    assert [row['snr_db'] for row in rows] == [0.0, 10.0]
    assert rows[1]['crb'] == pytest.approx(5e-5)
    assert rows[0]['bpsk_penalty'] > rows[0]['crb'] > rows[0]['bpsk_as_written']
    assert rows[0]['ber_theory'] > rows[1]['ber_theory']
