"""
Tests of the Zernike basis and the modal projector.
"""

import numpy as np
import pytest
from numpy.testing import assert_allclose

from fsolink.lkio.status import UnderResolvedPupilError
from fsolink.optics.zernike import ZernikeBasis, modal_decompose, modal_reconstruct, noll_to_zernike, radial_polynomial, zernike_mode


@pytest.fixture(scope='module')
def basis():
    return ZernikeBasis(21, 256, 0.5 / 128, 0.5)


class TestNollIndexing:

    @pytest.mark.parametrize('j, expected', [(1, (0, 0)), (2, (1, 1)), (3, (1, -1)), (4, (2, 0)), (5, (2, -2)), (6, (2, 2)), (7, (3, -1)), (8, (3, 1)), (11, (4, 0))])
    def test_orders(self, j, expected):
        assert noll_to_zernike(j) == expected

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            noll_to_zernike(0)

    def test_radial_polynomial(self):
        rho = np.linspace(0, 1, 5)
        assert_allclose(radial_polynomial(2, 0, rho), 2 * rho ** 2 - 1)
        assert not np.any(radial_polynomial(3, 0, rho))


class TestBasis:

    def test_gram_is_identity(self, basis):
        assert basis.gram_error() < 0.02

    def test_piston_is_one_on_the_pupil(self, basis):
        assert_allclose(basis.mode(1)[basis.mask], 1.0)
        assert not np.any(basis.mode(1)[~basis.mask])

    def test_projector_is_idempotent(self, basis):
        coefficients = np.random.default_rng(0).standard_normal(len(basis))
        assert_allclose(modal_decompose(modal_reconstruct(coefficients, basis), basis), coefficients, atol=1e-8)

    def test_single_mode(self, basis):
        coefficients = modal_decompose(0.3 * zernike_mode(5, 256, 0.5 / 128, 0.5), basis)
        expected = np.zeros(len(basis))
        expected[4] = 0.3
        assert_allclose(coefficients, expected, atol=1e-8)

    def test_grid_mismatch(self, basis):
        with pytest.raises(ValueError):
            modal_decompose(np.zeros((64, 64)), basis)

    def test_under_resolved_pupil(self):
        with pytest.raises(UnderResolvedPupilError):
            ZernikeBasis(10, 64, 0.05, 0.5)
